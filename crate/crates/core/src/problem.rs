use crate::conductivity::Conductivity;
use crate::error::Error;
use crate::grid::DomainGrid;
use crate::kernel::{validate_kernel, Kernel, Stencil};
use crate::solver::{NonlocalOperator, SolverError};

/// Grid, kernel, stencil and conductivity of one Dirichlet problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: DomainGrid,
    pub kernel: Kernel,
    pub stencil: Stencil,
    pub conductivity: Conductivity,
}

impl Problem {
    pub fn new(extent: &[f64], h: f64, kernel: Kernel, conductivity: Conductivity) -> Result<Self, Error> {
        if kernel.dim() != extent.len() {
            return Err(Error::Config(format!(
                "kernel dimension {} does not match domain dimension {}",
                kernel.dim(),
                extent.len()
            )));
        }
        conductivity.validate()?;
        let grid = DomainGrid::build(extent, h)?;
        let stencil = Stencil::build(&kernel, h)?;
        let violations = validate_kernel(&kernel, &stencil);
        if !violations.is_empty() {
            return Err(Error::Config(format!("invalid kernel: {violations:?}")));
        }
        Ok(Problem {
            grid,
            kernel,
            stencil,
            conductivity,
        })
    }

    pub fn operator(&self) -> Result<NonlocalOperator, SolverError> {
        NonlocalOperator::new(&self.grid, &self.kernel, &self.stencil, self.conductivity)
    }

    pub fn with_conductivity(&self, conductivity: Conductivity) -> Self {
        Problem {
            conductivity,
            ..self.clone()
        }
    }
}
