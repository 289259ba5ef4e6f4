//! Interaction kernels supported in the unit ball and their midpoint stencils.
//!
//! Every builtin kernel is radial: `J(z) = amplitude * profile(|z|)` for
//! `|z| < 1` and exactly zero otherwise. The amplitude is chosen so that the
//! closed-form L1 norm equals the requested value.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("unsupported dimension {0} (only 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("BadSpacing: horizon / h = {0} is not an integer")]
    BadSpacing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// Constant inside the ball; discontinuous at `|z| = 1`.
    ConstBall,
    /// `(1 - |z|^2)^2`
    QuarticBump,
    /// `cos^2(pi |z| / 2)`
    CosineBump,
}

impl KernelShape {
    fn profile(self, r: f64) -> f64 {
        match self {
            KernelShape::ConstBall => 1.0,
            KernelShape::QuarticBump => {
                let s = 1.0 - r * r;
                s * s
            }
            KernelShape::CosineBump => {
                let c = (0.5 * PI * r).cos();
                c * c
            }
        }
    }

    /// Integral of the unscaled profile over the unit ball of `R^dim`.
    fn profile_integral(self, dim: usize) -> f64 {
        match (self, dim) {
            (KernelShape::ConstBall, 1) => 2.0,
            (KernelShape::ConstBall, _) => PI,
            (KernelShape::QuarticBump, 1) => 16.0 / 15.0,
            (KernelShape::QuarticBump, _) => PI / 3.0,
            (KernelShape::CosineBump, 1) => 1.0,
            (KernelShape::CosineBump, _) => 0.5 * PI - 2.0 / PI,
        }
    }
}

impl fmt::Display for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            KernelShape::ConstBall => "const_ball",
            KernelShape::QuarticBump => "quartic_bump",
            KernelShape::CosineBump => "cosine_bump",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    dim: usize,
    amplitude: f64,
}

impl Kernel {
    /// Kernel scaled so that its L1 norm is `l1_norm`.
    pub fn normalized(shape: KernelShape, dim: usize, l1_norm: f64) -> Result<Self, KernelError> {
        check_dim(dim)?;
        Ok(Kernel {
            shape,
            dim,
            amplitude: l1_norm / shape.profile_integral(dim),
        })
    }

    /// Kernel with a raw amplitude. No sign check is made here; see
    /// [`validate_kernel`].
    pub fn with_amplitude(shape: KernelShape, dim: usize, amplitude: f64) -> Result<Self, KernelError> {
        check_dim(dim)?;
        Ok(Kernel { shape, dim, amplitude })
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `J(z)`. Only the first `dim` components of `z` are read.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().take(self.dim).map(|c| c * c).sum();
        self.eval_radius(r2.sqrt())
    }

    pub fn eval_radius(&self, r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            self.amplitude * self.shape.profile(r)
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.amplitude * self.shape.profile_integral(self.dim)
    }
}

fn check_dim(dim: usize) -> Result<(), KernelError> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(KernelError::UnsupportedDimension(dim))
    }
}

/// Number of grid cells per horizon, or `BadSpacing` when `1/h` is not an
/// integer.
pub fn cells_per_horizon(h: f64) -> Result<usize, KernelError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(KernelError::BadSpacing(1.0 / h));
    }
    let ratio = 1.0 / h;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-9 * r {
        return Err(KernelError::BadSpacing(ratio));
    }
    Ok(r as usize)
}

/// Midpoint quadrature stencil: integer displacements and their weights
/// `J(d h) h^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub h: f64,
    pub dim: usize,
    pub offsets: Vec<[i64; 2]>,
    pub weights: Vec<f64>,
}

impl Stencil {
    /// All offsets with `|d h| < 1`. Support membership is decided on the
    /// integer lattice (`|d|^2 < (1/h)^2`), so it is exact.
    pub fn build(kernel: &Kernel, h: f64) -> Result<Self, KernelError> {
        let r = cells_per_horizon(h)? as i64;
        let dim = kernel.dim();
        let cell = h.powi(dim as i32);
        let (lo2, hi2) = if dim == 2 { (-(r - 1), r - 1) } else { (0, 0) };
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for d2 in lo2..=hi2 {
            for d1 in -(r - 1)..=(r - 1) {
                if d1 * d1 + d2 * d2 >= r * r {
                    continue;
                }
                let z = [d1 as f64 * h, d2 as f64 * h];
                offsets.push([d1, d2]);
                weights.push(kernel.eval(&z) * cell);
            }
        }
        Ok(Stencil { h, dim, offsets, weights })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest displacement measured in cells along one axis.
    pub fn reach(&self) -> i64 {
        self.offsets
            .iter()
            .map(|d| d[0].abs().max(d[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// `|d h| < 1`, decided on the integer lattice when `1/h` is integral.
    pub fn inside_support(&self, d: [i64; 2]) -> bool {
        match cells_per_horizon(self.h) {
            Ok(r) => {
                let r = r as i64;
                d[0] * d[0] + d[1] * d[1] < r * r
            }
            Err(_) => {
                let (a, b) = (d[0] as f64 * self.h, d[1] as f64 * self.h);
                (a * a + b * b).sqrt() < 1.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Norms {
    pub closed_form: f64,
    pub quadrature: f64,
}

impl L1Norms {
    pub fn relative_gap(&self) -> f64 {
        (self.quadrature - self.closed_form).abs() / self.closed_form.abs()
    }
}

pub fn kernel_l1_norm(kernel: &Kernel, stencil: &Stencil) -> L1Norms {
    L1Norms {
        closed_form: kernel.l1_norm(),
        quadrature: stencil.weight_sum(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelViolation {
    NegativeWeight { offset: [i64; 2], weight: f64 },
    /// Nonzero weight at `|d h| >= 1`.
    SupportViolation { offset: [i64; 2], weight: f64 },
    /// Zero (or non-finite) weight strictly inside the ball.
    NotStrictlyPositive { offset: [i64; 2] },
    NonPositiveNorm(f64),
    DimensionMismatch { kernel: usize, stencil: usize },
}

/// Empty iff the kernel invariants hold at every stencil offset.
pub fn validate_kernel(kernel: &Kernel, stencil: &Stencil) -> Vec<KernelViolation> {
    let mut out = Vec::new();
    if kernel.dim() != stencil.dim {
        out.push(KernelViolation::DimensionMismatch {
            kernel: kernel.dim(),
            stencil: stencil.dim,
        });
    }
    let norm = kernel.amplitude() * kernel.shape.profile_integral(kernel.dim());
    // a negative amplitude surfaces as NegativeWeight below
    if !norm.is_finite() || norm == 0.0 {
        out.push(KernelViolation::NonPositiveNorm(norm));
    }
    let mut negative_reported = false;
    for (&offset, &weight) in stencil.offsets.iter().zip(&stencil.weights) {
        let inside = stencil.inside_support(offset);
        if weight < 0.0 && !negative_reported {
            out.push(KernelViolation::NegativeWeight { offset, weight });
            negative_reported = true;
        }
        if !inside && weight != 0.0 {
            out.push(KernelViolation::SupportViolation { offset, weight });
        }
        if inside && !(weight > 0.0) && weight >= 0.0 {
            out.push(KernelViolation::NotStrictlyPositive { offset });
        }
    }
    out
}
