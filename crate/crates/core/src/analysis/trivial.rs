//! Trivial solutions: fields for which every term of the nonlocal integrand
//! vanishes, so the evolution leaves them unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::conductivity::{signed_sqrt, Conductivity};
use crate::grid::{DomainGrid, Field, NodePoint};
use crate::kernel::Stencil;

/// Selector `alpha(x)` choosing between the two admissible values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaPattern {
    /// `sgn(sin(1/x_1))` with `sgn(0) = 1` and `alpha(0) = 1`.
    #[serde(rename = "sgn_sin_inv")]
    SgnSin1OverX,
    /// `sgn(x_1)`, `sgn(0) = 1`.
    SgnX,
    /// Parity of the cell index.
    Checkerboard,
    SeededRandom { seed: u64 },
}

impl AlphaPattern {
    /// `true` selects the primary value `U`.
    pub fn select(&self, p: &NodePoint) -> bool {
        match *self {
            AlphaPattern::SgnSin1OverX => {
                let x = p.x[0];
                x == 0.0 || (1.0 / x).sin() >= 0.0
            }
            AlphaPattern::SgnX => p.x[0] >= 0.0,
            AlphaPattern::Checkerboard => (p.index[0] + p.index[1]).rem_euclid(2) == 0,
            AlphaPattern::SeededRandom { seed } => node_rng(seed, p.index).gen::<bool>(),
        }
    }
}

/// Independent random stream per lattice cell, so sampling does not depend
/// on visiting order.
pub(crate) fn node_rng(seed: u64, index: [i64; 2]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = ((index[0] as u32 as u64) << 32) | (index[1] as u32 as u64);
    rng.set_stream(key);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrivialKind {
    ConstantU { u: f64 },
    /// Values `{U, -U}`; trivial for `|u + v|^(m-1)`.
    PmeSign { u: f64 },
    /// Values `{U, -a/U}`; trivial for `|a + uv|^m`.
    Involution { u: f64, a: f64 },
    /// Values `{U, -U + sgn(n) sqrt|n|}`; trivial for `sin^2(pi (u+v)^2)`.
    SinSqPair { u: f64, n: i64 },
    /// Integer values in `[-levels, levels]`; trivial for `sin^2(pi (u+v)^2)`.
    IntegerField { levels: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrivialSpec {
    #[serde(flatten)]
    pub kind: TrivialKind,
    pub pattern: AlphaPattern,
}

impl TrivialSpec {
    pub fn new(kind: TrivialKind, pattern: AlphaPattern) -> Self {
        TrivialSpec { kind, pattern }
    }

    /// Scale `|U|` used by the stationarity tolerance.
    pub fn scale(&self) -> f64 {
        match self.kind {
            TrivialKind::ConstantU { u }
            | TrivialKind::PmeSign { u }
            | TrivialKind::Involution { u, .. }
            | TrivialKind::SinSqPair { u, .. } => u.abs(),
            TrivialKind::IntegerField { levels } => levels.unsigned_abs() as f64,
        }
    }

    /// The conductivity family whose zero structure this field is built from.
    pub fn natural_conductivity(&self) -> Option<Conductivity> {
        match self.kind {
            TrivialKind::ConstantU { .. } => None,
            TrivialKind::PmeSign { .. } => Some(Conductivity::PorousMedium { m: 2.0 }),
            TrivialKind::Involution { a, .. } => Some(Conductivity::ProductShift { a, m: 1.0 }),
            TrivialKind::SinSqPair { .. } | TrivialKind::IntegerField { .. } => {
                Some(Conductivity::SinSquared)
            }
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: String| Err(AnalysisError::InvalidSpec(m));
        match self.kind {
            TrivialKind::ConstantU { u } | TrivialKind::PmeSign { u } | TrivialKind::SinSqPair { u, .. }
                if !u.is_finite() =>
            {
                bad(format!("U = {u} is not finite"))
            }
            TrivialKind::Involution { u, a } => {
                if !(u.is_finite() && u != 0.0) {
                    bad(format!("Involution needs U != 0, got {u}"))
                } else if !(a.is_finite() && a != 0.0) {
                    bad(format!("Involution needs a != 0, got {a}"))
                } else if a + u * (-a / u) != 0.0 {
                    bad(format!("U = {u}, a = {a}: a + U(-a/U) is not exactly 0 in floating point"))
                } else {
                    Ok(())
                }
            }
            TrivialKind::SinSqPair { u, n } => {
                let s = u + (-u + signed_sqrt(n));
                if (s * s).fract() != 0.0 {
                    bad(format!("U = {u}, n = {n}: (U + V)^2 is not exactly an integer in floating point"))
                } else {
                    Ok(())
                }
            }
            TrivialKind::IntegerField { levels } if !(0..=(1 << 26)).contains(&levels) => {
                bad(format!("IntegerField levels = {levels} out of range"))
            }
            _ => Ok(()),
        }
    }

    /// Value at one node.
    pub fn sample(&self, p: &NodePoint) -> f64 {
        let primary = self.pattern.select(p);
        match self.kind {
            TrivialKind::ConstantU { u } => u,
            TrivialKind::PmeSign { u } => {
                if primary {
                    u
                } else {
                    -u
                }
            }
            TrivialKind::Involution { u, a } => {
                if primary {
                    u
                } else {
                    -a / u
                }
            }
            TrivialKind::SinSqPair { u, n } => {
                if primary {
                    u
                } else {
                    -u + signed_sqrt(n)
                }
            }
            TrivialKind::IntegerField { levels } => match self.pattern {
                AlphaPattern::SeededRandom { seed } => {
                    let mut rng = node_rng(seed ^ 0x9e37_79b9_7f4a_7c15, p.index);
                    rng.gen_range(-levels..=levels) as f64
                }
                _ => {
                    if primary {
                        levels as f64
                    } else {
                        -(levels as f64)
                    }
                }
            },
        }
    }
}

/// Samples the trivial field at every node, collar included (a trivial
/// solution constrains its Dirichlet data too).
pub fn make_trivial(spec: &TrivialSpec, grid: &DomainGrid) -> Result<Field, AnalysisError> {
    spec.validate()?;
    let values: Vec<f64> = (0..grid.n_nodes()).map(|n| spec.sample(&grid.point(n))).collect();
    Ok(Field::from_values(grid.n_interior(), values))
}

/// Pointwise (not integrated) residual
/// `max_{x in Omega, d} |k(u(x), u(x+d)) [u(x+d) - u(x)] w_d|`.
pub fn trivial_residual(grid: &DomainGrid, stencil: &Stencil, c: &Conductivity, field: &Field) -> f64 {
    let values = field.values();
    let mut worst = 0.0f64;
    for node in 0..grid.n_interior() {
        let ux = values[node];
        for (&d, &w) in stencil.offsets.iter().zip(&stencil.weights) {
            if let Some(nb) = grid.neighbor(node, d) {
                let uy = values[nb];
                worst = worst.max((c.eval(ux, uy) * (uy - ux) * w).abs());
            }
        }
    }
    worst
}

/// `max_d |k(U, u(chi+d)) [u(chi+d) - U] w_d|` around node `chi`. Offsets
/// that leave the represented nodes are skipped.
pub fn semitrivial_residual(
    grid: &DomainGrid,
    stencil: &Stencil,
    c: &Conductivity,
    field: &Field,
    u: f64,
    chi: usize,
) -> f64 {
    let values = field.values();
    stencil
        .offsets
        .iter()
        .zip(&stencil.weights)
        .filter_map(|(&d, &w)| grid.neighbor(chi, d).map(|nb| (values[nb], w)))
        .fold(0.0f64, |m, (uy, w)| m.max((c.eval(u, uy) * (uy - u) * w).abs()))
}
