//! Named initial and boundary profiles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::AlphaPattern;
use crate::grid::{make_field, DomainGrid, Field, GridError, NodePoint};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(1 - 1/(1 - r^2))` with `r = |x - center| / radius`.
    /// Defaults: centre of the domain, radius half the shortest side.
    Bump {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        radius: Option<f64>,
    },
    /// Affine in `x_1`, `from` at `x_1 = 0` and `to` at `x_1 = L_1`.
    LinearRamp {
        from: f64,
        to: f64,
    },
    /// Uniform on `[range[0], range[1]]`, one independent stream per cell.
    /// Without a seed the run seed is used.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        range: [f64; 2],
    },
    SgnSinInv {
        #[serde(default = "one")]
        amplitude: f64,
    },
    SgnX {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Checkerboard {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Constant { .. } => "constant",
            Profile::Bump { .. } => "bump",
            Profile::LinearRamp { .. } => "linear_ramp",
            Profile::Random { .. } => "random",
            Profile::SgnSinInv { .. } => "sgn_sin_inv",
            Profile::SgnX { .. } => "sgn_x",
            Profile::Checkerboard { .. } => "checkerboard",
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), String> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{}: {name} = {v}", self.name()))
            }
        };
        match self {
            Profile::Constant { value } => finite("value", *value),
            Profile::Bump {
                amplitude,
                center,
                radius,
            } => {
                finite("amplitude", *amplitude)?;
                if let Some(c) = center {
                    if c.len() != dim {
                        return Err(format!("bump: center has {} coordinates, domain has {dim}", c.len()));
                    }
                    for &v in c {
                        finite("center", v)?;
                    }
                }
                match radius {
                    Some(r) if !(r.is_finite() && *r > 0.0) => Err(format!("bump: radius = {r}")),
                    _ => Ok(()),
                }
            }
            Profile::LinearRamp { from, to } => {
                finite("from", *from)?;
                finite("to", *to)
            }
            Profile::Random { range, .. } => {
                finite("range", range[0])?;
                finite("range", range[1])?;
                if range[0] > range[1] {
                    return Err(format!("random: empty range [{}, {}]", range[0], range[1]));
                }
                Ok(())
            }
            Profile::SgnSinInv { amplitude } | Profile::SgnX { amplitude } | Profile::Checkerboard { amplitude } => {
                finite("amplitude", *amplitude)
            }
        }
    }

    pub fn sample(&self, p: &NodePoint, extent: &[f64], run_seed: u64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Bump {
                amplitude,
                center,
                radius,
            } => {
                let radius = radius.unwrap_or_else(|| 0.5 * extent.iter().copied().fold(f64::INFINITY, f64::min));
                let r2: f64 = (0..extent.len())
                    .map(|i| {
                        let c = center.as_ref().map_or(0.5 * extent[i], |c| c[i]);
                        let z = (p.x[i] - c) / radius;
                        z * z
                    })
                    .sum();
                if r2 >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            }
            Profile::LinearRamp { from, to } => from + (to - from) * p.x[0] / extent[0],
            Profile::Random { seed, range } => {
                let mut rng = crate::analysis::node_rng(seed.unwrap_or(run_seed), p.index);
                if range[0] == range[1] {
                    range[0]
                } else {
                    rng.gen_range(range[0]..=range[1])
                }
            }
            Profile::SgnSinInv { amplitude } => signed(*amplitude, AlphaPattern::SgnSin1OverX.select(p)),
            Profile::SgnX { amplitude } => signed(*amplitude, AlphaPattern::SgnX.select(p)),
            Profile::Checkerboard { amplitude } => signed(*amplitude, AlphaPattern::Checkerboard.select(p)),
        }
    }
}

fn signed(amplitude: f64, positive: bool) -> f64 {
    if positive {
        amplitude
    } else {
        -amplitude
    }
}

/// Field with interior values from `initial` and collar values from `psi`.
pub fn build_field(grid: &DomainGrid, initial: &Profile, psi: &Profile, run_seed: u64) -> Result<Field, GridError> {
    let extent = grid.extent().to_vec();
    make_field(
        grid,
        |p| initial.sample(p, &extent, run_seed),
        |p| psi.sample(p, &extent, run_seed),
    )
}
