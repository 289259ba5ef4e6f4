//! Conductivities `k(u, v)`: evaluation, Lipschitz moduli and zero sets.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConductivityError {
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("NotLipschitzForEvolution: {0}")]
    NotLipschitzForEvolution(String),
    #[error("UndefinedAt({0}): zero set is not defined there")]
    UndefinedAt(f64),
}

/// Families of nonlinearity. Serialized with a `family` tag whose names are
/// part of the run-config format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Conductivity {
    /// `k = 1`
    Linear,
    /// `k = |u - v|^(p-2)`
    PLaplacian { p: f64 },
    /// `k = |u + v|^(m-1)`
    PorousMedium { m: f64 },
    /// `k = |u|^(m-1) + |v|^(m-1)`
    PorousMediumAlt { m: f64 },
    /// `k = |a + u v|^m`
    ProductShift { a: f64, m: f64 },
    /// `k = sin^2(pi (u + v)^2)`
    SinSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSetKind {
    /// `k` never vanishes (away from the diagonal degenerate points).
    Empty,
    /// `F(U) = {U}`
    Diagonal,
    /// `F(U) = {-U}`
    Reflection,
    /// `F(U) = {-a/U}`, `U != 0`
    Involution,
    /// `F(U) = {-U + sgn(n) sqrt|n|}`, `n` in Z
    CountableLadder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroSetMap {
    pub kind: ZeroSetKind,
    pub satisfies_k3: bool,
}

pub const DEFAULT_LADDER: (i64, i64) = (-100, 100);

impl Conductivity {
    pub fn name(&self) -> &'static str {
        match self {
            Conductivity::Linear => "linear",
            Conductivity::PLaplacian { .. } => "p_laplacian",
            Conductivity::PorousMedium { .. } => "porous_medium",
            Conductivity::PorousMediumAlt { .. } => "porous_medium_alt",
            Conductivity::ProductShift { .. } => "product_shift",
            Conductivity::SinSquared => "sin_squared",
        }
    }

    /// Family constraints that must hold for any use, evolution or not.
    pub fn validate(&self) -> Result<(), ConductivityError> {
        let bad = |msg: String| Err(ConductivityError::InvalidParameter(msg));
        match *self {
            Conductivity::PLaplacian { p } if !(p.is_finite() && p >= 2.0) => {
                bad(format!("p_laplacian needs p >= 2, got {p}"))
            }
            Conductivity::PorousMedium { m } if !(m.is_finite() && m > 1.0) => {
                bad(format!("porous_medium needs m > 1, got {m}"))
            }
            Conductivity::PorousMediumAlt { m } if !(m.is_finite() && m >= 1.0) => {
                bad(format!("porous_medium_alt needs m >= 1, got {m}"))
            }
            Conductivity::ProductShift { a, m } => {
                if !(a.is_finite() && a != 0.0) {
                    bad(format!("product_shift needs a != 0, got {a}"))
                } else if !(m.is_finite() && m > 0.0) {
                    bad(format!("product_shift needs m > 0, got {m}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Whether [`Conductivity::lip_modulus`] is finite on bounded sets, which
    /// the window length relies on.
    pub fn check_evolution(&self) -> Result<(), ConductivityError> {
        self.validate()?;
        let not_lip = |msg: String| Err(ConductivityError::NotLipschitzForEvolution(msg));
        match *self {
            Conductivity::PLaplacian { p } if p < 3.0 => {
                not_lip(format!("p_laplacian with p = {p} < 3"))
            }
            Conductivity::PorousMedium { m } if m < 2.0 => {
                not_lip(format!("porous_medium with m = {m} < 2"))
            }
            Conductivity::PorousMediumAlt { m } if m > 1.0 && m < 2.0 => {
                not_lip(format!("porous_medium_alt with 1 < m = {m} < 2"))
            }
            Conductivity::ProductShift { m, .. } if m < 1.0 => {
                not_lip(format!("product_shift with m = {m} < 1"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            Conductivity::Linear => 1.0,
            Conductivity::PLaplacian { p } => (u - v).abs().powf(p - 2.0),
            Conductivity::PorousMedium { m } => (u + v).abs().powf(m - 1.0),
            Conductivity::PorousMediumAlt { m } => u.abs().powf(m - 1.0) + v.abs().powf(m - 1.0),
            Conductivity::ProductShift { a, m } => (a + u * v).abs().powf(m),
            Conductivity::SinSquared => {
                let s = u + v;
                sin_pi_squared(s * s)
            }
        }
    }

    /// A modulus `K(a, b)` valid for the local Lipschitz bound
    /// `|k(u,v) - k(u',v')| <= K(|u|+|u'|, |v|+|v'|) (|u-u'| + |v-v'|)`.
    pub fn lip_modulus(&self, a: f64, b: f64) -> f64 {
        match *self {
            Conductivity::Linear => 0.0,
            Conductivity::PLaplacian { p } => (p - 2.0) * (a + b).powf(p - 3.0),
            Conductivity::PorousMedium { m } => (m - 1.0) * (a + b).powf(m - 2.0),
            Conductivity::PorousMediumAlt { m } => (m - 1.0) * a.max(b).powf(m - 2.0),
            // |uv - u'v'| <= max(a, b) (|u-u'| + |v-v'|) and |a + uv| <= |a| + ab
            Conductivity::ProductShift { a: shift, m } => {
                m * (shift.abs() + a * b).powf(m - 1.0) * a.max(b)
            }
            Conductivity::SinSquared => 4.0 * PI * (a + b),
        }
    }

    pub fn zero_set_map(&self) -> ZeroSetMap {
        let kind = match *self {
            Conductivity::Linear => ZeroSetKind::Empty,
            Conductivity::PLaplacian { p } if p == 2.0 => ZeroSetKind::Empty,
            Conductivity::PLaplacian { .. } => ZeroSetKind::Diagonal,
            Conductivity::PorousMedium { .. } => ZeroSetKind::Reflection,
            Conductivity::PorousMediumAlt { .. } => ZeroSetKind::Empty,
            Conductivity::ProductShift { .. } => ZeroSetKind::Involution,
            Conductivity::SinSquared => ZeroSetKind::CountableLadder,
        };
        ZeroSetMap {
            kind,
            satisfies_k3: self.satisfies_k3(),
        }
    }

    /// `k(u, v) = 0` implies `u = v` or `u = -v`.
    pub fn satisfies_k3(&self) -> bool {
        matches!(
            self,
            Conductivity::Linear
                | Conductivity::PLaplacian { .. }
                | Conductivity::PorousMedium { .. }
                | Conductivity::PorousMediumAlt { .. }
        )
    }

    /// Values `V` with `k(U, V) = 0`. The ladder family is truncated to
    /// `n` in `ladder.0..=ladder.1`.
    pub fn zero_set(&self, u: f64, ladder: (i64, i64)) -> Result<Vec<f64>, ConductivityError> {
        Ok(match *self {
            Conductivity::Linear => vec![],
            Conductivity::PLaplacian { p } if p == 2.0 => vec![],
            Conductivity::PLaplacian { .. } => vec![u],
            Conductivity::PorousMedium { .. } => vec![-u],
            Conductivity::PorousMediumAlt { m } => {
                if u == 0.0 && m > 1.0 {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            Conductivity::ProductShift { a, .. } => {
                if u == 0.0 {
                    return Err(ConductivityError::UndefinedAt(u));
                }
                vec![-a / u]
            }
            Conductivity::SinSquared => (ladder.0..=ladder.1).map(|n| -u + signed_sqrt(n)).collect(),
        })
    }

    /// Largest sampled excess of `|k(u,v) - k(u',v')|` over the modulus bound
    /// on `[-bound, bound]^4`. Zero means no violation was found. A few ulps
    /// of rounding are forgiven.
    pub fn verify_lip(&self, bound: f64, samples: usize, seed: u64) -> Result<f64, ConductivityError> {
        self.check_evolution()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for i in 0..samples {
            let u = rng.gen_range(-bound..=bound);
            let v = rng.gen_range(-bound..=bound);
            // half the samples probe small increments, where the modulus is tight
            let (up, vp) = if i % 2 == 0 {
                (rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound))
            } else {
                let scale = bound * 10f64.powi(-rng.gen_range(1..8));
                let du: f64 = rng.gen_range(-scale..=scale);
                let dv: f64 = rng.gen_range(-scale..=scale);
                ((u + du).clamp(-bound, bound), (v + dv).clamp(-bound, bound))
            };
            let k1 = self.eval(u, v);
            let k2 = self.eval(up, vp);
            let modulus = self.lip_modulus(u.abs() + up.abs(), v.abs() + vp.abs());
            let rhs = modulus * ((u - up).abs() + (v - vp).abs());
            let slack = 4.0 * f64::EPSILON * (k1.abs() + k2.abs() + rhs);
            worst = worst.max((k1 - k2).abs() - rhs - slack);
        }
        Ok(worst.max(0.0))
    }
}

impl fmt::Display for Conductivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Conductivity::PLaplacian { p } => write!(f, "p_laplacian(p={p})"),
            Conductivity::PorousMedium { m } => write!(f, "porous_medium(m={m})"),
            Conductivity::PorousMediumAlt { m } => write!(f, "porous_medium_alt(m={m})"),
            Conductivity::ProductShift { a, m } => write!(f, "product_shift(a={a},m={m})"),
            _ => f.write_str(self.name()),
        }
    }
}

/// `sgn(n) sqrt|n|`
pub fn signed_sqrt(n: i64) -> f64 {
    let r = (n.unsigned_abs() as f64).sqrt();
    if n < 0 {
        -r
    } else {
        r
    }
}

/// `sin^2(pi x)` with the argument reduced modulo 1 first, so integer `x`
/// gives an exact zero.
fn sin_pi_squared(x: f64) -> f64 {
    let r = x - x.round();
    let s = (PI * r).sin();
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    const PM2: Conductivity = Conductivity::PorousMedium { m: 2.0 };
    const PM3: Conductivity = Conductivity::PorousMedium { m: 3.0 };

    fn all() -> Vec<Conductivity> {
        vec![
            Conductivity::Linear,
            Conductivity::PLaplacian { p: 3.0 },
            Conductivity::PLaplacian { p: 4.5 },
            PM2,
            PM3,
            Conductivity::PorousMediumAlt { m: 2.0 },
            Conductivity::PorousMediumAlt { m: 3.5 },
            Conductivity::ProductShift { a: 1.0, m: 1.0 },
            Conductivity::ProductShift { a: -0.5, m: 2.0 },
            Conductivity::SinSquared,
        ]
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(PM2.eval(1.0, -1.0), 0.0);
        assert_eq!(Conductivity::Linear.eval(7.0, -3.0), 1.0);
        assert_eq!(Conductivity::SinSquared.eval(1.0, 2.0), 0.0);
        assert!((Conductivity::SinSquared.eval(0.5, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(PM2.lip_modulus(0.3, 7.0), 1.0);
        assert_eq!(PM2.lip_modulus(0.0, 0.0), 1.0);
        assert_eq!(Conductivity::Linear.lip_modulus(5.0, 5.0), 0.0);
        assert_eq!(PM3.lip_modulus(2.0, 2.0), 8.0);
    }

    #[test]
    fn zero_set_examples() {
        assert_eq!(PM2.zero_set(3.0, DEFAULT_LADDER).unwrap(), vec![-3.0]);
        let ps = Conductivity::ProductShift { a: 1.0, m: 1.0 };
        assert_eq!(ps.zero_set(2.0, DEFAULT_LADDER).unwrap(), vec![-0.5]);
        assert_eq!(ps.zero_set(0.0, DEFAULT_LADDER), Err(ConductivityError::UndefinedAt(0.0)));
        assert!(Conductivity::Linear.zero_set(1.0, DEFAULT_LADDER).unwrap().is_empty());
        assert!(Conductivity::PorousMediumAlt { m: 2.0 }
            .zero_set(1.0, DEFAULT_LADDER)
            .unwrap()
            .is_empty());
        let ladder = Conductivity::SinSquared.zero_set(0.25, (-3, 3)).unwrap();
        assert_eq!(ladder.len(), 7);
    }

    #[test]
    fn zero_sets_are_zeros_and_involutive() {
        for c in all() {
            for &u in &[-2.5, -1.0, -0.3, 0.7, 1.0, 4.0] {
                let vs = c.zero_set(u, DEFAULT_LADDER).unwrap();
                for &v in &vs {
                    assert!(c.eval(u, v).abs() <= 1e-12, "{c} U={u} V={v}");
                }
                let kind = c.zero_set_map().kind;
                if matches!(kind, ZeroSetKind::Reflection | ZeroSetKind::Involution) {
                    let back = c.zero_set(vs[0], DEFAULT_LADDER).unwrap();
                    assert!((back[0] - u).abs() <= 1e-15 * u.abs(), "{c}");
                }
            }
        }
    }

    #[test]
    fn lipschitz_sampling() {
        assert_eq!(PM2.verify_lip(2.0, 10_000, 7).unwrap(), 0.0);
        assert_eq!(Conductivity::Linear.verify_lip(5.0, 1000, 7).unwrap(), 0.0);
        for c in all() {
            assert_eq!(c.verify_lip(2.0, 20_000, 3).unwrap(), 0.0, "{c}");
        }
        let err = Conductivity::PLaplacian { p: 2.5 }.verify_lip(1.0, 10, 0);
        assert!(matches!(err, Err(ConductivityError::NotLipschitzForEvolution(_))));
    }

    #[test]
    fn parameter_validation() {
        assert!(Conductivity::PLaplacian { p: 2.5 }.validate().is_ok());
        assert!(Conductivity::PLaplacian { p: 2.5 }.check_evolution().is_err());
        assert!(Conductivity::PLaplacian { p: 1.5 }.validate().is_err());
        assert!(Conductivity::PorousMedium { m: 1.0 }.validate().is_err());
        assert!(Conductivity::ProductShift { a: 0.0, m: 1.0 }.validate().is_err());
        for c in all() {
            assert!(c.check_evolution().is_ok(), "{c}");
        }
    }

    #[test]
    fn config_names() {
        let c: Conductivity = serde_json::from_str(r#"{"family":"p_laplacian","p":3}"#).unwrap();
        assert_eq!(c, Conductivity::PLaplacian { p: 3.0 });
        let c: Conductivity = serde_json::from_str(r#"{"family":"sin_squared"}"#).unwrap();
        assert_eq!(c.name(), "sin_squared");
        let c: Conductivity =
            serde_json::from_str(r#"{"family":"porous_medium_alt","m":2}"#).unwrap();
        assert_eq!(c.name(), "porous_medium_alt");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn nonnegative_and_symmetric(u in -10.0f64..10.0, v in -10.0f64..10.0) {
                for c in all() {
                    let k = c.eval(u, v);
                    prop_assert!(k >= 0.0);
                    prop_assert_eq!(k, c.eval(v, u));
                }
            }

            #[test]
            fn modulus_nondecreasing(a in 0.0f64..5.0, b in 0.0f64..5.0, da in 0.0f64..1.0, db in 0.0f64..1.0) {
                for c in all() {
                    prop_assert!(c.lip_modulus(a, b) >= 0.0);
                    prop_assert!(c.lip_modulus(a + da, b + db) >= c.lip_modulus(a, b) * (1.0 - 1e-15));
                }
            }

            #[test]
            fn k3_zeros_lie_on_diagonals(u in -3.0f64..3.0, t in -1.0f64..1.0, pick in 0usize..3) {
                // bias samples onto and near the diagonals so zeros are actually hit
                let v = match pick { 0 => u, 1 => -u, _ => t };
                let k3 = [
                    Conductivity::Linear,
                    Conductivity::PLaplacian { p: 3.0 },
                    PM2,
                    PM3,
                    Conductivity::PorousMediumAlt { m: 2.0 },
                ];
                for c in k3 {
                    prop_assert!(c.satisfies_k3());
                    if c.eval(u, v) <= 1e-14 {
                        prop_assert!((u - v).abs().min((u + v).abs()) <= 1e-7, "{} {} {}", c, u, v);
                    }
                }
            }
        }
    }
}
