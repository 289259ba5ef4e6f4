//! Classical weak form of the porous medium equation evaluated on
//! `u = U sgn(x)`:
//!
//! `I = int_0^1 int_{-1}^{1} [u theta'(t) phi0(x) + |u|^(m-1) u theta(t) phi0''(x)] dx dt`.
//!
//! The field is a stationary nonlocal solution but `I = -2 U|U|^(m-1) phi0'(0) int theta`,
//! nonzero for the odd test function.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Space factor of the test function, supported in `(-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi0 {
    /// `x exp(-1/(1-x^2))`, `phi0'(0) = 1/e`.
    Odd,
    /// `exp(-1/(1-x^2))`, `phi0'(0) = 0`.
    Even,
}

/// `phi(t, x) = theta(t) phi0(x)` with `theta` the standard bump on `(0, 1)`
/// scaled to integral `theta_mass`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakPmeTestFn {
    pub phi0: Phi0,
    #[serde(default = "one")]
    pub theta_mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for WeakPmeTestFn {
    fn default() -> Self {
        WeakPmeTestFn {
            phi0: Phi0::Odd,
            theta_mass: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPmeResidual {
    pub quad_n: usize,
    pub value: f64,
    /// Value at `2 quad_n`, used for the resolution check.
    pub refined: f64,
    pub target: f64,
}

/// `g(x) = exp(-1/(1-x^2))` and `q = g'/g` on `|x| < 1`.
fn g_and_q(x: f64) -> (f64, f64) {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        return (0.0, 0.0);
    }
    ((-1.0 / s).exp(), -2.0 * x / (s * s))
}

fn q_prime(x: f64) -> f64 {
    let s = 1.0 - x * x;
    -2.0 / (s * s) - 8.0 * x * x / (s * s * s)
}

impl Phi0 {
    fn eval(self, x: f64) -> f64 {
        let (g, _) = g_and_q(x);
        match self {
            Phi0::Odd => x * g,
            Phi0::Even => g,
        }
    }

    fn second_derivative(self, x: f64) -> f64 {
        let (g, q) = g_and_q(x);
        if g == 0.0 {
            return 0.0;
        }
        let qp = q_prime(x);
        match self {
            Phi0::Odd => g * (2.0 * q + x * (q * q + qp)),
            Phi0::Even => g * (q * q + qp),
        }
    }

    pub fn derivative_at_zero(self) -> f64 {
        match self {
            Phi0::Odd => (-1.0f64).exp(),
            Phi0::Even => 0.0,
        }
    }
}

/// Unnormalised bump on `(0, 1)` and its derivative.
fn bump(t: f64) -> (f64, f64) {
    let s = 2.0 * t - 1.0;
    let (g, q) = g_and_q(s);
    (g, 2.0 * g * q)
}

/// `int_0^1 bump`, composite Simpson at a resolution where the value is
/// converged to rounding.
fn bump_mass() -> f64 {
    let n = 1 << 14;
    let h = 1.0 / n as f64;
    let mut sum = 0.0;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * bump(i as f64 * h).0;
    }
    sum * h / 3.0
}

/// Closed-form value `-2 U|U|^(m-1) phi0'(0) int theta`.
pub fn weak_pme_target(u: f64, m: f64, testfn: &WeakPmeTestFn) -> f64 {
    -2.0 * u * u.abs().powf(m - 1.0) * testfn.phi0.derivative_at_zero() * testfn.theta_mass
}

/// Midpoint rule with `n` cells per axis on `(0,1) x (-1,1)`. Even `n`
/// puts the jump of `sgn` on a cell face.
fn quadrature(u: f64, m: f64, testfn: &WeakPmeTestFn, n: usize, scale: f64) -> f64 {
    let ht = 1.0 / n as f64;
    let hx = 2.0 / n as f64;
    let flux = u * u.abs().powf(m - 1.0);
    let theta: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (b, db) = bump((i as f64 + 0.5) * ht);
            (scale * b, scale * db)
        })
        .collect();
    let space: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let x = -1.0 + (j as f64 + 0.5) * hx;
            let sgn = if x > 0.0 { 1.0 } else { -1.0 };
            (sgn * testfn.phi0.eval(x), sgn * testfn.phi0.second_derivative(x))
        })
        .collect();
    let mut total = 0.0;
    for &(th, dth) in &theta {
        let mut row = 0.0;
        for &(phi, dphi) in &space {
            row += u * dth * phi + flux * th * dphi;
        }
        total += row;
    }
    total * ht * hx
}

/// Brute-force evaluation of the weak-form integral at `quad_n` points per
/// axis. Fails when doubling `quad_n` moves the value by more than 1%.
pub fn weak_pme_residual(
    u: f64,
    m: f64,
    testfn: &WeakPmeTestFn,
    quad_n: usize,
) -> Result<WeakPmeResidual, AnalysisError> {
    if !u.is_finite() {
        return Err(AnalysisError::InvalidSpec(format!("U = {u}")));
    }
    if !(m.is_finite() && m >= 1.0) {
        return Err(AnalysisError::InvalidSpec(format!("m = {m}, need m >= 1")));
    }
    if quad_n < 2 || quad_n % 2 != 0 {
        return Err(AnalysisError::InvalidSpec(format!("quad_n = {quad_n}, need an even number >= 2")));
    }
    if !testfn.theta_mass.is_finite() {
        return Err(AnalysisError::InvalidSpec(format!("theta_mass = {}", testfn.theta_mass)));
    }
    let scale = testfn.theta_mass / bump_mass();
    let value = quadrature(u, m, testfn, quad_n, scale);
    let refined = quadrature(u, m, testfn, 2 * quad_n, scale);
    let floor = 1e-8 * u.abs().powf(m) * testfn.theta_mass.abs();
    if (refined - value).abs() > 0.01 * refined.abs().max(floor) {
        return Err(AnalysisError::QuadratureUnderResolved {
            n: quad_n,
            coarse: value,
            fine: refined,
        });
    }
    Ok(WeakPmeResidual {
        quad_n,
        value,
        refined,
        target: weak_pme_target(u, m, testfn),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        for phi in [Phi0::Odd, Phi0::Even] {
            for &x in &[-0.7, -0.2, 0.0, 0.3, 0.8] {
                let h = 1e-4;
                let fd = (phi.eval(x + h) - 2.0 * phi.eval(x) + phi.eval(x - h)) / (h * h);
                assert!((fd - phi.second_derivative(x)).abs() < 1e-5, "{phi:?} x={x}");
            }
        }
        let d0 = numeric_derivative(|x| Phi0::Odd.eval(x), 0.0);
        assert!((d0 - Phi0::Odd.derivative_at_zero()).abs() < 1e-7);
    }

    #[test]
    fn bump_derivative_and_mass() {
        for &t in &[0.1, 0.4, 0.5, 0.77] {
            let fd = numeric_derivative(|s| bump(s).0, t);
            assert!((fd - bump(t).1).abs() < 1e-6);
        }
        let coarse = {
            let n = 1 << 12;
            let h = 1.0 / n as f64;
            (0..n).map(|i| bump((i as f64 + 0.5) * h).0).sum::<f64>() * h
        };
        assert!((coarse - bump_mass()).abs() < 1e-14);
    }

    #[test]
    fn zero_field_gives_zero() {
        let r = weak_pme_residual(0.0, 2.0, &WeakPmeTestFn::default(), 64).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.target, 0.0);
    }

    #[test]
    fn even_test_function_gives_zero() {
        let tf = WeakPmeTestFn {
            phi0: Phi0::Even,
            theta_mass: 1.0,
        };
        let r = weak_pme_residual(1.5, 2.0, &tf, 256).unwrap();
        assert!(r.value.abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn sign_field_residual_is_minus_two_over_e() {
        let r = weak_pme_residual(1.0, 2.0, &WeakPmeTestFn::default(), 4096).unwrap();
        let expect = -2.0 * (-1.0f64).exp();
        assert!((r.value - expect).abs() < 0.01 * expect.abs(), "{}", r.value);
        assert!((r.target - expect).abs() < 1e-15);
    }

    #[test]
    fn coarse_quadrature_is_rejected() {
        let r = weak_pme_residual(1.0, 2.0, &WeakPmeTestFn::default(), 4);
        assert!(matches!(r, Err(AnalysisError::QuadratureUnderResolved { .. })), "{r:?}");
    }

    #[test]
    fn converges_at_least_second_order() {
        let tf = WeakPmeTestFn::default();
        let i = |n| weak_pme_residual(1.0, 2.0, &tf, n).unwrap().value;
        let (a, b, c) = (i(64), i(128), i(256));
        let order = ((a - b) / (b - c)).abs().log2();
        assert!(order >= 2.0, "order {order}");
    }
}
