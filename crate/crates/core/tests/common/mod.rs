#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nonloc::conductivity::Conductivity;
use nonloc::grid::{make_field, Field};
use nonloc::kernel::{Kernel, KernelShape};
use nonloc::Problem;

/// `Omega = (0, 1)`, constant kernel with unit mass.
pub fn unit_problem(h: f64, c: Conductivity) -> Problem {
    let kernel = Kernel::normalized(KernelShape::ConstBall, 1, 1.0).unwrap();
    Problem::new(&[1.0], h, kernel, c).unwrap()
}

pub fn field(problem: &Problem, interior: impl Fn(f64) -> f64, collar: impl Fn(f64) -> f64) -> Field {
    make_field(&problem.grid, |p| interior(p.x[0]), |p| collar(p.x[0])).unwrap()
}

pub fn bump(x: f64) -> f64 {
    let z = 2.0 * x - 1.0;
    if z.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - z * z)).exp()
    }
}

/// Semi-discrete linear system `u' = M u + b` on the interior nodes, with
/// the collar values folded into `b`. Assembled straight from the grid and
/// stencil, independently of the solver's operator.
pub fn linear_system(problem: &Problem, field: &Field) -> (DMatrix<f64>, DVector<f64>) {
    let n = problem.grid.n_interior();
    let mut m = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for i in 0..n {
        for (&d, &w) in problem.stencil.offsets.iter().zip(&problem.stencil.weights) {
            let j = problem.grid.neighbor(i, d).expect("stencil stays inside the collar");
            m[(i, i)] -= w;
            if j < n {
                m[(i, j)] += w;
            } else {
                b[i] += w * field.values()[j];
            }
        }
    }
    (m, b)
}

/// Exact interior solution at time `t` of the linear semi-discrete system,
/// via the exponential of the augmented matrix `[[M, b], [0, 0]]`.
pub fn expm_solution(problem: &Problem, initial: &Field, t: f64) -> Vec<f64> {
    let (m, b) = linear_system(problem, initial);
    let n = m.nrows();
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(m * t));
    aug.view_mut((0, n), (n, 1)).copy_from(&(b * t));
    let e = aug.exp();
    let mut x = DVector::zeros(n + 1);
    x.rows_mut(0, n).copy_from_slice(initial.interior());
    x[n] = 1.0;
    let y = e * x;
    y.rows(0, n).iter().copied().collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
