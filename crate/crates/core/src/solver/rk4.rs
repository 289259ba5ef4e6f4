use super::{NonlocalOperator, SolverError, Trajectory};
use crate::grid::Field;

/// Classical four-stage Runge-Kutta on the semi-discrete system, recording
/// every step. Only used as an independent cross-check of [`super::solve`].
pub fn rk4_reference(
    op: &NonlocalOperator,
    initial: &Field,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory, SolverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::InvalidArgument(format!("dt = {dt}")));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(SolverError::InvalidArgument(format!("t_final = {t_final}")));
    }
    initial.check_finite()?;
    let n = op.n_interior();
    let steps = (t_final / dt - 1e-9).ceil().max(1.0) as usize;

    let mut traj = Trajectory {
        direction: op.direction(),
        times: Vec::new(),
        fields: Vec::new(),
        extrema: Vec::new(),
        windows: Vec::new(),
    };
    traj.push(0.0, initial.clone());

    let mut u = initial.values().to_vec();
    let mut stage = u.clone();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut t = 0.0;
    for step in 1..=steps {
        let t_next = if step == steps { t_final } else { step as f64 * dt };
        let h = t_next - t;
        op.rhs_into(&u, &mut k[0]);
        for (s, coef) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            for i in 0..n {
                stage[i] = u[i] + coef * h * k[s - 1][i];
            }
            op.rhs_into(&stage, &mut k[s]);
        }
        for i in 0..n {
            u[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        if u[..n].iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteState { t: t_next });
        }
        t = t_next;
        traj.push(t, Field::from_values(n, u.clone()));
    }
    Ok(traj)
}
