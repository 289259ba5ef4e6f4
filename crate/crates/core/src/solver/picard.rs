use serde::{Deserialize, Serialize};

use super::{window_length, Direction, NonlocalOperator, PicardOptions, SolverError};
use crate::grid::{extrema, ExtremaRecord, Field};

/// One Picard contraction window.
///
/// `states[j]` is the converged iterate at local time `j * dt` (full node
/// vector, collar included) and `rates[j]` the interior RHS that produced it.
#[derive(Debug, Clone)]
pub struct SolveWindow {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub substeps: usize,
    pub epsilon: f64,
    pub tol: f64,
    pub iterations: usize,
    /// `|||u^(j+1) - u^j||| / |||u^j - u^(j-1)|||` per iteration.
    pub contraction_ratios: Vec<f64>,
    /// `|||u^(j)|||` for every iterate, starting with the initial one.
    pub iterate_norms: Vec<f64>,
    pub converged: bool,
    states: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
    n_interior: usize,
}

impl SolveWindow {
    pub fn length(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.length() / self.substeps as f64
    }

    pub fn max_ratio(&self) -> f64 {
        self.contraction_ratios.iter().fold(0.0, |m, &r| m.max(r))
    }

    pub fn max_iterate_norm(&self) -> f64 {
        self.iterate_norms.iter().fold(0.0, |m, &r| m.max(r))
    }

    /// States at the `substeps + 1` time nodes.
    pub fn node_states(&self) -> impl Iterator<Item = Field> + '_ {
        self.states
            .iter()
            .map(|v| Field::from_values(self.n_interior, v.clone()))
    }

    pub fn end_state(&self) -> Field {
        Field::from_values(self.n_interior, self.states[self.substeps].clone())
    }

    /// State at `t_start + local`, integrating the piecewise-linear RHS
    /// exactly between time nodes (consistent with the trapezoid rule).
    pub fn state_at(&self, local: f64) -> Field {
        let dt = self.dt();
        if local >= self.length() {
            return self.end_state();
        }
        if local <= 0.0 {
            return Field::from_values(self.n_interior, self.states[0].clone());
        }
        let j = ((local / dt).floor() as usize).min(self.substeps - 1);
        let s = local - j as f64 * dt;
        let mut values = self.states[j].clone();
        if s > 0.0 {
            let (fa, fb) = (&self.rates[j], &self.rates[j + 1]);
            let c = s * s / (2.0 * dt);
            for i in 0..self.n_interior {
                values[i] += s * fa[i] + c * (fb[i] - fa[i]);
            }
        }
        Field::from_values(self.n_interior, values)
    }

    pub fn summary(&self) -> WindowSummary {
        WindowSummary {
            index: self.index,
            t_start: self.t_start,
            t_end: self.t_end,
            epsilon: self.epsilon,
            iterations: self.iterations,
            max_ratio: self.max_ratio(),
            contraction_ratios: self.contraction_ratios.clone(),
            max_iterate_norm: self.max_iterate_norm(),
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub max_ratio: f64,
    pub contraction_ratios: Vec<f64>,
    pub max_iterate_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub direction: Direction,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
    pub extrema: Vec<ExtremaRecord>,
    pub windows: Vec<WindowSummary>,
}

impl Trajectory {
    fn new(direction: Direction) -> Self {
        Trajectory {
            direction,
            times: Vec::new(),
            fields: Vec::new(),
            extrema: Vec::new(),
            windows: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, field: Field) {
        self.extrema.push(extrema(&field, t));
        self.times.push(t);
        self.fields.push(field);
    }

    pub fn initial(&self) -> &Field {
        &self.fields[0]
    }

    pub fn last(&self) -> &Field {
        self.fields.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `2 ||u(0)||`, the scale used by the verification tolerances.
    pub fn epsilon(&self) -> f64 {
        2.0 * self.extrema[0].u_inf
    }
}

/// Fixed-point iteration of the integral operator over one window of length
/// `length` starting from `start`. The time integral is the composite
/// trapezoid rule on `opts.substeps` equal sub-intervals.
pub fn picard_window(
    op: &NonlocalOperator,
    start: &Field,
    length: f64,
    opts: &PicardOptions,
) -> Result<SolveWindow, SolverError> {
    run_window(op, start, 0, 0.0, length, opts)
}

pub(super) fn run_window(
    op: &NonlocalOperator,
    start: &Field,
    index: usize,
    t_start: f64,
    length: f64,
    opts: &PicardOptions,
) -> Result<SolveWindow, SolverError> {
    opts.validate()?;
    if !(length.is_finite() && length > 0.0) {
        return Err(SolverError::InvalidArgument(format!("window length {length}")));
    }
    start.check_finite()?;
    let n = op.n_interior();
    let steps = opts.substeps;
    let dt = length / steps as f64;
    let half = 0.5 * dt;
    let epsilon = 2.0 * start.sup_norm();
    let tol = opts.tol_for(epsilon);
    let limit = 0.5 + opts.ratio_tolerance;
    // ratios between updates at rounding level carry no information
    let noise = 64.0 * f64::EPSILON * epsilon.max(1.0);

    let base = start.values();
    let mut current: Vec<Vec<f64>> = vec![base.to_vec(); steps + 1];
    let mut next = current.clone();
    let mut rates = vec![vec![0.0; n]; steps + 1];
    let mut integral = vec![0.0; n];

    let mut ratios = Vec::new();
    let mut norms = vec![start.sup_norm()];
    let mut prev_delta: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut delta = f64::INFINITY;

    while iterations < opts.max_iter {
        iterations += 1;
        for (state, rate) in current.iter().zip(rates.iter_mut()) {
            op.rhs_into(state, rate);
        }
        integral.iter_mut().for_each(|v| *v = 0.0);
        delta = 0.0;
        let mut norm = sup(&next[0]);
        for j in 1..=steps {
            let (fa, fb) = (&rates[j - 1], &rates[j]);
            let out = &mut next[j];
            for i in 0..n {
                integral[i] += half * (fa[i] + fb[i]);
                out[i] = base[i] + integral[i];
            }
            delta = delta.max(max_diff(&out[..n], &current[j][..n]));
            norm = norm.max(sup(out));
        }
        if !(delta.is_finite() && norm.is_finite()) {
            return Err(SolverError::NonFiniteState { t: t_start });
        }
        norms.push(norm);
        if let Some(prev) = prev_delta {
            if prev > noise {
                let ratio = delta / prev;
                ratios.push(ratio);
                if ratio > limit {
                    return Err(SolverError::RatioViolation {
                        window: index,
                        t_start,
                        iteration: iterations,
                        ratio,
                        limit,
                    });
                }
            }
        }
        prev_delta = Some(delta);
        std::mem::swap(&mut current, &mut next);
        if delta <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SolverError::NoConvergence {
            window: index,
            t_start,
            iterations,
            delta,
            tol,
        });
    }

    Ok(SolveWindow {
        index,
        t_start,
        t_end: t_start + length,
        substeps: steps,
        epsilon,
        tol,
        iterations,
        contraction_ratios: ratios,
        iterate_norms: norms,
        converged,
        states: current,
        rates,
        n_interior: n,
    })
}

fn sup(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Output grid: `0`, the requested times inside `(0, t_final)`, and `t_final`.
fn output_grid(t_final: f64, requested: &[f64]) -> Vec<f64> {
    let mut ts: Vec<f64> = requested
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_final)
        .collect();
    ts.push(0.0);
    ts.push(t_final);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Global solve by chaining contraction windows. Each window recomputes
/// `(T, eps)` from the current sup norm. Fields are reported at
/// `output_times` (plus `0` and `t_final`).
pub fn solve(
    op: &NonlocalOperator,
    initial: &Field,
    t_final: f64,
    output_times: &[f64],
    opts: &PicardOptions,
) -> Result<Trajectory, SolverError> {
    op.conductivity().check_evolution()?;
    opts.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(SolverError::InvalidArgument(format!("t_final = {t_final}")));
    }
    if initial.values().len() != op.n_nodes() || initial.n_interior() != op.n_interior() {
        return Err(SolverError::InvalidArgument("initial field does not match the grid".into()));
    }
    initial.check_finite()?;

    let outputs = output_grid(t_final, output_times);
    let mut traj = Trajectory::new(op.direction());
    traj.push(0.0, initial.clone());
    let mut pending = outputs[1..].iter().copied().peekable();

    let mut current = initial.clone();
    let mut t = 0.0;
    let mut index = 0;
    while t < t_final {
        let (window, _) = window_length(&op.conductivity(), op.window_l1(), current.sup_norm(), opts.window_cap);
        if !(window > 0.0) {
            return Err(SolverError::InvalidArgument(format!(
                "degenerate window length at t = {t}"
            )));
        }
        let remaining = t_final - t;
        let last = window >= remaining * (1.0 - 1e-12);
        let length = if last { remaining } else { window };
        let w = run_window(op, &current, index, t, length, opts)?;
        let t_end = if last { t_final } else { t + length };
        while let Some(&tau) = pending.peek() {
            if tau > t_end {
                break;
            }
            let field = if tau == t_end { w.end_state() } else { w.state_at(tau - t) };
            traj.push(tau, field);
            pending.next();
        }
        let summary = w.summary();
        log::info!(
            "window {} [{:.6e}, {:.6e}]: {} iterations, max ratio {:.3e}",
            summary.index,
            summary.t_start,
            summary.t_end,
            summary.iterations,
            summary.max_ratio
        );
        traj.windows.push(summary);
        current = w.end_state();
        t = t_end;
        index += 1;
    }
    Ok(traj)
}

/// Solve with `k -> -k`, i.e. evolve the data backwards by `t_back`. The
/// window length uses the unsigned modulus and is therefore unchanged.
/// Reported times are elapsed backward time.
pub fn solve_backward(
    op: &NonlocalOperator,
    initial: &Field,
    t_back: f64,
    output_times: &[f64],
    opts: &PicardOptions,
) -> Result<Trajectory, SolverError> {
    solve(&op.reversed(), initial, t_back, output_times, opts)
}
