//! Executable versions of the qualitative results: stationarity of trivial
//! data, L-infinity decay, positivity, the strong maximum principle scan,
//! continuity of extrema traces, and solver bookkeeping invariants.

use super::trivial::{make_trivial, trivial_residual, TrivialSpec};
use super::{AnalysisError, Detail, VerificationReport};
use crate::conductivity::Conductivity;
use crate::grid::Field;
use crate::problem::Problem;
use crate::solver::{solve, PicardOptions, Trajectory};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Solves from the trivial field of `spec` and measures the drift
/// `max_t ||u(t) - u(0)||`. Returns the trajectory for further checks.
pub fn check_stationarity(
    spec: &TrivialSpec,
    problem: &Problem,
    opts: &PicardOptions,
    t_final: f64,
    output_times: &[f64],
) -> Result<(VerificationReport, Trajectory), AnalysisError> {
    let field = make_trivial(spec, &problem.grid)?;
    let residual = trivial_residual(&problem.grid, &problem.stencil, &problem.conductivity, &field);
    if residual > 0.0 {
        return Err(AnalysisError::PreconditionFailed(format!(
            "field is not trivial for {}: residual {residual:e}",
            problem.conductivity
        )));
    }
    let op = problem.operator()?;
    let traj = solve(&op, &field, t_final, output_times, opts)?;
    let details: Vec<Detail> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| Detail {
            t,
            value: max_abs_diff(f.values(), field.values()),
        })
        .collect();
    let drift = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    let tolerance = 1e-13 * (1.0 + spec.scale());
    Ok((VerificationReport::new("stationarity", drift, tolerance, details), traj))
}

/// Largest increase of `||u(t)||_inf` between consecutive outputs.
/// Default tolerance `1e-9 eps`.
pub fn check_linf_decay(traj: &Trajectory, decay_tol: Option<f64>) -> VerificationReport {
    let tolerance = decay_tol.unwrap_or(1e-9 * traj.epsilon());
    let details: Vec<Detail> = traj
        .extrema
        .windows(2)
        .map(|w| Detail {
            t: w[1].t,
            value: (w[1].u_inf - w[0].u_inf).max(0.0),
        })
        .collect();
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    VerificationReport::new("linf_decay", worst, tolerance, details)
}

/// Most negative value over all outputs, for nonnegative data under a
/// conductivity with the `k = 0 => u = +-v` property. Default tolerance
/// `1e-10 eps`.
pub fn check_positivity(
    traj: &Trajectory,
    c: &Conductivity,
    pos_tol: Option<f64>,
) -> Result<VerificationReport, AnalysisError> {
    if !c.satisfies_k3() {
        return Err(AnalysisError::PreconditionFailed(format!(
            "{c} does not satisfy k(u,v) = 0 => u = +-v"
        )));
    }
    if let Some(v) = traj.initial().values().iter().find(|&&v| v < 0.0) {
        return Err(AnalysisError::PreconditionFailed(format!(
            "initial data has a negative value {v}"
        )));
    }
    let tolerance = pos_tol.unwrap_or(1e-10 * traj.epsilon());
    let details: Vec<Detail> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| Detail {
            t,
            value: f.values().iter().fold(0.0f64, |m, &v| m.max(-v)) + 0.0,
        })
        .collect();
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    Ok(VerificationReport::new("positivity", worst, tolerance, details))
}

/// Scans for output times `t0 > 0` where the interior supremum (infimum)
/// reaches the running supremum (infimum) over `[0, t0]`, up to `smp_tol`.
/// Every such hit must be a trivial field. No hits gives a vacuous pass.
/// Default tolerance `1e-8 eps`.
pub fn check_smp(
    traj: &Trajectory,
    problem: &Problem,
    smp_tol: Option<f64>,
) -> Result<VerificationReport, AnalysisError> {
    let c = &problem.conductivity;
    if !c.satisfies_k3() {
        return Err(AnalysisError::PreconditionFailed(format!(
            "{c} does not satisfy k(u,v) = 0 => u = +-v"
        )));
    }
    let tolerance = smp_tol.unwrap_or(1e-8 * traj.epsilon());
    let mut running_sup = f64::NEG_INFINITY;
    let mut running_inf = f64::INFINITY;
    let mut details = Vec::new();
    for (i, rec) in traj.extrema.iter().enumerate() {
        running_sup = running_sup.max(rec.u_plus);
        running_inf = running_inf.min(rec.u_minus);
        if i == 0 {
            continue;
        }
        let hit = rec.big_u_plus >= running_sup - tolerance || rec.big_u_minus <= running_inf + tolerance;
        if hit {
            let residual = trivial_residual(&problem.grid, &problem.stencil, c, &traj.fields[i]);
            details.push(Detail { t: rec.t, value: residual });
        }
    }
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    let mut report = VerificationReport::new("smp", worst, tolerance, details);
    report.vacuous = report.details.is_empty();
    Ok(report)
}

/// `sup |k(u(x), u(y)) (u(y) - u(x))|` over output fields and stencil pairs.
fn flux_sup(traj: &Trajectory, problem: &Problem) -> f64 {
    let c = &problem.conductivity;
    let grid = &problem.grid;
    let mut worst = 0.0f64;
    for f in &traj.fields {
        let v = f.values();
        for node in 0..grid.n_interior() {
            for &d in &problem.stencil.offsets {
                if let Some(nb) = grid.neighbor(node, d) {
                    worst = worst.max((c.eval(v[node], v[nb]) * (v[nb] - v[node])).abs());
                }
            }
        }
    }
    worst
}

/// Jumps of `U_+` and `U_-` between outputs against the rate bound
/// `C = |J|_1 sup |k (u(y) - u(x))|`. Violation is the largest excess over
/// `C dt (1 + slack)`; the details hold the observed jump rates.
pub fn check_trace_continuity(traj: &Trajectory, problem: &Problem, slack: f64) -> VerificationReport {
    let l1 = problem.kernel.l1_norm().max(problem.stencil.weight_sum());
    let rate_bound = l1 * flux_sup(traj, problem);
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    for w in traj.extrema.windows(2) {
        let dt = w[1].t - w[0].t;
        let jump = (w[1].big_u_plus - w[0].big_u_plus)
            .abs()
            .max((w[1].big_u_minus - w[0].big_u_minus).abs());
        worst = worst.max(jump - rate_bound * dt * (1.0 + slack));
        details.push(Detail { t: w[1].t, value: jump / dt });
    }
    let mut report = VerificationReport::new("trace_continuity", worst.max(0.0), 0.0, details);
    report.bound = Some(rate_bound);
    report
}

/// Number of collar entries, over all outputs, whose bits differ from `psi`.
pub fn check_dirichlet_invariance(traj: &Trajectory, psi: &Field) -> VerificationReport {
    let reference = psi.collar();
    let details: Vec<Detail> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| Detail {
            t,
            value: f
                .collar()
                .iter()
                .zip(reference)
                .filter(|(a, b)| a.to_bits() != b.to_bits())
                .count() as f64,
        })
        .collect();
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    VerificationReport::new("dirichlet_invariance", worst, 0.0, details)
}

/// Largest recorded Picard ratio over all windows against `0.5 + ratio_tolerance`.
pub fn check_contraction(traj: &Trajectory, ratio_tolerance: f64) -> VerificationReport {
    let details: Vec<Detail> = traj
        .windows
        .iter()
        .map(|w| Detail {
            t: w.t_start,
            value: w.max_ratio,
        })
        .collect();
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    VerificationReport::new("contraction", worst, 0.5 + ratio_tolerance, details)
}

/// Every Picard iterate stays in the ball `|||u||| <= eps` of its window.
pub fn check_ball_confinement(traj: &Trajectory) -> VerificationReport {
    let details: Vec<Detail> = traj
        .windows
        .iter()
        .map(|w| Detail {
            t: w.t_start,
            value: (w.max_iterate_norm - w.epsilon).max(0.0),
        })
        .collect();
    let worst = details.iter().fold(0.0f64, |m, d| m.max(d.value));
    VerificationReport::new("ball_confinement", worst, 1e-12 * traj.epsilon().max(1.0), details)
}
