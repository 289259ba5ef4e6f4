//! Verification runs: one config in, a deterministic report out. Also holds
//! the default run matrices.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_ball_confinement, check_contraction, check_dirichlet_invariance, check_linf_decay, check_positivity,
    check_smp, check_stationarity, check_trace_continuity, make_trivial, AlphaPattern, AnalysisError, TrivialKind,
    TrivialSpec, VerificationReport,
};
use crate::conductivity::Conductivity;
use crate::config::{CheckName, GridConfig, KernelConfig, RunConfig, VerifyOptions};
use crate::error::Error;
use crate::kernel::KernelShape;
use crate::profile::Profile;
use crate::solver::{solve, PicardOptions, Trajectory};

/// One line of the report document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCheck {
    pub name: String,
    pub reason: String,
    /// Explicitly requested checks that could not run fail the report.
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    pub skipped: Vec<SkippedCheck>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: RunReport,
    /// Wall-clock seconds per stage; kept out of the report so that stays
    /// reproducible.
    pub timings: Vec<Timing>,
    pub trajectory: Trajectory,
    /// Full check reports, including per-time details.
    pub reports: Vec<VerificationReport>,
}

fn record(r: &VerificationReport, allow_vacuous: bool) -> CheckRecord {
    CheckRecord {
        name: r.check_name.clone(),
        passed: r.passed && (allow_vacuous || !r.vacuous),
        max_violation: r.max_violation,
        tolerance: r.tolerance,
        vacuous: r.vacuous,
    }
}

fn skipped_check(name: CheckName, reason: String, required: bool) -> SkippedCheck {
    SkippedCheck {
        name: name.as_str().to_string(),
        reason,
        required,
    }
}

/// Runs the solve (or the stationarity solve for trivial data) and every
/// configured check.
pub fn run_verify(cfg: &RunConfig) -> Result<VerifyOutcome, Error> {
    cfg.validate(true)?;
    let problem = cfg.problem()?;
    let opts = &cfg.verify;
    let explicit = !opts.checks.is_empty();
    let wanted: Vec<CheckName> = if explicit { opts.checks.clone() } else { CheckName::ALL.to_vec() };
    let outputs = cfg.all_output_times();

    let mut timings = Vec::new();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();

    let clock = Instant::now();
    let (initial, mut traj) = match &cfg.trivial {
        Some(spec) => {
            let field = make_trivial(spec, &problem.grid)?;
            match check_stationarity(spec, &problem, &cfg.solver, cfg.t_final, &outputs) {
                Ok((report, traj)) => {
                    if wanted.contains(&CheckName::Stationarity) {
                        reports.push(report);
                    }
                    (field, traj)
                }
                Err(AnalysisError::PreconditionFailed(reason)) => {
                    if wanted.contains(&CheckName::Stationarity) {
                        skipped.push(skipped_check(CheckName::Stationarity, reason, true));
                    }
                    let traj = solve(&problem.operator()?, &field, cfg.t_final, &outputs, &cfg.solver)?;
                    (field, traj)
                }
                Err(e) => return Err(e.into()),
            }
        }
        None => {
            let field = cfg.initial_field(&problem)?;
            let traj = solve(&problem.operator()?, &field, cfg.t_final, &outputs, &cfg.solver)?;
            if wanted.contains(&CheckName::Stationarity) {
                skipped.push(skipped_check(CheckName::Stationarity, "no trivial spec in the config".into(), explicit));
            }
            (field, traj)
        }
    };
    timings.push(Timing {
        name: "solve".into(),
        seconds: clock.elapsed().as_secs_f64(),
    });

    if opts.mutate_collar {
        let last = traj.fields.last_mut().expect("trajectory is never empty");
        if let Some(v) = last.collar_mut().first_mut() {
            *v += 1.0;
        }
    }

    for &check in &wanted {
        let clock = Instant::now();
        let result: Result<VerificationReport, String> = match check {
            CheckName::Stationarity => continue,
            CheckName::LinfDecay => Ok(check_linf_decay(&traj, opts.decay_tol)),
            CheckName::Positivity => {
                check_positivity(&traj, &problem.conductivity, opts.pos_tol).map_err(|e| e.to_string())
            }
            CheckName::Smp => check_smp(&traj, &problem, opts.smp_tol).map_err(|e| e.to_string()),
            CheckName::TraceContinuity if traj.len() < 3 => Err("fewer than 3 output times".to_string()),
            CheckName::TraceContinuity => Ok(check_trace_continuity(&traj, &problem, opts.trace_slack)),
            CheckName::DirichletInvariance => Ok(check_dirichlet_invariance(&traj, &initial)),
            CheckName::Contraction => Ok(check_contraction(&traj, cfg.solver.ratio_tolerance)),
            CheckName::BallConfinement => Ok(check_ball_confinement(&traj)),
        };
        match result {
            Ok(r) => reports.push(r),
            Err(reason) => skipped.push(skipped_check(check, reason, explicit)),
        }
        timings.push(Timing {
            name: check.as_str().into(),
            seconds: clock.elapsed().as_secs_f64(),
        });
    }

    let checks: Vec<CheckRecord> = reports.iter().map(|r| record(r, opts.allow_vacuous)).collect();
    let passed = checks.iter().all(|c| c.passed) && skipped.iter().all(|s| !s.required);
    Ok(VerifyOutcome {
        report: RunReport {
            run: cfg.name.clone().unwrap_or_else(|| "run".into()),
            passed,
            checks,
            skipped,
        },
        timings,
        trajectory: traj,
        reports,
    })
}

/// `Omega = (0, 1)`, `h = 1/64`, constant kernel with unit mass, zero `psi`.
pub fn reference_config(name: &str, conductivity: Conductivity, initial: Profile, t_final: f64) -> RunConfig {
    let steps = 10;
    RunConfig {
        name: Some(name.to_string()),
        grid: GridConfig {
            extent: vec![1.0],
            h: 1.0 / 64.0,
        },
        kernel: KernelConfig {
            shape: KernelShape::ConstBall,
            dimension: Some(1),
            l1_norm: 1.0,
        },
        conductivity,
        initial: Some(initial),
        psi: Some(Profile::Constant { value: 0.0 }),
        trivial: None,
        t_final,
        output_times: (1..steps).map(|i| t_final * i as f64 / steps as f64).collect(),
        snapshots: Vec::new(),
        solver: PicardOptions::default(),
        verify: VerifyOptions::default(),
        output_dir: None,
        seed: 0,
    }
}

pub fn builtin_conductivities() -> Vec<Conductivity> {
    vec![
        Conductivity::Linear,
        Conductivity::PorousMedium { m: 2.0 },
        Conductivity::PorousMedium { m: 3.0 },
        Conductivity::PLaplacian { p: 3.0 },
        Conductivity::PorousMediumAlt { m: 2.0 },
        Conductivity::ProductShift { a: 1.0, m: 1.0 },
        Conductivity::SinSquared,
    ]
}

fn smooth() -> Profile {
    Profile::Bump {
        amplitude: 1.0,
        center: None,
        radius: None,
    }
}

fn random() -> Profile {
    Profile::Random {
        seed: Some(1),
        range: [-1.0, 1.0],
    }
}

fn short_name(c: &Conductivity) -> String {
    match *c {
        Conductivity::Linear => "linear".into(),
        Conductivity::PLaplacian { p } => format!("p_laplacian_{p}"),
        Conductivity::PorousMedium { m } => format!("porous_medium_{m}"),
        Conductivity::PorousMediumAlt { m } => format!("porous_medium_alt_{m}"),
        Conductivity::ProductShift { a, m } => format!("product_shift_{a}_{m}"),
        Conductivity::SinSquared => "sin_squared".into(),
    }
}

/// Every builtin conductivity against smooth, discontinuous and random data.
pub fn default_matrix(t_final: f64) -> Vec<RunConfig> {
    let mut out = Vec::new();
    for c in builtin_conductivities() {
        for initial in [smooth(), Profile::SgnSinInv { amplitude: 1.0 }, random()] {
            let name = format!("{}/{}", short_name(&c), initial.name());
            out.push(reference_config(&name, c, initial, t_final));
        }
    }
    out
}

/// Linear, porous medium `m = 2, 3` and p-Laplacian `p = 3` against
/// constant, smooth and random data.
pub fn contraction_matrix(t_final: f64) -> Vec<RunConfig> {
    let conductivities = [
        Conductivity::Linear,
        Conductivity::PorousMedium { m: 2.0 },
        Conductivity::PorousMedium { m: 3.0 },
        Conductivity::PLaplacian { p: 3.0 },
    ];
    let mut out = Vec::new();
    for c in conductivities {
        for initial in [Profile::Constant { value: 1.0 }, smooth(), random()] {
            let name = format!("{}/{}", short_name(&c), initial.name());
            out.push(reference_config(&name, c, initial, t_final));
        }
    }
    out
}

/// Trivial fields paired with the conductivity that makes them stationary.
pub fn trivial_matrix(t_final: f64) -> Vec<RunConfig> {
    let patterns = [
        AlphaPattern::SgnSin1OverX,
        AlphaPattern::SgnX,
        AlphaPattern::Checkerboard,
        AlphaPattern::SeededRandom { seed: 1 },
    ];
    let mut cases = Vec::new();
    for m in [2.0, 3.0] {
        for pattern in patterns {
            cases.push((
                Conductivity::PorousMedium { m },
                TrivialSpec::new(TrivialKind::PmeSign { u: 1.0 }, pattern),
            ));
        }
    }
    cases.push((
        Conductivity::ProductShift { a: 1.0, m: 1.0 },
        TrivialSpec::new(TrivialKind::Involution { u: 2.0, a: 1.0 }, AlphaPattern::SgnSin1OverX),
    ));
    cases.push((
        Conductivity::SinSquared,
        TrivialSpec::new(TrivialKind::IntegerField { levels: 2 }, AlphaPattern::SeededRandom { seed: 1 }),
    ));
    cases
        .into_iter()
        .map(|(c, spec)| {
            let name = format!("trivial/{}/{:?}/{:?}", short_name(&c), spec.kind, spec.pattern);
            let mut cfg = reference_config(&name, c, Profile::Constant { value: 0.0 }, t_final);
            cfg.initial = None;
            cfg.psi = None;
            cfg.trivial = Some(spec);
            cfg
        })
        .collect()
}
