//! Command-line front end. Exit codes: 0 success, 1 output failure,
//! 2 invalid config or spec, 3 solver failure, 4 failed verification,
//! 5 under-resolved quadrature.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{make_trivial, trivial_residual, weak_pme_residual, AnalysisError, Phi0, WeakPmeTestFn};
use crate::config::RunConfig;
use crate::error::Error;
use crate::io::{write_snapshot, write_trace};
use crate::kernel::kernel_l1_norm;
use crate::solver::{solve, SolverError, WindowSummary};
use crate::suite::{contraction_matrix, default_matrix, run_verify, trivial_matrix, RunReport, Timing};

pub const OUT_ENV: &str = "NONLOC_OUT";

#[derive(Debug, Parser)]
#[command(name = "nonloc", version, about = "Nonlocal nonlinear diffusion solver and checks")]
pub struct Cli {
    /// Output directory. Falls back to the config's `output_dir`, then
    /// $NONLOC_OUT, then `nonloc_out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the RHS sweep (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Matrix {
    /// Every builtin conductivity against smooth, discontinuous and random data.
    Default,
    /// The Picard contraction matrix.
    Contraction,
    /// Trivial fields under their matching conductivities.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Phi0Arg {
    Odd,
    Even,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and write the extrema trace, snapshots and metadata.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve and run the verification checks.
    Verify {
        #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
        config: Option<PathBuf>,
        /// Run a builtin matrix instead of a config.
        #[arg(long, value_enum)]
        matrix: Option<Matrix>,
        /// Final time for the builtin matrices.
        #[arg(long, default_value_t = 0.1)]
        t_final: f64,
    },
    /// Build the configured trivial field and report its residual.
    Trivial {
        #[arg(long)]
        config: PathBuf,
    },
    /// Weak-form porous medium integral of `U sgn(x)`.
    WeakResidual {
        #[arg(long = "U", visible_alias = "u", allow_hyphen_values = true, default_value_t = 1.0)]
        u: f64,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 1024)]
        quad_n: usize,
        #[arg(long, value_enum, default_value_t = Phi0Arg::Odd)]
        phi0: Phi0Arg,
    },
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Kernel(_) | Error::Conductivity(_) | Error::Grid(_) | Error::Json(_) => 2,
        Error::Solver(e) | Error::Analysis(AnalysisError::Solver(e)) => solver_exit_code(e),
        Error::Analysis(AnalysisError::QuadratureUnderResolved { .. }) => 5,
        Error::Analysis(_) => 2,
        Error::Io(_) | Error::Csv(_) => 1,
    }
}

fn solver_exit_code(err: &SolverError) -> i32 {
    match err {
        SolverError::Conductivity(_) | SolverError::Grid(_) | SolverError::InvalidArgument(_) => 2,
        _ => 3,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, Error> {
    match &cli.command {
        Command::Solve { config } => cmd_solve(cli, &load(cli, config)?),
        Command::Verify {
            config: Some(config), ..
        } => cmd_verify(cli, vec![load(cli, config)?]),
        Command::Verify {
            matrix: Some(matrix),
            t_final,
            ..
        } => {
            let configs = match matrix {
                Matrix::Default => default_matrix(*t_final),
                Matrix::Contraction => contraction_matrix(*t_final),
                Matrix::Trivial => trivial_matrix(*t_final),
            };
            cmd_verify(cli, configs)
        }
        Command::Verify { .. } => Err(Error::Config("verify needs --config or --matrix".into())),
        Command::Trivial { config } => cmd_trivial(cli, &load(cli, config)?),
        Command::WeakResidual { u, m, quad_n, phi0 } => cmd_weak_residual(*u, *m, *quad_n, *phi0),
    }
}

fn load(cli: &Cli, path: &Path) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: Option<&RunConfig>) -> Result<PathBuf, Error> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("nonloc_out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct SnapshotEntry {
    t: f64,
    file: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    run: String,
    config: &'a RunConfig,
    n_interior: usize,
    n_collar: usize,
    stencil_size: usize,
    kernel_l1_closed_form: f64,
    kernel_l1_quadrature: f64,
    epsilon: f64,
    output_times: &'a [f64],
    snapshots: Vec<SnapshotEntry>,
    windows: &'a [WindowSummary],
}

fn cmd_solve(cli: &Cli, cfg: &RunConfig) -> Result<i32, Error> {
    cfg.validate(true)?;
    let problem = cfg.problem()?;
    let initial = match &cfg.trivial {
        Some(spec) => make_trivial(spec, &problem.grid)?,
        None => cfg.initial_field(&problem)?,
    };
    let dir = output_dir(cli, Some(cfg))?;
    let clock = Instant::now();
    let traj = solve(&problem.operator()?, &initial, cfg.t_final, &cfg.all_output_times(), &cfg.solver)?;
    let seconds = clock.elapsed().as_secs_f64();

    write_trace(BufWriter::new(File::create(dir.join("trace.csv"))?), &traj.extrema)?;
    let mut snapshots = Vec::new();
    for (i, (&t, field)) in traj.times.iter().zip(&traj.fields).enumerate() {
        if cfg.snapshots.contains(&t) || (t == cfg.t_final && cfg.snapshots.is_empty()) {
            let file = format!("snapshot_{i:04}.csv");
            write_snapshot(BufWriter::new(File::create(dir.join(&file))?), &problem.grid, field)?;
            snapshots.push(SnapshotEntry { t, file });
        }
    }
    let norms = kernel_l1_norm(&problem.kernel, &problem.stencil);
    let meta = Metadata {
        run: cfg.name.clone().unwrap_or_else(|| "run".into()),
        config: cfg,
        n_interior: problem.grid.n_interior(),
        n_collar: problem.grid.n_collar(),
        stencil_size: problem.stencil.len(),
        kernel_l1_closed_form: norms.closed_form,
        kernel_l1_quadrature: norms.quadrature,
        epsilon: traj.epsilon(),
        output_times: &traj.times,
        snapshots,
        windows: &traj.windows,
    };
    write_json(&dir.join("metadata.json"), &meta)?;
    write_json(
        &dir.join("timings.json"),
        &[Timing {
            name: "solve".into(),
            seconds,
        }],
    )?;
    let first = traj.extrema[0].u_inf;
    let last = traj.extrema.last().map_or(first, |r| r.u_inf);
    println!(
        "solved to t = {} in {} windows; u_inf {first:.6e} -> {last:.6e}; output in {}",
        cfg.t_final,
        traj.windows.len(),
        dir.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    passed: bool,
    runs: &'a [RunReport],
}

#[derive(Serialize)]
struct RunTimings {
    run: String,
    timings: Vec<Timing>,
}

fn cmd_verify(cli: &Cli, configs: Vec<RunConfig>) -> Result<i32, Error> {
    for cfg in &configs {
        cfg.validate(true)?;
    }
    let dir = output_dir(cli, configs.first().filter(|_| configs.len() == 1))?;
    let mut runs = Vec::new();
    let mut timings = Vec::new();
    for cfg in &configs {
        let outcome = run_verify(cfg)?;
        if configs.len() == 1 {
            write_trace(BufWriter::new(File::create(dir.join("trace.csv"))?), &outcome.trajectory.extrema)?;
            write_json(&dir.join("checks.json"), &outcome.reports)?;
        }
        for c in &outcome.report.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let note = if c.vacuous { " (vacuous)" } else { "" };
            println!(
                "{status} {} {}: max_violation {:.3e} (tolerance {:.3e}){note}",
                outcome.report.run, c.name, c.max_violation, c.tolerance
            );
        }
        for s in &outcome.report.skipped {
            let status = if s.required { "FAIL" } else { "SKIP" };
            println!("{status} {} {}: {}", outcome.report.run, s.name, s.reason);
        }
        timings.push(RunTimings {
            run: outcome.report.run.clone(),
            timings: outcome.timings,
        });
        runs.push(outcome.report);
    }
    let passed = runs.iter().all(|r| r.passed);
    write_json(&dir.join("report.json"), &VerifyDocument { passed, runs: &runs })?;
    write_json(&dir.join("timings.json"), &timings)?;
    if passed {
        Ok(0)
    } else {
        for run in runs.iter().filter(|r| !r.passed) {
            for c in run.failures() {
                eprintln!("verification failed: {} {} max_violation {:e}", run.run, c.name, c.max_violation);
            }
            for s in run.skipped.iter().filter(|s| s.required) {
                eprintln!("verification failed: {} {} could not run: {}", run.run, s.name, s.reason);
            }
        }
        Ok(4)
    }
}

#[derive(Serialize)]
struct TrivialOutput {
    run: String,
    conductivity: String,
    residual: f64,
    snapshot: String,
}

fn cmd_trivial(cli: &Cli, cfg: &RunConfig) -> Result<i32, Error> {
    cfg.validate(false)?;
    let spec = cfg
        .trivial
        .as_ref()
        .ok_or_else(|| Error::Config("`trivial` is required".into()))?;
    let problem = cfg.problem()?;
    let field = make_trivial(spec, &problem.grid)?;
    let residual = trivial_residual(&problem.grid, &problem.stencil, &problem.conductivity, &field);
    let dir = output_dir(cli, Some(cfg))?;
    let snapshot = "trivial.csv".to_string();
    write_snapshot(BufWriter::new(File::create(dir.join(&snapshot))?), &problem.grid, &field)?;
    write_json(
        &dir.join("residual.json"),
        &TrivialOutput {
            run: cfg.name.clone().unwrap_or_else(|| "run".into()),
            conductivity: problem.conductivity.to_string(),
            residual,
            snapshot,
        },
    )?;
    println!("residual {residual:e}");
    Ok(0)
}

fn cmd_weak_residual(u: f64, m: f64, quad_n: usize, phi0: Phi0Arg) -> Result<i32, Error> {
    let testfn = WeakPmeTestFn {
        phi0: match phi0 {
            Phi0Arg::Odd => Phi0::Odd,
            Phi0Arg::Even => Phi0::Even,
        },
        theta_mass: 1.0,
    };
    let r = weak_pme_residual(u, m, &testfn, quad_n)?;
    println!("residual {:.16e}  target {:.16e}  quad_n {}  refined {:.16e}", r.value, r.target, r.quad_n, r.refined);
    Ok(0)
}
