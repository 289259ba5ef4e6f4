//! Run configuration, read from a JSON document and validated before any
//! computation starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::TrivialSpec;
use crate::conductivity::Conductivity;
use crate::error::Error;
use crate::grid::Field;
use crate::kernel::{Kernel, KernelShape};
use crate::problem::Problem;
use crate::profile::{build_field, Profile};
use crate::solver::PicardOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Side lengths of the box `Omega`.
    pub extent: Vec<f64>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub shape: KernelShape,
    /// Must equal the grid dimension when given.
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default = "one")]
    pub l1_norm: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Stationarity,
    LinfDecay,
    Positivity,
    Smp,
    TraceContinuity,
    DirichletInvariance,
    Contraction,
    BallConfinement,
}

impl CheckName {
    pub const ALL: [CheckName; 8] = [
        CheckName::Stationarity,
        CheckName::LinfDecay,
        CheckName::Positivity,
        CheckName::Smp,
        CheckName::TraceContinuity,
        CheckName::DirichletInvariance,
        CheckName::Contraction,
        CheckName::BallConfinement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Stationarity => "stationarity",
            CheckName::LinfDecay => "linf_decay",
            CheckName::Positivity => "positivity",
            CheckName::Smp => "smp",
            CheckName::TraceContinuity => "trace_continuity",
            CheckName::DirichletInvariance => "dirichlet_invariance",
            CheckName::Contraction => "contraction",
            CheckName::BallConfinement => "ball_confinement",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Checks to run. Empty means every check whose preconditions hold;
    /// listed checks with unmet preconditions count as failures.
    pub checks: Vec<CheckName>,
    pub decay_tol: Option<f64>,
    pub pos_tol: Option<f64>,
    pub smp_tol: Option<f64>,
    pub trace_slack: f64,
    /// Whether an SMP scan without any hit counts as a pass.
    pub allow_vacuous: bool,
    /// Fault injection: flip one collar value of the final state before
    /// the checks run.
    pub mutate_collar: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            checks: Vec::new(),
            decay_tol: None,
            pos_tol: None,
            smp_tol: None,
            trace_slack: 0.1,
            allow_vacuous: true,
            mutate_collar: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    pub conductivity: Conductivity,
    /// Required unless `trivial` is given.
    #[serde(default)]
    pub initial: Option<Profile>,
    /// Defaults to `initial`, so the collar continues the initial profile.
    #[serde(default)]
    pub psi: Option<Profile>,
    /// When present the run starts from this trivial field instead.
    #[serde(default)]
    pub trivial: Option<TrivialSpec>,
    pub t_final: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
    /// Output times at which a snapshot CSV is written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub solver: PicardOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn dim(&self) -> usize {
        self.grid.extent.len()
    }

    /// Output grid handed to the solver: requested outputs plus snapshots.
    pub fn all_output_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.output_times.iter().chain(&self.snapshots).copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Every check that does not need a solve. `evolve` additionally
    /// requires the conductivity to be usable for time stepping.
    pub fn validate(&self, evolve: bool) -> Result<(), Error> {
        let dim = self.dim();
        if dim != 1 && dim != 2 {
            return Err(config_err(format!("grid.extent must have 1 or 2 entries, got {dim}")));
        }
        if let Some(d) = self.kernel.dimension {
            if d != dim {
                return Err(config_err(format!("kernel.dimension {d} does not match the grid dimension {dim}")));
            }
        }
        if !(self.kernel.l1_norm.is_finite() && self.kernel.l1_norm > 0.0) {
            return Err(config_err(format!("kernel.l1_norm = {} must be positive", self.kernel.l1_norm)));
        }
        self.conductivity.validate()?;
        if evolve {
            self.conductivity.check_evolution()?;
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(config_err(format!("t_final = {} must be positive", self.t_final)));
        }
        for &t in self.output_times.iter().chain(&self.snapshots) {
            if !(t.is_finite() && t >= 0.0 && t <= self.t_final) {
                return Err(config_err(format!("output time {t} outside [0, {}]", self.t_final)));
            }
        }
        self.solver.validate().map_err(|e| config_err(e.to_string()))?;
        let v = &self.verify;
        for (name, tol) in [("decay_tol", v.decay_tol), ("pos_tol", v.pos_tol), ("smp_tol", v.smp_tol)] {
            if let Some(tol) = tol {
                if !(tol.is_finite() && tol >= 0.0) {
                    return Err(config_err(format!("verify.{name} = {tol}")));
                }
            }
        }
        if !(v.trace_slack.is_finite() && v.trace_slack >= 0.0) {
            return Err(config_err(format!("verify.trace_slack = {}", v.trace_slack)));
        }
        match (&self.trivial, &self.initial) {
            (Some(spec), _) => spec.validate()?,
            (None, None) => return Err(config_err("either `initial` or `trivial` is required")),
            (None, Some(_)) => {}
        }
        for p in self.initial.iter().chain(&self.psi) {
            p.validate(dim).map_err(config_err)?;
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel, Error> {
        Ok(Kernel::normalized(self.kernel.shape, self.dim(), self.kernel.l1_norm)?)
    }

    pub fn problem(&self) -> Result<Problem, Error> {
        Problem::new(&self.grid.extent, self.grid.h, self.kernel()?, self.conductivity)
    }

    /// Initial field (with the collar holding `psi`) for non-trivial runs.
    pub fn initial_field(&self, problem: &Problem) -> Result<Field, Error> {
        let initial = self
            .initial
            .as_ref()
            .ok_or_else(|| config_err("`initial` is required"))?;
        let psi = self.psi.as_ref().unwrap_or(initial);
        Ok(build_field(&problem.grid, initial, psi, self.seed)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"{
        "grid": {"extent": [1.0], "h": 0.0625},
        "kernel": {"shape": "const_ball"},
        "conductivity": {"family": "porous_medium", "m": 2},
        "initial": {"profile": "bump"},
        "psi": {"profile": "constant", "value": 0},
        "t_final": 0.1,
        "output_times": [0.05]
    }"#;

    #[test]
    fn parses_and_validates() {
        let cfg = RunConfig::from_json(BASIC).unwrap();
        cfg.validate(true).unwrap();
        assert_eq!(cfg.solver, PicardOptions::default());
        assert!(cfg.verify.allow_vacuous);
        let p = cfg.problem().unwrap();
        let f = cfg.initial_field(&p).unwrap();
        assert_eq!(f.values().len(), p.grid.n_nodes());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASIC.replace("\"t_final\"", "\"t_fnial\": 1, \"t_final\"");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn rejects_bad_spacing() {
        let cfg = RunConfig::from_json(&BASIC.replace("0.0625", "0.3")).unwrap();
        let err = cfg.problem().unwrap_err().to_string();
        assert!(err.contains("BadSpacing"), "{err}");
    }

    #[test]
    fn p_laplacian_below_three_is_rejected_for_evolution() {
        let text = BASIC.replace(r#""family": "porous_medium", "m": 2"#, r#""family": "p_laplacian", "p": 2.5"#);
        let cfg = RunConfig::from_json(&text).unwrap();
        let err = cfg.validate(true).unwrap_err().to_string();
        assert!(err.contains("NotLipschitzForEvolution"), "{err}");
        cfg.validate(false).unwrap();
    }

    #[test]
    fn output_times_must_lie_in_the_run() {
        let cfg = RunConfig::from_json(&BASIC.replace("[0.05]", "[0.5]")).unwrap();
        assert!(cfg.validate(true).is_err());
    }

    #[test]
    fn trivial_spec_replaces_initial() {
        let text = BASIC.replace(
            r#""initial": {"profile": "bump"},"#,
            r#""trivial": {"kind": "involution", "u": 0.0, "a": 1.0, "pattern": {"kind": "sgn_x"}},"#,
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        let err = cfg.validate(false).unwrap_err().to_string();
        assert!(err.contains("InvalidSpec"), "{err}");
        let typo = text.replace(r#""a": 1.0"#, r#""a": 1.0, "b": 2.0"#);
        assert!(RunConfig::from_json(&typo).is_err());
    }
}
