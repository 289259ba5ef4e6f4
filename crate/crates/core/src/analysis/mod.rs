//! Trivial solutions, residuals, and the verification checks.

mod checks;
mod trivial;
mod weak_pme;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::SolverError;

pub use checks::{
    check_ball_confinement, check_contraction, check_dirichlet_invariance, check_linf_decay, check_positivity,
    check_smp, check_stationarity, check_trace_continuity,
};
pub(crate) use trivial::node_rng;
pub use trivial::{make_trivial, semitrivial_residual, trivial_residual, AlphaPattern, TrivialKind, TrivialSpec};
pub use weak_pme::{weak_pme_residual, weak_pme_target, Phi0, WeakPmeResidual, WeakPmeTestFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("PreconditionFailed: {0}")]
    PreconditionFailed(String),
    #[error("QuadratureUnderResolved: value {coarse} at n = {n}, {fine} at n = {}", 2 * n)]
    QuadratureUnderResolved { n: usize, coarse: f64, fine: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One diagnostic sample of a check, keyed by time (or window start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub t: f64,
    pub value: f64,
}

/// `passed` is exactly `max_violation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    /// Set when the check had nothing to test (no extremum hit).
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub details: Vec<Detail>,
}

impl VerificationReport {
    pub fn new(check_name: &str, max_violation: f64, tolerance: f64, details: Vec<Detail>) -> Self {
        VerificationReport {
            check_name: check_name.to_string(),
            passed: max_violation <= tolerance,
            max_violation,
            tolerance,
            vacuous: false,
            bound: None,
            details,
        }
    }
}
