//! Semi-discrete nonlocal operator and its time integrators.
//!
//! The right-hand side at an interior node `x` is the midpoint quadrature
//! `sum_d k(u(x), u(x+d)) [u(x+d) - u(x)] w_d`. Time integration follows the
//! constructive existence argument: Picard iteration of the integral form on
//! windows whose length makes the iteration a 1/2-contraction, chained until
//! the final time.

mod picard;
mod rk4;

pub use picard::{picard_window, solve, solve_backward, SolveWindow, Trajectory, WindowSummary};
pub use rk4::rk4_reference;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conductivity::{Conductivity, ConductivityError};
use crate::grid::{DomainGrid, Field, GridError};
use crate::kernel::{Kernel, Stencil};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Conductivity(#[from] ConductivityError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("NoConvergence: window {window} (t = {t_start}) did not converge in {iterations} iterations (last update {delta:e}, tol {tol:e})")]
    NoConvergence {
        window: usize,
        t_start: f64,
        iterations: usize,
        delta: f64,
        tol: f64,
    },
    #[error("RatioViolation: window {window} (t = {t_start}), iteration {iteration}: contraction ratio {ratio} exceeds {limit}")]
    RatioViolation {
        window: usize,
        t_start: f64,
        iteration: usize,
        ratio: f64,
        limit: f64,
    },
    #[error("NonFiniteState at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Picard window parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardOptions {
    /// Trapezoid sub-intervals per window.
    pub substeps: usize,
    /// Stopping tolerance on the space-time max update; `None` means
    /// `1e-12 * max(1, eps)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub window_cap: f64,
    pub ratio_tolerance: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            substeps: 16,
            tol: None,
            max_iter: 60,
            window_cap: 0.1,
            ratio_tolerance: 0.05,
        }
    }
}

impl PicardOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidArgument(m.to_string()));
        if self.substeps == 0 {
            return bad("substeps must be >= 1");
        }
        if let Some(tol) = self.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return bad("tol must be positive");
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.window_cap.is_finite() && self.window_cap > 0.0) {
            return bad("window_cap must be positive");
        }
        if !(self.ratio_tolerance.is_finite() && self.ratio_tolerance >= 0.0) {
            return bad("ratio_tolerance must be nonnegative");
        }
        Ok(())
    }

    pub fn tol_for(&self, epsilon: f64) -> f64 {
        self.tol.unwrap_or(1e-12 * epsilon.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    /// Evolution with `k -> -k`, i.e. the equation run backwards in time.
    Backward,
}

/// Below this many stencil evaluations per sweep the RHS runs on the calling
/// thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// Conductivity bound to a grid and stencil, with a precomputed neighbour
/// table.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    conductivity: Conductivity,
    weights: Vec<f64>,
    neighbors: Vec<u32>,
    n_interior: usize,
    n_nodes: usize,
    window_l1: f64,
    direction: Direction,
}

impl NonlocalOperator {
    pub fn new(
        grid: &DomainGrid,
        kernel: &Kernel,
        stencil: &Stencil,
        conductivity: Conductivity,
    ) -> Result<Self, SolverError> {
        conductivity.validate()?;
        let neighbors = grid.neighbor_table(stencil)?;
        // the discrete contraction is governed by the stencil sum; take the
        // larger of the two so the window is valid for both
        let window_l1 = kernel.l1_norm().max(stencil.weight_sum());
        Ok(NonlocalOperator {
            conductivity,
            weights: stencil.weights.clone(),
            neighbors,
            n_interior: grid.n_interior(),
            n_nodes: grid.n_nodes(),
            window_l1,
            direction: Direction::Forward,
        })
    }

    pub fn conductivity(&self) -> Conductivity {
        self.conductivity
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Kernel norm used in the window length.
    pub fn window_l1(&self) -> f64 {
        self.window_l1
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Neighbour node ids of interior node `node`, one per stencil offset.
    pub fn neighbors_of(&self, node: usize) -> &[u32] {
        let s = self.weights.len();
        &self.neighbors[node * s..(node + 1) * s]
    }

    pub fn reversed(&self) -> Self {
        let mut op = self.clone();
        op.direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        };
        op
    }

    /// RHS at one interior node of a full (interior + collar) value vector.
    #[inline]
    pub fn rhs_node(&self, values: &[f64], node: usize) -> f64 {
        let ux = values[node];
        let k = &self.conductivity;
        let mut acc = 0.0;
        for (&nb, &w) in self.neighbors_of(node).iter().zip(&self.weights) {
            let uy = values[nb as usize];
            acc += k.eval(ux, uy) * (uy - ux) * w;
        }
        match self.direction {
            Direction::Forward => acc,
            Direction::Backward => -acc,
        }
    }

    pub fn rhs(&self, field: &Field, node: usize) -> f64 {
        assert!(node < self.n_interior, "rhs is defined on interior nodes only");
        self.rhs_node(field.values(), node)
    }

    /// Writes the RHS at every interior node into `out`.
    pub fn rhs_into(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.n_nodes);
        debug_assert_eq!(out.len(), self.n_interior);
        if self.n_interior * self.weights.len() < PARALLEL_THRESHOLD {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.rhs_node(values, i);
            }
        } else {
            out.par_iter_mut()
                .enumerate()
                .with_min_len(64)
                .for_each(|(i, o)| *o = self.rhs_node(values, i));
        }
    }

    pub fn rhs_field(&self, field: &Field) -> Vec<f64> {
        let mut out = vec![0.0; self.n_interior];
        self.rhs_into(field.values(), &mut out);
        out
    }
}

/// Contraction window `T = [8 |J|_1 eps max(K(eps,eps), 2K(2eps,2eps))]^-1`
/// with `eps = 2 u_norm`, capped at `cap`. Returns `(T, eps)`.
pub fn window_length(c: &Conductivity, kernel_l1: f64, u_norm: f64, cap: f64) -> (f64, f64) {
    let eps = 2.0 * u_norm;
    let modulus = c
        .lip_modulus(eps, eps)
        .max(2.0 * c.lip_modulus(2.0 * eps, 2.0 * eps));
    let denom = 8.0 * kernel_l1 * eps * modulus;
    let t = if denom > 0.0 && denom.is_finite() {
        (1.0 / denom).min(cap)
    } else if denom.is_infinite() {
        0.0
    } else {
        cap
    };
    (t, eps)
}
