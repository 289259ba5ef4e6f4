//! Nonlocal nonlinear diffusion with Dirichlet volume constraints: a
//! Picard-iteration solver, trivial-solution constructors and numerical
//! checks of the maximum principle, positivity and L-infinity decay.

pub mod analysis;
pub mod cli;
pub mod conductivity;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod problem;
pub mod profile;
pub mod solver;
pub mod suite;

pub use conductivity::Conductivity;
pub use config::RunConfig;
pub use error::Error;
pub use grid::{DomainGrid, Field};
pub use kernel::{Kernel, KernelShape, Stencil};
pub use problem::Problem;
pub use solver::{solve, solve_backward, PicardOptions, Trajectory};
