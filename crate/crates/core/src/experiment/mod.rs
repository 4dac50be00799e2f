//! Experiment driver: configuration, built-in problems, convergence runs,
//! geometry export and the self-test.

pub mod benchmark;
pub mod config;
pub mod run;
pub mod selftest;
pub mod svg;

pub use benchmark::{benchmark, planar_patch, PlanarPatch, Problem, SmoothedSquare};
pub use config::{default_levels, Direction, ProblemKind, RunConfig};
pub use run::{run_convergence, run_degree, write_csv, ConvergenceRun, DegreeRun, Discretization, SolveStats};
pub use selftest::{run_self_test, Check, SelfTestOptions};
pub use svg::{export_geometry, gamma_h_samples, render_svg};
