//! Switching subgradient methods with Polyak-type steps for minimizing a
//! quasiconvex objective under inequality constraints on a convex set.
//!
//! The crate provides the oracles and feasible sets used by the benchmark
//! families, the switching solvers, and post-hoc checkers for the
//! per-step projection inequality and the linear-rate bounds.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod steps;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use geometry::Projector;
pub use oracle::{Func, Oracle, OracleOutput};
pub use problem::{effective_c, FBarModel, GroundTruth, ProblemInstance};
pub use steps::{ContractionParams, RateVariant, StepKind};
pub use trace::{Aggregation, RunTrace, SolverConfig, StepRecord};
pub use vector::DenseVector;
