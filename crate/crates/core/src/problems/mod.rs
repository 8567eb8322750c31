//! Benchmark instance generators and reference optima.
//!
//! Every generator is a pure function of its [`GeneratorSpec`]: the same
//! spec yields componentwise-identical instances on the same build.
//! Families are registered by name and selected at runtime.

mod geometric;
mod kl;
mod ratio;
mod reference;
mod registry;
mod synthetic;
mod truss;

pub use geometric::{gen_geometric_program, GeometricProgram};
pub use kl::{gen_kl_problem, kl_reference_optimum, KlConstrained, KlOptimum};
pub use ratio::{gen_ratio_problem, RatioDistances, RatioVariant};
pub use reference::{reference_by_long_run, ReferenceValue};
pub use registry::{generate, get_family, list_families, register_family, ProblemFamily};
pub use synthetic::{gen_synthetic_sharp, SyntheticSharp};
pub use truss::{gen_truss_problem, TrussDesign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DEFAULT_FLOOR;

/// Everything a generator needs; unused fields are ignored by a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Registered family name: `geometric`, `ratio`, `truss`, `kl`, `synthetic-sharp`.
    pub family: String,
    /// Family-specific variant, e.g. `norm-cone` or `linear-max` for `ratio`.
    #[serde(default)]
    pub variant: Option<String>,
    pub n: usize,
    #[serde(default = "defaults::m")]
    pub m: usize,
    #[serde(default = "defaults::p")]
    pub p: f64,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    #[serde(default = "defaults::noise_sigma")]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Divergence budget `B` of the KL family.
    #[serde(default = "defaults::budget")]
    pub budget: f64,
    /// Lower bound η keeping iterates strictly positive.
    #[serde(default = "defaults::floor")]
    pub floor: f64,
    /// Iterations spent estimating `f*` where no closed form exists; 0 skips it.
    #[serde(default = "defaults::reference_budget")]
    pub reference_budget: usize,
}

mod defaults {
    pub fn m() -> usize {
        10
    }
    pub fn p() -> f64 {
        5.0
    }
    pub fn radius() -> f64 {
        1.0
    }
    pub fn noise_sigma() -> f64 {
        0.1
    }
    pub fn budget() -> f64 {
        1000.0
    }
    pub fn floor() -> f64 {
        super::DEFAULT_FLOOR
    }
    pub fn reference_budget() -> usize {
        20_000
    }
}

impl GeneratorSpec {
    pub fn new(family: &str, n: usize, seed: u64) -> Self {
        Self {
            family: family.to_string(),
            variant: None,
            n,
            m: defaults::m(),
            p: defaults::p(),
            radius: defaults::radius(),
            noise_sigma: defaults::noise_sigma(),
            seed,
            budget: defaults::budget(),
            floor: defaults::floor(),
            reference_budget: defaults::reference_budget(),
        }
    }

    pub fn with_variant(mut self, variant: &str) -> Self {
        self.variant = Some(variant.to_string());
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.m == 0 {
            return bad("m must be >= 1".into());
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return bad(format!("p must be >= 1, got {}", self.p));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be > 0, got {}", self.radius));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be > 0, got {}", self.noise_sigma));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return bad(format!("budget must be > 0, got {}", self.budget));
        }
        if !(self.floor >= 0.0 && self.floor.is_finite()) {
            return bad(format!("floor must be >= 0, got {}", self.floor));
        }
        Ok(())
    }
}
