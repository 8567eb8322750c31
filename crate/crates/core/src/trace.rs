//! Solver configuration and the per-iteration trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::FBarModel;
use crate::steps::{StepKind, GRAD_TOLERANCE};
use crate::vector::DenseVector;

/// How the `m` constraint values collapse into one switching test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// `g = max_i g_i`; the argmax (lowest index on ties) drives the step.
    #[default]
    MaxOfConstraints,
    /// The first violated constraint drives the step; later ones are not evaluated.
    FirstViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Registered method name, e.g. `eps`, `cond`, `baseline`.
    pub algorithm: String,
    pub epsilon: f64,
    pub fbar: FBarModel,
    pub gamma0: f64,
    pub max_iters: usize,
    #[serde(default)]
    pub aggregation: Aggregation,
    #[serde(default = "default_grad_tolerance")]
    pub grad_tolerance: f64,
    #[serde(default)]
    pub record_points: bool,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the instance's default start; projected onto `Q` either way.
    #[serde(default)]
    pub start: Option<DenseVector>,
    /// Stop once `f(x) ≤ f̄` and `g(x) ≤ ε`.
    #[serde(default)]
    pub early_stop: bool,
}

fn default_grad_tolerance() -> f64 {
    GRAD_TOLERANCE
}

impl SolverConfig {
    pub fn new(algorithm: &str, epsilon: f64, fbar: FBarModel, max_iters: usize) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            epsilon,
            fbar,
            gamma0: 0.5,
            max_iters,
            aggregation: Aggregation::default(),
            grad_tolerance: GRAD_TOLERANCE,
            record_points: false,
            seed: 0,
            start: None,
            early_stop: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma0 must lie in (0, 1), got {}", self.gamma0)));
        }
        if !(self.grad_tolerance.is_finite() && self.grad_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("grad_tolerance must be >= 0".into()));
        }
        FBarModel::new(self.fbar.f_bar, self.fbar.big_c, self.fbar.f_star)?;
        Ok(())
    }
}

/// One iteration `k`, describing the point `x_k` and the step taken from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    pub kind: StepKind,
    pub f_value: f64,
    /// Aggregated constraint value used by the switching test.
    pub g_value: f64,
    pub step_size: f64,
    /// Norm of the subgradient actually stepped along.
    pub grad_norm: f64,
    /// `γ_k`, present only when the instance supplies the sharpness constant.
    pub gamma: Option<f64>,
    pub dist_to_solution: Option<f64>,
    /// Constraint that drove a nonproductive step.
    pub constraint_index: Option<usize>,
    /// `x_k`, kept only when points are recorded.
    pub point: Option<DenseVector>,
}

/// Best point seen with `g ≤ ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestIterate {
    pub iteration: usize,
    pub f_value: f64,
    pub g_value: f64,
    pub point: DenseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub records: Vec<StepRecord>,
    pub productive_set: Vec<usize>,
    pub nonproductive_set: Vec<usize>,
    pub start_point: DenseVector,
    pub final_point: DenseVector,
    pub final_f: f64,
    pub final_g: f64,
    pub best_feasible: Option<BestIterate>,
    /// Constraint value queries issued by the switching tests.
    pub constraint_evaluations: u64,
    pub terminated_early: Option<String>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `I ∪ J = {0, …, K−1}`, disjoint, and consistent with each record's kind.
    pub fn partition_is_exact(&self) -> bool {
        let k = self.records.len();
        if self.productive_set.len() + self.nonproductive_set.len() != k {
            return false;
        }
        let mut seen = vec![false; k];
        let tagged = self
            .productive_set
            .iter()
            .map(|&i| (i, StepKind::Productive))
            .chain(self.nonproductive_set.iter().map(|&i| (i, StepKind::Nonproductive)));
        for (i, kind) in tagged {
            if i >= k || seen[i] || self.records[i].kind != kind || self.records[i].iteration != i {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    /// First iteration whose point satisfies `f − f* ≤ ε` and `g ≤ ε`.
    ///
    /// The final point counts as iteration `K`.
    pub fn first_eps_solution(&self, f_star: f64, epsilon: f64) -> Option<usize> {
        self.records
            .iter()
            .position(|r| r.f_value - f_star <= epsilon && r.g_value <= epsilon)
            .or_else(|| {
                (self.final_f - f_star <= epsilon && self.final_g <= epsilon).then_some(self.records.len())
            })
    }

    /// Points `x_0, …, x_K`, available when points were recorded.
    pub fn points(&self) -> Option<Vec<&DenseVector>> {
        let mut out: Vec<&DenseVector> = Vec::with_capacity(self.records.len() + 1);
        for r in &self.records {
            out.push(r.point.as_ref()?);
        }
        out.push(&self.final_point);
        Some(out)
    }
}
