//! Post-hoc checks of the convergence inequalities along recorded traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::problem::{effective_c, FBarModel, ProblemInstance};
use crate::rng::Stream;
use crate::steps::{ContractionParams, StepKind};
use crate::trace::RunTrace;
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub holds: bool,
    /// `LHS − RHS`; the check passes when this is at most the tolerance.
    pub residual: f64,
}

/// `‖x⁺ − x_ref‖² ≤ ‖x − x_ref‖² − 2h⟨grad, x − x_ref⟩ + h²‖grad‖² + tol`
/// for `x⁺ = Pr_Q(x − h·grad)` and any `x_ref ∈ Q`.
pub fn check_projection_inequality(
    x: &DenseVector,
    x_next: &DenseVector,
    x_ref: &DenseVector,
    h: f64,
    grad: &DenseVector,
    tol: f64,
) -> InequalityCheck {
    let lhs = x_next.distance_sq(x_ref);
    let inner: f64 = grad.iter().zip(x.iter().zip(x_ref)).map(|(g, (a, b))| g * (a - b)).sum();
    let rhs = x.distance_sq(x_ref) - 2.0 * h * inner + h * h * grad.norm_sq();
    let residual = lhs - rhs;
    InequalityCheck {
        holds: residual <= tol,
        residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremVariant {
    /// ε-sharp scheme: productive factor `1 − (α²/M_f²)(2C − C²)`,
    /// nonproductive `1 − (1 − γ_i)α²/‖∇g(x_i)‖²`; an ε-solution also passes.
    Theorem1,
    /// Conditional scheme: productive factor `1 − (C/(2−C))α²/M_f²`,
    /// nonproductive `1 − C²(1 − γ_i)α²/‖∇g(x_i)‖²`.
    Theorem2,
}

/// Cumulative right-hand sides `bounds[k] ≥ dist²(x_{k+1}, X_*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSequence {
    pub initial: f64,
    pub bounds: Vec<f64>,
    pub factors: Vec<f64>,
    /// Steps whose factor falls outside `[0, 1]`.
    pub flagged: Vec<usize>,
    pub params: ContractionParams,
    pub variant: TheoremVariant,
}

impl BoundSequence {
    /// Bound on the last point of the trace.
    pub fn final_bound(&self) -> f64 {
        self.bounds.last().copied().unwrap_or(self.initial)
    }
}

fn step_factor(kind: StepKind, gamma: Option<f64>, grad_norm: f64, p: &ContractionParams, variant: TheoremVariant) -> f64 {
    let a2 = p.alpha * p.alpha;
    let c = p.big_c;
    let mf2 = p.m_f * p.m_f;
    // without a recorded γ the weakest admissible value 0 is used
    let gamma = gamma.unwrap_or(0.0);
    let g2 = grad_norm * grad_norm;
    match (variant, kind) {
        (TheoremVariant::Theorem1, StepKind::Productive) => 1.0 - a2 / mf2 * (2.0 * c - c * c),
        (TheoremVariant::Theorem2, StepKind::Productive) => 1.0 - c / (2.0 - c) * a2 / mf2,
        (TheoremVariant::Theorem1, StepKind::Nonproductive) => 1.0 - (1.0 - gamma) * a2 / g2,
        (TheoremVariant::Theorem2, StepKind::Nonproductive) => 1.0 - c * c * (1.0 - gamma) * a2 / g2,
    }
}

/// Cumulative theorem bound from the recorded kinds, γ values and gradient norms.
pub fn bound_sequence(trace: &RunTrace, params: &ContractionParams, variant: TheoremVariant, dist0_sq: f64) -> BoundSequence {
    let mut bound = dist0_sq;
    let mut bounds = Vec::with_capacity(trace.len());
    let mut factors = Vec::with_capacity(trace.len());
    let mut flagged = Vec::new();
    for (k, r) in trace.records.iter().enumerate() {
        let factor = step_factor(r.kind, r.gamma, r.grad_norm, params, variant);
        if !(0.0..=1.0).contains(&factor) {
            flagged.push(k);
        }
        bound *= factor;
        factors.push(factor);
        bounds.push(bound);
    }
    BoundSequence {
        initial: dist0_sq,
        bounds,
        factors,
        flagged,
        params: *params,
        variant,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremFailure {
    /// Step `k`; the checked point is `x_{k+1}`.
    pub iteration: usize,
    pub dist_sq: f64,
    pub bound: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub variant: TheoremVariant,
    pub checked: usize,
    pub failures: Vec<TheoremFailure>,
    pub bounds: BoundSequence,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check every `x_{k+1}` against the cumulative bound.
///
/// `Theorem1` also accepts a point that is an ε-solution (`f − f* ≤ ε` and
/// `g ≤ ε`). A negative bound always fails, since no distance can meet it.
/// `tol` is scaled by `max(1, dist²(x_0, X_*))`.
pub fn verify_theorem_alternative(
    trace: &RunTrace,
    problem: &ProblemInstance,
    params: &ContractionParams,
    epsilon: f64,
    variant: TheoremVariant,
    tol: f64,
) -> Result<TheoremReport> {
    let truth = problem
        .ground_truth
        .as_ref()
        .ok_or(Error::MissingGroundTruth("theorem check needs f* and X_*"))?;
    let dist = |x: &DenseVector| truth.distance(x).ok_or(Error::MissingGroundTruth("solution set is empty"));
    let dist0 = dist(&trace.start_point)?;
    let bounds = bound_sequence(trace, params, variant, dist0 * dist0);
    let scaled_tol = tol * (dist0 * dist0).max(1.0);

    let mut failures = Vec::new();
    for k in 0..trace.len() {
        // state after step k: the next record, or the final point
        let (f, g, d) = match trace.records.get(k + 1) {
            Some(r) => (
                r.f_value,
                r.g_value,
                r.dist_to_solution
                    .ok_or(Error::MissingGroundTruth("trace lacks distances"))?,
            ),
            None => (trace.final_f, trace.final_g, dist(&trace.final_point)?),
        };
        let bound = bounds.bounds[k];
        let dist_sq = d * d;
        let eps_solution = f - truth.f_star <= epsilon && g <= epsilon;
        let within = bound >= 0.0 && dist_sq <= bound + scaled_tol;
        let passes = within || (variant == TheoremVariant::Theorem1 && eps_solution);
        if !passes {
            failures.push(TheoremFailure {
                iteration: k,
                dist_sq,
                bound,
                residual: dist_sq - bound,
            });
        }
    }
    Ok(TheoremReport {
        variant,
        checked: trace.len(),
        failures,
        bounds,
    })
}

/// `α̂ = min max(f(x) − f*, g(x)) / dist(x, X_*)` over uniform samples of `Q`.
///
/// Samples are drawn sequentially from one seeded stream, so more samples
/// extend the same prefix and never increase the estimate.
pub fn estimate_sharpness(problem: &ProblemInstance, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let truth = problem
        .ground_truth
        .as_ref()
        .ok_or(Error::MissingGroundTruth("sharpness estimate needs f* and X_*"))?;
    if truth.solutions.is_empty() {
        return Err(Error::MissingGroundTruth("solution set is empty"));
    }
    let mut rng = Stream::new(seed);
    let mut alpha = f64::INFINITY;
    for _ in 0..samples {
        let x = problem.projector.sample(problem.dimension, &mut rng)?;
        let d = truth.distance(&x).expect("solutions present");
        if d <= 1e-12 {
            continue;
        }
        let gap = problem.objective.value(&x)? - truth.f_star;
        let g = problem.max_constraint_value(&x)?;
        alpha = alpha.min(gap.max(g) / d);
    }
    Ok(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FBarWindowReport {
    pub big_c: f64,
    /// Effective `c(x_k)` per record; `None` where `f(x_k) = f*`.
    pub effective_c: Vec<Option<f64>>,
    /// Records with `c(x_k) ∉ [C, 2 − C]`.
    pub violations: Vec<usize>,
    /// Records at the optimal value, where `c` is undefined.
    pub degenerate: Vec<usize>,
    pub compliant_fraction: f64,
}

impl FBarWindowReport {
    pub fn is_compliant(&self, k: usize) -> bool {
        self.effective_c.get(k).copied().flatten().is_some() && !self.violations.contains(&k)
    }
}

/// Where along the trace the inexactness window `c(x) ∈ [C, 2 − C]` holds.
pub fn check_fbar_window(trace: &RunTrace, fbar: &FBarModel) -> Result<FBarWindowReport> {
    let f_star = fbar.f_star.ok_or(Error::MissingGroundTruth("window check needs f*"))?;
    let mut cs = Vec::with_capacity(trace.len());
    let mut violations = Vec::new();
    let mut degenerate = Vec::new();
    for (k, r) in trace.records.iter().enumerate() {
        match effective_c(r.f_value, fbar.f_bar, f_star) {
            Ok(c) => {
                if !fbar.in_window(c) {
                    violations.push(k);
                }
                cs.push(Some(c));
            }
            Err(_) => {
                degenerate.push(k);
                cs.push(None);
            }
        }
    }
    let compliant = trace.len() - violations.len() - degenerate.len();
    Ok(FBarWindowReport {
        big_c: fbar.big_c,
        effective_c: cs,
        violations,
        degenerate,
        compliant_fraction: if trace.is_empty() {
            1.0
        } else {
            compliant as f64 / trace.len() as f64
        },
    })
}

/// One recorded step as needed for replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayStep {
    pub kind: StepKind,
    pub step_size: f64,
    pub constraint_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFailure {
    pub iteration: usize,
    pub check: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps: usize,
    pub references: usize,
    /// Largest `‖Pr(x_k − h_k·grad) − x_{k+1}‖` seen.
    pub max_step_residual: f64,
    /// Largest projection-inequality residual seen.
    pub max_inequality_residual: f64,
    pub failures: Vec<ReplayFailure>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Replay recorded steps with fresh oracle calls.
///
/// For each `k`, recomputes the subgradient the step used and checks that
/// `Pr_Q(x_k − h_k·grad)` reproduces `x_{k+1}`, then checks the projection
/// inequality against every reference point. `points` holds `x_0 … x_K`.
/// Both tolerances are `tol·max(1, ‖x_k‖²)`.
pub fn replay_steps(
    problem: &ProblemInstance,
    steps: &[ReplayStep],
    points: &[DenseVector],
    references: &[DenseVector],
    tol: f64,
) -> Result<ReplayReport> {
    if points.len() != steps.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} steps need {} points, got {}",
            steps.len(),
            steps.len() + 1,
            points.len()
        )));
    }
    let mut report = ReplayReport {
        steps: steps.len(),
        references: references.len(),
        max_step_residual: 0.0,
        max_inequality_residual: f64::NEG_INFINITY,
        failures: Vec::new(),
    };
    for (k, step) in steps.iter().enumerate() {
        let (x, x_next) = (&points[k], &points[k + 1]);
        let scaled = tol * x.norm_sq().max(1.0);
        let grad = match step.kind {
            StepKind::Productive => problem.objective.evaluate(x),
            StepKind::Nonproductive => {
                let i = step
                    .constraint_index
                    .filter(|i| *i < problem.m())
                    .ok_or_else(|| Error::InvalidParameter(format!("step {k}: missing or bad constraint index")))?;
                problem.constraints[i].evaluate(x)
            }
        }
        .map_err(|e| e.at(k))?
        .subgradient;
        if !(step.step_size >= 0.0 && step.step_size.is_finite()) {
            report.failures.push(ReplayFailure {
                iteration: k,
                check: "step size".into(),
                residual: step.step_size,
            });
            continue;
        }
        let replayed = problem.projector.project(&x.add_scaled(-step.step_size, &grad).map_err(|e| e.at(k))?)?;
        let step_residual = replayed.distance(x_next);
        report.max_step_residual = report.max_step_residual.max(step_residual);
        if step_residual > scaled.sqrt() {
            report.failures.push(ReplayFailure {
                iteration: k,
                check: "step replay".into(),
                residual: step_residual,
            });
        }
        for r in references {
            let check = check_projection_inequality(x, x_next, r, step.step_size, &grad, scaled);
            report.max_inequality_residual = report.max_inequality_residual.max(check.residual);
            if !check.holds {
                report.failures.push(ReplayFailure {
                    iteration: k,
                    check: "projection inequality".into(),
                    residual: check.residual,
                });
            }
        }
    }
    Ok(report)
}
