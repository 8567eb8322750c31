//! Concave square-root objective inside a generalized-KL ball.

use super::{GeneratorSpec, ProblemFamily};
use crate::error::{Error, Result};
use crate::geometry::Projector;
use crate::oracle::{Func, Oracle};
use crate::problem::{GroundTruth, ProblemInstance};
use crate::rng::Stream;
use crate::vector::DenseVector;

#[derive(Debug, Default)]
pub struct KlConstrained;

impl ProblemFamily for KlConstrained {
    fn name(&self) -> &str {
        "kl"
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance> {
        gen_kl_problem(spec)
    }
}

/// `min −√⟨a, x⟩` s.t. `Σ x_i log(x_i/a_i) − x_i + a_i ≤ B` over `x ≥ η`.
///
/// `a` is uniform on `(0, 1]`. `M_f` is the gradient norm at the default
/// start `(1/√n, …)`, which bounds it on the sublevel set of that start.
pub fn gen_kl_problem(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = Stream::new(spec.seed);
    let a = DenseVector::new((0..n).map(|_| rng.uniform_open_closed()).collect())?;
    let objective = Func::NegSqrtLinear { weights: a.clone() };
    let start = DenseVector::filled(n, 1.0 / (n as f64).sqrt());
    let lipschitz_f = objective.evaluate(&start)?.subgradient.norm();
    let optimum = kl_reference_optimum(&a, spec.budget, 1e-10)?;
    let f_star = objective.value(&optimum.x_star)?;
    let instance = ProblemInstance {
        dimension: n,
        objective,
        constraints: vec![Func::GeneralizedKl {
            reference: a,
            budget: spec.budget,
        }],
        projector: Projector::lower_orthant(n, spec.floor)?,
        lipschitz_f,
        lipschitz_g: None,
        weak_convexity_mu: 0.0,
        ground_truth: Some(GroundTruth {
            f_star,
            solutions: vec![optimum.x_star],
            sharpness_alpha: None,
        }),
        default_start: Some(start),
    };
    instance.validate()?;
    Ok(instance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlOptimum {
    pub f_star: f64,
    pub x_star: DenseVector,
    pub lambda: f64,
    /// `KL(x*, a) − B`, never positive.
    pub kl_residual: f64,
    /// `max_i |a_i − λ log(x_i/a_i)|`.
    pub stationarity_residual: f64,
}

fn point_at(a: &[f64], lambda: f64) -> Vec<f64> {
    a.iter().map(|ai| ai * (ai / lambda).exp()).collect()
}

/// `KL(x(λ), a) − B` for `x_i(λ) = a_i exp(a_i/λ)`, summed in the same order
/// as the constraint oracle so feasibility agrees bitwise.
fn excess_at(a: &[f64], budget: f64, lambda: f64) -> f64 {
    let mut value = -budget;
    for (xi, ai) in point_at(a, lambda).iter().zip(a) {
        value += xi * (xi / ai).ln() - xi + ai;
    }
    if value.is_nan() {
        f64::INFINITY
    } else {
        value
    }
}

/// Maximize `⟨a, x⟩` over the KL ball by bisection on the multiplier.
///
/// Stationarity gives `x_i = a_i exp(a_i/λ)`; the divergence of that point
/// decreases monotonically in `λ > 0`, so a bracket found by geometric
/// expansion is bisected until `|KL − B| ≤ tol`. The returned point is the
/// feasible end of the final bracket.
pub fn kl_reference_optimum(a: &DenseVector, budget: f64, tol: f64) -> Result<KlOptimum> {
    if a.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidParameter("reference vector must be strictly positive".into()));
    }
    if !(budget > 0.0 && budget.is_finite()) || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("need B > 0 and tol > 0, got {budget}, {tol}")));
    }
    let a = a.as_slice();
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    let excess = |lambda: f64| excess_at(a, budget, lambda);
    for _ in 0..2100 {
        if excess(hi) <= 0.0 {
            break;
        }
        hi *= 2.0;
    }
    for _ in 0..2100 {
        if excess(lo) >= 0.0 {
            break;
        }
        lo *= 0.5;
    }
    if !(excess(hi) <= 0.0 && excess(lo) >= 0.0) {
        return Err(Error::BracketFailure(format!("no sign change of KL - B on [{lo:e}, {hi:e}]")));
    }
    // KL(lo) ≥ B ≥ KL(hi); keep hi feasible
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = hi;
    let x = point_at(a, lambda);
    let kl_residual = excess(lambda);
    if kl_residual.abs() > tol {
        return Err(Error::BracketFailure(format!(
            "bisection stalled with |KL - B| = {:e} > {tol:e}",
            kl_residual.abs()
        )));
    }
    let stationarity_residual = x
        .iter()
        .zip(a)
        .map(|(xi, ai)| (ai - lambda * (xi / ai).ln()).abs())
        .fold(0.0, f64::max);
    let dot: f64 = x.iter().zip(a).map(|(xi, ai)| xi * ai).sum();
    Ok(KlOptimum {
        f_star: -dot.sqrt(),
        x_star: DenseVector::new(x)?,
        lambda,
        kl_residual,
        stationarity_residual,
    })
}
