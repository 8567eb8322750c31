//! Desk-scale stand-in for `f*` where no closed form exists.

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::problem::{FBarModel, ProblemInstance};
use crate::solvers::{initial_point, run_eps_switching};
use crate::trace::SolverConfig;
use crate::vector::DenseVector;

const EPS_START: f64 = 1e-3;
const EPS_FLOOR: f64 = 1e-12;
const STAGES: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue {
    pub f_star: f64,
    /// Constraint value `g` at the point achieving `f_star`.
    pub residual: f64,
    pub point: DenseVector,
}

/// Estimate `f*` by bisecting on the level `f̄` of the ε-switching method.
///
/// A run with `f̄ = L ≥ f*` reaches `{f ≤ L, g ≤ ε}`; with `L < f*` it cannot.
/// Each stage halves the bracket `[lo, hi]`, starting from
/// `lo = f(x_0) − M_f·diam(Q)`, while the feasibility tolerance follows the
/// ladder `ε_t = max(10⁻³·2^{−t}, 10⁻¹²)`. `hi` is always the objective value
/// of a point actually visited, so the estimate errs upward when the budget
/// is too small to certify a level.
pub fn reference_by_long_run(problem: &ProblemInstance, budget: usize) -> Result<ReferenceValue> {
    let probe = SolverConfig::new("eps", EPS_START, FBarModel::new(0.0, 1.0, None)?, 0);
    let x0 = initial_point(problem, &probe)?;
    let f0 = problem.objective.value(&x0)?;
    let g0 = problem.max_constraint_value(&x0)?;
    if budget == 0 {
        return if g0 <= EPS_START {
            Ok(ReferenceValue {
                f_star: f0,
                residual: g0,
                point: x0,
            })
        } else {
            Err(Error::NoFeasiblePoint { best_g: g0 })
        };
    }
    let diameter = problem.projector.diameter().ok_or(Error::UnboundedDomain)?;
    let per_stage = (budget / (STAGES + 1)).max(1);

    let stage = |start: &DenseVector, level: f64, eps: f64| -> Result<(Option<ReferenceValue>, f64)> {
        let mut config = SolverConfig::new("eps", eps, FBarModel::new(level, 1.0, None)?, per_stage);
        config.start = Some(start.clone());
        let trace = run_eps_switching(problem, &config)?;
        let found = trace.best_feasible.map(|b| ReferenceValue {
            f_star: b.f_value,
            residual: b.g_value,
            point: b.point,
        });
        Ok((found, trace.final_g))
    };

    // feasibility phase: any ε-feasible point will do
    let mut best = match stage(&x0, f0, EPS_START)? {
        (Some(b), _) => b,
        (None, best_g) => return Err(Error::NoFeasiblePoint { best_g }),
    };
    let mut lo = f0 - problem.lipschitz_f * diameter;
    for t in 0..STAGES {
        let eps = (EPS_START * 0.5_f64.powi(t as i32 + 1)).max(EPS_FLOOR);
        let level = 0.5 * (lo + best.f_star);
        match stage(&best.point, level, eps)?.0 {
            Some(found) if found.f_star <= level + eps => {
                if found.f_star < best.f_star {
                    best = found;
                }
            }
            _ => lo = level,
        }
    }
    Ok(best)
}
