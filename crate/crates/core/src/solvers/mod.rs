//! Switching subgradient schemes and the shared iteration loop.
//!
//! Every method follows the same pattern: at `x_k` the aggregated constraint
//! value is compared with a method-specific threshold. At or below it the
//! step follows the objective subgradient (productive), above it the
//! selected constraint subgradient (nonproductive). Each new point is
//! projected onto `Q`. Methods are looked up by name at runtime.

mod methods;
mod registry;
mod select;

pub use methods::{BaselineSwitching, ConditionalSwitching, EpsSwitching, GammaRule, PolyakUnitConstraint, SwitchingMethod};
pub use registry::{get_method, list_methods, register_method};
pub use select::{select_constraint, SwitchDecision};

use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::problem::ProblemInstance;
use crate::steps::{ContractionParams, StepKind};
use crate::trace::{Aggregation, BestIterate, RunTrace, SolverConfig, StepRecord};
use crate::vector::DenseVector;

/// Run the method named by `config.algorithm`.
pub fn run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    let method = get_method(&config.algorithm)?;
    run_with(method.as_ref(), problem, config)
}

pub fn run_eps_switching(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    run_with(&EpsSwitching, problem, config)
}

pub fn run_conditional_switching(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    run_with(&ConditionalSwitching, problem, config)
}

pub fn run_baseline_switching(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    run_with(&BaselineSwitching, problem, config)
}

/// Projected start point: the configured one, else the instance default.
pub fn initial_point(problem: &ProblemInstance, config: &SolverConfig) -> Result<DenseVector> {
    let start = config.start.clone().unwrap_or_else(|| problem.start_point());
    start.check_dim(problem.dimension)?;
    problem.projector.project(&start)
}

pub fn run_with(method: &dyn SwitchingMethod, problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    config.validate()?;
    let start = initial_point(problem, config)?;
    let params = problem
        .ground_truth
        .as_ref()
        .and_then(|t| t.sharpness_alpha)
        .and_then(|alpha| {
            ContractionParams::new(alpha, problem.lipschitz_f, problem.lipschitz_g, config.fbar.big_c).ok()
        });
    let gamma_rule = method.gamma_rule();
    let mut gamma = params.and(gamma_rule).map(|_| config.gamma0);

    let mut x = start.clone();
    let mut records = Vec::with_capacity(config.max_iters);
    let mut productive_set = Vec::new();
    let mut nonproductive_set = Vec::new();
    let mut best: Option<BestIterate> = None;
    let mut constraint_evaluations = 0_u64;
    let mut terminated_early = None;

    for k in 0..config.max_iters {
        let fo = problem.evaluate_objective(&x).map_err(|e| e.at(k))?;
        let threshold = method.threshold(fo.value, config);
        let (decision, count) = select::select_lazy(problem.m(), threshold, config.aggregation, |i| {
            problem.constraints[i].value(&x)
        })
        .map_err(|e| e.at(k))?;
        constraint_evaluations += count;

        // under FirstViolated a nonproductive value is only a lower bound on max g
        let g_is_max = config.aggregation == Aggregation::MaxOfConstraints || decision.kind == StepKind::Productive;
        if g_is_max && decision.aggregated_g <= config.epsilon {
            track_best(&mut best, k, fo.value, decision.aggregated_g, &x);
            if config.early_stop && fo.value <= config.fbar.f_bar {
                terminated_early = Some(format!(
                    "iteration {k}: f(x) <= fbar and g(x) <= eps"
                ));
                break;
            }
        }

        let (step_size, grad_norm, next) = match decision.kind {
            StepKind::Productive => {
                let grad_norm = fo.subgradient.norm();
                let step = method
                    .productive_step(fo.value, grad_norm, problem.lipschitz_f, config)
                    .map_err(|e| e.at(k))?;
                if step.size > 0.0 && grad_norm <= config.grad_tolerance {
                    return Err(Error::ZeroGradient { norm: grad_norm }.at(k));
                }
                let next = take_step(problem, &x, step.size, &fo.subgradient).map_err(|e| e.at(k))?;
                (step.size, grad_norm, next)
            }
            StepKind::Nonproductive => {
                let i = decision.constraint_index.expect("nonproductive decision carries an index");
                let co = problem.constraints[i].evaluate(&x).map_err(|e| e.at(k))?;
                let grad_norm = co.subgradient.norm();
                if grad_norm <= config.grad_tolerance {
                    return Err(Error::ZeroGradient { norm: grad_norm }.at(k));
                }
                let h = method
                    .nonproductive_step(co.value, grad_norm, config)
                    .map_err(|e| e.at(k))?;
                let next = take_step(problem, &x, h, &co.subgradient).map_err(|e| e.at(k))?;
                (h, grad_norm, next)
            }
        };

        let gamma_k = gamma;
        if let (Some(g), Some(rule), Some(p)) = (gamma, gamma_rule, params.as_ref()) {
            // an inconsistent radicand ends the recursion for this run
            gamma = rule.apply(g, decision.kind, p, Some(grad_norm)).ok();
        }

        match decision.kind {
            StepKind::Productive => productive_set.push(k),
            StepKind::Nonproductive => nonproductive_set.push(k),
        }
        records.push(StepRecord {
            iteration: k,
            kind: decision.kind,
            f_value: fo.value,
            g_value: decision.aggregated_g,
            step_size,
            grad_norm,
            gamma: gamma_k,
            dist_to_solution: problem.distance_to_solution(&x),
            constraint_index: decision.constraint_index,
            point: config.record_points.then(|| x.clone()),
        });
        x = next;
    }

    let k_final = records.len();
    let final_f = problem.objective.value(&x).map_err(|e| e.at(k_final))?;
    let final_g = problem.max_constraint_value(&x).map_err(|e| e.at(k_final))?;
    if final_g <= config.epsilon {
        track_best(&mut best, k_final, final_f, final_g, &x);
    }

    Ok(RunTrace {
        algorithm: method.name().to_string(),
        records,
        productive_set,
        nonproductive_set,
        start_point: start,
        final_point: x,
        final_f,
        final_g,
        best_feasible: best,
        constraint_evaluations,
        terminated_early,
    })
}

fn take_step(problem: &ProblemInstance, x: &DenseVector, h: f64, grad: &DenseVector) -> Result<DenseVector> {
    if h == 0.0 {
        return Ok(x.clone());
    }
    problem.projector.project(&x.add_scaled(-h, grad)?)
}

fn track_best(best: &mut Option<BestIterate>, k: usize, f: f64, g: f64, x: &DenseVector) {
    if best.as_ref().is_none_or(|b| f < b.f_value) {
        *best = Some(BestIterate {
            iteration: k,
            f_value: f,
            g_value: g,
            point: x.clone(),
        });
    }
}
