//! The built-in switching schemes.

use crate::error::Result;
use crate::steps::{
    baseline_steps, constraint_step, gamma_update_cond, gamma_update_eps, polyak_step, ContractionParams,
    PolyakStep, StepKind,
};
use crate::trace::SolverConfig;

/// Which γ recursion accompanies a method, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaRule {
    Eps,
    Cond,
}

impl GammaRule {
    pub fn apply(
        self,
        gamma: f64,
        kind: StepKind,
        params: &ContractionParams,
        grad_g_norm: Option<f64>,
    ) -> Result<f64> {
        match self {
            GammaRule::Eps => gamma_update_eps(gamma, kind, params, grad_g_norm),
            GammaRule::Cond => gamma_update_cond(gamma, kind, params, grad_g_norm),
        }
    }
}

/// One switching scheme: a switching threshold plus a step rule per branch.
pub trait SwitchingMethod: Send + Sync {
    fn name(&self) -> &str;

    fn description(&self) -> &str;

    /// The step is productive iff the aggregated constraint value is at most this.
    fn threshold(&self, f_x: f64, config: &SolverConfig) -> f64;

    /// Step along the objective subgradient, given `‖∇f(x)‖ > 0` or `f(x) ≤ f̄`.
    fn productive_step(&self, f_x: f64, grad_norm: f64, m_f: f64, config: &SolverConfig) -> Result<PolyakStep>;

    /// Step along the selected constraint subgradient.
    fn nonproductive_step(&self, g_x: f64, grad_norm: f64, config: &SolverConfig) -> Result<f64>;

    fn gamma_rule(&self) -> Option<GammaRule> {
        None
    }
}

/// Polyak steps, productive iff `g(x) ≤ ε`.
#[derive(Debug, Default)]
pub struct EpsSwitching;

impl SwitchingMethod for EpsSwitching {
    fn name(&self) -> &str {
        "eps"
    }

    fn description(&self) -> &str {
        "Polyak steps switched on g(x) <= eps"
    }

    fn threshold(&self, _f_x: f64, config: &SolverConfig) -> f64 {
        config.epsilon
    }

    fn productive_step(&self, f_x: f64, grad_norm: f64, m_f: f64, config: &SolverConfig) -> Result<PolyakStep> {
        polyak_step(f_x, config.fbar.f_bar, m_f, grad_norm)
    }

    fn nonproductive_step(&self, g_x: f64, grad_norm: f64, _config: &SolverConfig) -> Result<f64> {
        constraint_step(g_x, grad_norm)
    }

    fn gamma_rule(&self) -> Option<GammaRule> {
        Some(GammaRule::Eps)
    }
}

/// Polyak steps, productive iff `f(x) − f̄ ≥ g(x)`.
#[derive(Debug, Default)]
pub struct ConditionalSwitching;

impl SwitchingMethod for ConditionalSwitching {
    fn name(&self) -> &str {
        "cond"
    }

    fn description(&self) -> &str {
        "Polyak steps switched on f(x) - fbar >= g(x)"
    }

    fn threshold(&self, f_x: f64, config: &SolverConfig) -> f64 {
        f_x - config.fbar.f_bar
    }

    fn productive_step(&self, f_x: f64, grad_norm: f64, m_f: f64, config: &SolverConfig) -> Result<PolyakStep> {
        polyak_step(f_x, config.fbar.f_bar, m_f, grad_norm)
    }

    fn nonproductive_step(&self, g_x: f64, grad_norm: f64, _config: &SolverConfig) -> Result<f64> {
        constraint_step(g_x, grad_norm)
    }

    fn gamma_rule(&self) -> Option<GammaRule> {
        Some(GammaRule::Cond)
    }
}

/// Comparator: `ε/‖∇f‖²` on productive steps, `1/‖∇g‖` on nonproductive ones.
#[derive(Debug, Default)]
pub struct BaselineSwitching;

impl SwitchingMethod for BaselineSwitching {
    fn name(&self) -> &str {
        "baseline"
    }

    fn description(&self) -> &str {
        "steps eps/|grad f|^2 and 1/|grad g| switched on g(x) <= eps"
    }

    fn threshold(&self, _f_x: f64, config: &SolverConfig) -> f64 {
        config.epsilon
    }

    fn productive_step(&self, f_x: f64, grad_norm: f64, _m_f: f64, config: &SolverConfig) -> Result<PolyakStep> {
        if grad_norm <= config.grad_tolerance && f_x <= config.fbar.f_bar {
            return Ok(PolyakStep {
                size: 0.0,
                below_estimate: f_x < config.fbar.f_bar,
            });
        }
        let (h_f, _) = baseline_steps(config.epsilon, Some(grad_norm), None)?;
        Ok(PolyakStep {
            size: h_f.unwrap_or(0.0),
            below_estimate: false,
        })
    }

    fn nonproductive_step(&self, _g_x: f64, grad_norm: f64, config: &SolverConfig) -> Result<f64> {
        let (_, h_g) = baseline_steps(config.epsilon, None, Some(grad_norm))?;
        Ok(h_g.unwrap_or(0.0))
    }
}

/// Polyak productive steps paired with the comparator's `1/‖∇g‖` constraint
/// step, so the two productive rules can be compared on equal footing.
#[derive(Debug, Default)]
pub struct PolyakUnitConstraint;

impl SwitchingMethod for PolyakUnitConstraint {
    fn name(&self) -> &str {
        "polyak-unit-g"
    }

    fn description(&self) -> &str {
        "Polyak productive steps with 1/|grad g| constraint steps, switched on g(x) <= eps"
    }

    fn threshold(&self, _f_x: f64, config: &SolverConfig) -> f64 {
        config.epsilon
    }

    fn productive_step(&self, f_x: f64, grad_norm: f64, m_f: f64, config: &SolverConfig) -> Result<PolyakStep> {
        polyak_step(f_x, config.fbar.f_bar, m_f, grad_norm)
    }

    fn nonproductive_step(&self, _g_x: f64, grad_norm: f64, config: &SolverConfig) -> Result<f64> {
        let (_, h_g) = baseline_steps(config.epsilon, None, Some(grad_norm))?;
        Ok(h_g.unwrap_or(0.0))
    }
}
