//! Step-size rules, the `v_f` quantity, γ recursions and contraction factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Gradient norms at or below this count as zero.
pub const GRAD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    Productive,
    Nonproductive,
}

impl StepKind {
    pub fn code(self) -> &'static str {
        match self {
            StepKind::Productive => "P",
            StepKind::Nonproductive => "N",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "P" => Some(StepKind::Productive),
            "N" => Some(StepKind::Nonproductive),
            _ => None,
        }
    }
}

/// Constants entering the rate formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    pub alpha: f64,
    pub m_f: f64,
    pub m_g: Option<f64>,
    pub big_c: f64,
}

impl ContractionParams {
    pub fn new(alpha: f64, m_f: f64, m_g: Option<f64>, big_c: f64) -> Result<Self> {
        let p = Self { alpha, m_f, m_g, big_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.alpha) || !positive(self.m_f) || self.m_g.is_some_and(|m| !positive(m)) {
            return Err(Error::InvalidParameter(format!(
                "alpha, M_f, M_g must be > 0: {self:?}"
            )));
        }
        if !(self.big_c > 0.0 && self.big_c <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "C must lie in (0, 1], got {}",
                self.big_c
            )));
        }
        Ok(())
    }

    /// `max(M_f, M_g)`, falling back to `M_f` when `M_g` is unknown.
    pub fn m_uniform(&self) -> f64 {
        self.m_g.map_or(self.m_f, |g| g.max(self.m_f))
    }
}

/// `⟨grad/‖grad‖, x − y⟩`, or 0 for a (numerically) zero gradient.
pub fn v_f(grad: &DenseVector, x: &DenseVector, y: &DenseVector) -> f64 {
    let norm = grad.norm();
    if norm <= GRAD_TOLERANCE {
        return 0.0;
    }
    grad.iter()
        .zip(x.iter().zip(y))
        .map(|(g, (a, b))| (g / norm) * (a - b))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyakStep {
    pub size: f64,
    /// `f(x) < f̄`: the estimate says the iterate is already optimal, so no step is taken.
    pub below_estimate: bool,
}

/// `(f(x) − f̄) / (M_f ‖∇f(x)‖)`.
pub fn polyak_step(f_x: f64, f_bar: f64, m_f: f64, grad_norm: f64) -> Result<PolyakStep> {
    let numerator = f_x - f_bar;
    if numerator <= 0.0 {
        return Ok(PolyakStep {
            size: 0.0,
            below_estimate: numerator < 0.0,
        });
    }
    check_gradient(grad_norm)?;
    Ok(PolyakStep {
        size: numerator / (m_f * grad_norm),
        below_estimate: false,
    })
}

/// `g(x) / ‖∇g(x)‖²`.
pub fn constraint_step(g_x: f64, grad_norm: f64) -> Result<f64> {
    check_gradient(grad_norm)?;
    Ok(g_x.max(0.0) / (grad_norm * grad_norm))
}

/// Comparator steps `(ε/‖∇f‖², 1/‖∇g‖)`. A norm of `None` skips that rule.
pub fn baseline_steps(
    epsilon: f64,
    grad_f_norm: Option<f64>,
    grad_g_norm: Option<f64>,
) -> Result<(Option<f64>, Option<f64>)> {
    let h_f = grad_f_norm
        .map(|n| check_gradient(n).map(|_| epsilon / (n * n)))
        .transpose()?;
    let h_g = grad_g_norm
        .map(|n| check_gradient(n).map(|_| 1.0 / n))
        .transpose()?;
    Ok((h_f, h_g))
}

fn check_gradient(norm: f64) -> Result<()> {
    if norm <= GRAD_TOLERANCE {
        Err(Error::ZeroGradient { norm })
    } else {
        Ok(())
    }
}

/// `γ·√radicand`; an exactly zero radicand saturates to 0.
fn shrink(gamma: f64, radicand: f64) -> Result<f64> {
    if radicand < 0.0 || radicand.is_nan() {
        return Err(Error::NonpositiveRadicand(radicand));
    }
    Ok(gamma * radicand.sqrt())
}

fn nonproductive_norm(grad_g_norm: Option<f64>) -> Result<f64> {
    let n = grad_g_norm.ok_or_else(|| {
        Error::InvalidParameter("nonproductive gamma update needs the constraint gradient norm".into())
    })?;
    check_gradient(n)?;
    Ok(n)
}

/// γ recursion of the ε-sharp scheme.
pub fn gamma_update_eps(
    gamma: f64,
    kind: StepKind,
    params: &ContractionParams,
    grad_g_norm: Option<f64>,
) -> Result<f64> {
    let a2 = params.alpha * params.alpha;
    let c = params.big_c;
    match kind {
        StepKind::Productive => shrink(gamma, 1.0 - a2 / (params.m_f * params.m_f) * (2.0 * c - c * c)),
        StepKind::Nonproductive => {
            let n = nonproductive_norm(grad_g_norm)?;
            shrink(gamma, 1.0 - a2 * (1.0 - gamma) / (n * n))
        }
    }
}

/// γ recursion of the conditional-sharp scheme.
pub fn gamma_update_cond(
    gamma: f64,
    kind: StepKind,
    params: &ContractionParams,
    grad_g_norm: Option<f64>,
) -> Result<f64> {
    let a2 = params.alpha * params.alpha;
    let c = params.big_c;
    match kind {
        StepKind::Productive => shrink(gamma, 1.0 - c / (2.0 - c) * a2 / (params.m_f * params.m_f)),
        StepKind::Nonproductive => {
            let n = nonproductive_norm(grad_g_norm)?;
            shrink(gamma, 1.0 - (1.0 - gamma) * c * c * a2 / (n * n))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateVariant {
    /// `1 − (α²/M_f²)(2C − C²)`, productive steps of the ε-sharp scheme.
    EpsProductive,
    /// `1 − (C/(2−C)) α²/M_f²`, productive steps of the conditional scheme.
    CondProductive,
    /// `1 − (α²/M²)(2C − C²)` with `M = max(M_f, M_g)`, one factor per iteration.
    EpsUniform,
    /// `1 − C² α²/M²` with `M = max(M_f, M_g)`, one factor per iteration.
    CondUniform,
}

/// Per-step contraction factor, required to lie in `[0, 1)`.
pub fn contraction_factor(params: &ContractionParams, variant: RateVariant) -> Result<f64> {
    let a2 = params.alpha * params.alpha;
    let c = params.big_c;
    let uniform = || {
        params
            .m_g
            .map(|g| g.max(params.m_f))
            .ok_or_else(|| Error::InvalidParameter("uniform rate needs M_g".into()))
    };
    let factor = match variant {
        RateVariant::EpsProductive => 1.0 - a2 / (params.m_f * params.m_f) * (2.0 * c - c * c),
        RateVariant::CondProductive => 1.0 - c / (2.0 - c) * a2 / (params.m_f * params.m_f),
        RateVariant::EpsUniform => {
            let m = uniform()?;
            1.0 - a2 / (m * m) * (2.0 * c - c * c)
        }
        RateVariant::CondUniform => {
            let m = uniform()?;
            1.0 - c * c * a2 / (m * m)
        }
    };
    if (0.0..1.0).contains(&factor) {
        Ok(factor)
    } else {
        Err(Error::FactorOutOfRange(factor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::new(xs.to_vec()).unwrap()
    }

    fn params(alpha: f64, m_f: f64, c: f64) -> ContractionParams {
        ContractionParams::new(alpha, m_f, None, c).unwrap()
    }

    #[test]
    fn v_f_cases() {
        assert_eq!(v_f(&v(&[0.0, 0.0]), &v(&[1.0, 2.0]), &v(&[0.0, 0.0])), 0.0);
        assert_eq!(v_f(&v(&[0.3, 0.1]), &v(&[1.0, 2.0]), &v(&[1.0, 2.0])), 0.0);
        let r = v_f(&v(&[0.6, 0.8]), &v(&[3.0, 4.0]), &v(&[0.0, 0.0]));
        assert!((r - 5.0).abs() < 1e-14);
    }

    #[test]
    fn polyak_cases() {
        assert_eq!(polyak_step(2.0, 1.0, 2.0, 1.0).unwrap().size, 0.5);
        assert_eq!(polyak_step(1.0, 1.0, 2.0, 1.0).unwrap().size, 0.0);
        let s = polyak_step(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(s.below_estimate && s.size == 0.0);
        assert!(matches!(
            polyak_step(2.0, 1.0, 1.0, 0.0),
            Err(Error::ZeroGradient { .. })
        ));
        // f = |x| at x = 1 with f̄ = 0 lands on the minimizer in one step
        let h = polyak_step(1.0, 0.0, 1.0, 1.0).unwrap().size;
        assert_eq!(1.0 - h * 1.0, 0.0);
    }

    #[test]
    fn constraint_and_baseline_cases() {
        assert_eq!(constraint_step(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(constraint_step(1.0, 2.0).unwrap(), 0.25);
        assert!(constraint_step(1e-300, 1.0).unwrap() < 1e-299);
        assert!(constraint_step(1.0, 1e-13).is_err());
        let (hf, hg) = baseline_steps(0.1, Some(2.0), Some(1.0)).unwrap();
        assert!((hf.unwrap() - 0.025).abs() < 1e-17);
        assert_eq!(hg, Some(1.0));
        assert_eq!(baseline_steps(1e-3, Some(1.0), None).unwrap().0, Some(1e-3));
    }

    #[test]
    fn gamma_eps_cases() {
        let g = gamma_update_eps(0.5, StepKind::Productive, &params(1.0, 1.0, 1.0), None).unwrap();
        assert_eq!(g, 0.0);
        let g = gamma_update_eps(0.5, StepKind::Nonproductive, &params(1.0, 1.0, 1.0), Some(2.0)).unwrap();
        assert!((g - 0.467707).abs() < 1e-6);
        let g = gamma_update_eps(0.8, StepKind::Productive, &params(1.0, 2.0, 1.0), None).unwrap();
        assert!((g - 0.692820).abs() < 1e-6);
    }

    #[test]
    fn gamma_cond_cases() {
        let g = gamma_update_cond(0.5, StepKind::Productive, &params(1.0, 1.0, 1.0), None).unwrap();
        assert_eq!(g, 0.0);
        let g = gamma_update_cond(0.5, StepKind::Nonproductive, &params(1.0, 1.0, 1.0), Some(2.0)).unwrap();
        assert!((g - 0.467707).abs() < 1e-6);
        let g = gamma_update_cond(0.9, StepKind::Productive, &params(1.0, 1.0, 0.5), None).unwrap();
        assert!((g - 0.734847).abs() < 1e-6);
    }

    #[test]
    fn negative_radicand_is_an_error() {
        let p = params(3.0, 1.0, 1.0);
        assert!(matches!(
            gamma_update_eps(0.5, StepKind::Productive, &p, None),
            Err(Error::NonpositiveRadicand(_))
        ));
    }

    #[test]
    fn productive_factors_coincide_at_unit_c() {
        let c: f64 = 1.0;
        assert_eq!(2.0 * c - c * c, c / (2.0 - c));
        let p = params(0.7, 1.3, 1.0);
        assert_eq!(
            contraction_factor(&p, RateVariant::EpsProductive).unwrap(),
            contraction_factor(&p, RateVariant::CondProductive).unwrap()
        );
    }

    #[test]
    fn contraction_cases() {
        assert_eq!(contraction_factor(&params(1.0, 1.0, 1.0), RateVariant::EpsProductive).unwrap(), 0.0);
        assert_eq!(contraction_factor(&params(1.0, 2.0, 1.0), RateVariant::CondProductive).unwrap(), 0.75);
        let p = ContractionParams::new(1.0, 1.0, Some(2.0), 0.5).unwrap();
        assert_eq!(contraction_factor(&p, RateVariant::CondUniform).unwrap(), 0.9375);
        assert!(matches!(
            contraction_factor(&params(2.0, 1.0, 1.0), RateVariant::CondProductive),
            Err(Error::FactorOutOfRange(_))
        ));
        assert!(contraction_factor(&params(1.0, 1.0, 1.0), RateVariant::CondUniform).is_err());
    }
}
