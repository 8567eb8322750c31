//! Problem instances, ground truth and the inexact optimal-value model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Projector;
use crate::oracle::{Func, Oracle, OracleOutput};
use crate::vector::DenseVector;

/// Known optimum of an instance, used for checking only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub f_star: f64,
    /// Finite representation of `X_*`; may be empty when only `f*` is known.
    pub solutions: Vec<DenseVector>,
    pub sharpness_alpha: Option<f64>,
}

impl GroundTruth {
    /// `min_{x_* ∈ X_*} ‖x − x_*‖`, when solutions are listed.
    pub fn distance(&self, x: &DenseVector) -> Option<f64> {
        self.solutions
            .iter()
            .map(|s| x.distance(s))
            .min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub dimension: usize,
    pub objective: Func,
    pub constraints: Vec<Func>,
    pub projector: Projector,
    pub lipschitz_f: f64,
    pub lipschitz_g: Option<f64>,
    pub weak_convexity_mu: f64,
    pub ground_truth: Option<GroundTruth>,
    /// Start used when the solver configuration gives none.
    #[serde(default)]
    pub default_start: Option<DenseVector>,
}

impl ProblemInstance {
    /// Instance without ground truth; `validate` runs on construction.
    pub fn new(
        objective: Func,
        constraints: Vec<Func>,
        projector: Projector,
        lipschitz_f: f64,
        dimension: usize,
    ) -> Result<Self> {
        let p = Self {
            dimension,
            objective,
            constraints,
            projector,
            lipschitz_f,
            lipschitz_g: None,
            weak_convexity_mu: 0.0,
            ground_truth: None,
            default_start: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_ground_truth(mut self, truth: GroundTruth) -> Result<Self> {
        self.ground_truth = Some(truth);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lipschitz_g(mut self, m_g: f64) -> Result<Self> {
        self.lipschitz_g = Some(m_g);
        self.validate()?;
        Ok(self)
    }

    /// Check dimensions, constants and the ground-truth contract.
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidParameter("at least one constraint is required".into()));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.lipschitz_f) || self.lipschitz_g.is_some_and(|m| !positive(m)) {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constants must be > 0 (M_f = {}, M_g = {:?})",
                self.lipschitz_f, self.lipschitz_g
            )));
        }
        if !(self.weak_convexity_mu.is_finite() && self.weak_convexity_mu >= 0.0) {
            return Err(Error::InvalidParameter("mu must be >= 0".into()));
        }
        self.projector.validate(Some(n))?;
        self.objective.check_dimension(n)?;
        for c in &self.constraints {
            c.check_dimension(n)?;
        }
        if let Some(start) = &self.default_start {
            start.check_dim(n)?;
        }
        if let Some(truth) = &self.ground_truth {
            if !truth.f_star.is_finite() {
                return Err(Error::InvalidParameter("f* must be finite".into()));
            }
            if truth.sharpness_alpha.is_some_and(|a| !positive(a)) {
                return Err(Error::InvalidParameter("alpha must be > 0".into()));
            }
            for s in &truth.solutions {
                s.check_dim(n)?;
                let f = self.objective.value(s)?;
                if (f - truth.f_star).abs() > 1e-12 * truth.f_star.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "listed solution has f = {f}, expected f* = {}",
                        truth.f_star
                    )));
                }
                let g = self.max_constraint_value(s)?;
                if g > 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "listed solution violates the constraints (g = {g})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn evaluate_objective(&self, x: &DenseVector) -> Result<OracleOutput> {
        self.objective.evaluate(x)
    }

    /// `g(x) = max_i g_i(x)`.
    pub fn max_constraint_value(&self, x: &DenseVector) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for c in &self.constraints {
            best = best.max(c.value(x)?);
        }
        Ok(best)
    }

    /// `g(x)` together with the lowest index attaining it.
    pub fn max_constraint(&self, x: &DenseVector) -> Result<(usize, f64)> {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, c) in self.constraints.iter().enumerate() {
            let v = c.value(x)?;
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(best)
    }

    /// `(1/√n, …, 1/√n)` unless the instance overrides it; not yet projected.
    pub fn start_point(&self) -> DenseVector {
        self.default_start
            .clone()
            .unwrap_or_else(|| DenseVector::filled(self.dimension, 1.0 / (self.dimension as f64).sqrt()))
    }

    pub fn distance_to_solution(&self, x: &DenseVector) -> Option<f64> {
        self.ground_truth.as_ref().and_then(|t| t.distance(x))
    }
}

/// The estimate `f̄` of `f*` with its quality constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FBarModel {
    pub f_bar: f64,
    pub big_c: f64,
    pub f_star: Option<f64>,
}

impl FBarModel {
    pub fn new(f_bar: f64, big_c: f64, f_star: Option<f64>) -> Result<Self> {
        if !f_bar.is_finite() {
            return Err(Error::InvalidParameter(format!("f_bar must be finite, got {f_bar}")));
        }
        if !(big_c > 0.0 && big_c <= 1.0) {
            return Err(Error::InvalidParameter(format!("C must lie in (0, 1], got {big_c}")));
        }
        Ok(Self { f_bar, big_c, f_star })
    }

    /// `f̄ = f*`, for which `c(x) ≡ 1`.
    pub fn exact(f_star: f64) -> Self {
        Self {
            f_bar: f_star,
            big_c: 1.0,
            f_star: Some(f_star),
        }
    }

    /// Whether `C ≤ c ≤ 2 − C`.
    pub fn in_window(&self, c: f64) -> bool {
        c >= self.big_c && c <= 2.0 - self.big_c
    }
}

/// `c(x) = (f(x) − f̄)/(f(x) − f*)`.
pub fn effective_c(f_x: f64, f_bar: f64, f_star: f64) -> Result<f64> {
    let denominator = f_x - f_star;
    if denominator.abs() < 1e-15 * f_x.abs().max(1.0) {
        return Err(Error::DegenerateRatio { f_x, f_star });
    }
    Ok((f_x - f_bar) / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_c_cases() {
        assert_eq!(effective_c(2.0, 1.0, 0.0).unwrap(), 0.5);
        assert_eq!(effective_c(2.0, 0.0, 0.0).unwrap(), 1.0);
        let c = effective_c(1.0, 1.0, 0.0).unwrap();
        assert_eq!(c, 0.0);
        assert!(!FBarModel::new(1.0, 1e-3, Some(0.0)).unwrap().in_window(c));
        assert!(matches!(
            effective_c(1.0, 0.5, 1.0),
            Err(Error::DegenerateRatio { .. })
        ));
    }

    #[test]
    fn fbar_rejects_bad_c() {
        assert!(FBarModel::new(0.0, 0.0, None).is_err());
        assert!(FBarModel::new(0.0, 1.5, None).is_err());
        assert!(FBarModel::new(f64::NAN, 0.5, None).is_err());
    }

    #[test]
    fn ground_truth_contract_enforced() {
        let p = ProblemInstance::new(
            Func::abs_1d(0.0),
            vec![Func::affine_1d(1.0, -10.0)],
            Projector::WholeSpace,
            1.0,
            1,
        )
        .unwrap();
        let good = GroundTruth {
            f_star: 0.0,
            solutions: vec![DenseVector::zeros(1)],
            sharpness_alpha: Some(1.0),
        };
        assert!(p.clone().with_ground_truth(good).is_ok());
        let wrong_value = GroundTruth {
            f_star: 1.0,
            solutions: vec![DenseVector::zeros(1)],
            sharpness_alpha: None,
        };
        assert!(p.clone().with_ground_truth(wrong_value).is_err());
        let infeasible = GroundTruth {
            f_star: 20.0,
            solutions: vec![DenseVector::filled(1, 20.0)],
            sharpness_alpha: None,
        };
        assert!(p.with_ground_truth(infeasible).is_err());
    }
}
