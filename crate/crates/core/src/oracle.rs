//! First-order oracles: a value and one subgradient per query point.
//!
//! Oracles are pure functions of the query point. The closed set of
//! serializable function families lives in [`Func`]; anything else can be
//! plugged in through [`Func::Custom`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{norm2, DenseVector};

/// Value and subgradient returned by an oracle query.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub value: f64,
    pub subgradient: DenseVector,
}

impl OracleOutput {
    pub fn new(value: f64, subgradient: Vec<f64>) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Oracle(format!("non-finite value {value}")));
        }
        let subgradient = DenseVector::new(subgradient)
            .map_err(|e| Error::Oracle(format!("subgradient: {e}")))?;
        Ok(Self { value, subgradient })
    }
}

/// A real function with a subgradient oracle.
pub trait Oracle: Send + Sync + fmt::Debug {
    fn evaluate(&self, x: &DenseVector) -> Result<OracleOutput>;

    /// Value only. Implementations override this when the subgradient is
    /// expensive relative to the value.
    fn value(&self, x: &DenseVector) -> Result<f64> {
        Ok(self.evaluate(x)?.value)
    }

    /// True when `x` lies within `tol` of a point where the function is not
    /// differentiable. Used to skip finite-difference checks.
    fn near_kink(&self, _x: &DenseVector, _tol: f64) -> bool {
        false
    }
}

/// Serializable function families used by the benchmark generators.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Func {
    /// `‖x − center‖₂`.
    Distance { center: DenseVector },
    /// `‖x‖_p`.
    PNorm { p: f64 },
    /// `coefficient · ∏ x_j^{exponents_j} − offset`, defined for `x > 0`.
    Posynomial {
        coefficient: f64,
        exponents: Vec<f64>,
        offset: f64,
    },
    /// `‖x − near‖₂ / ‖x − far‖₂`.
    DistanceRatio { near: DenseVector, far: DenseVector },
    /// `‖x‖₂ + max(⟨−direction, x⟩, ‖x‖₂) − offset`.
    NormCone { direction: DenseVector, offset: f64 },
    /// `⟨coef, x⟩ + constant`.
    Affine { coef: Vec<f64>, constant: f64 },
    /// `−√⟨weights, x⟩`, defined where the inner product is positive.
    NegSqrtLinear { weights: DenseVector },
    /// `Σ x_i log(x_i / reference_i) − x_i + reference_i − budget`.
    GeneralizedKl { reference: DenseVector, budget: f64 },
    /// `factor · inner(x)`.
    Scaled { factor: f64, inner: Box<Func> },
    /// Arbitrary user oracle; not serializable.
    #[serde(skip)]
    Custom(Arc<dyn Oracle>),
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Func::Distance { center } => write!(f, "Distance(n={})", center.len()),
            Func::PNorm { p } => write!(f, "PNorm(p={p})"),
            Func::Posynomial { exponents, .. } => write!(f, "Posynomial(n={})", exponents.len()),
            Func::DistanceRatio { near, .. } => write!(f, "DistanceRatio(n={})", near.len()),
            Func::NormCone { direction, .. } => write!(f, "NormCone(n={})", direction.len()),
            Func::Affine { coef, constant } => {
                write!(f, "Affine(n={}, constant={constant})", coef.len())
            }
            Func::NegSqrtLinear { weights } => write!(f, "NegSqrtLinear(n={})", weights.len()),
            Func::GeneralizedKl { budget, .. } => write!(f, "GeneralizedKl(budget={budget})"),
            Func::Scaled { factor, inner } => write!(f, "Scaled({factor}, {inner:?})"),
            Func::Custom(inner) => write!(f, "Custom({inner:?})"),
        }
    }
}

impl Func {
    /// `|x − c|` on the real line, as a one-dimensional distance.
    pub fn abs_1d(center: f64) -> Func {
        Func::Distance {
            center: DenseVector::filled(1, center),
        }
    }

    /// `slope · x + constant` on the real line.
    pub fn affine_1d(slope: f64, constant: f64) -> Func {
        Func::Affine {
            coef: vec![slope],
            constant,
        }
    }

    pub fn custom(oracle: impl Oracle + 'static) -> Func {
        Func::Custom(Arc::new(oracle))
    }

    fn expected_dim(&self) -> Option<usize> {
        match self {
            Func::Distance { center } => Some(center.len()),
            Func::Posynomial { exponents, .. } => Some(exponents.len()),
            Func::DistanceRatio { near, .. } => Some(near.len()),
            Func::NormCone { direction, .. } => Some(direction.len()),
            Func::Affine { coef, .. } => Some(coef.len()),
            Func::NegSqrtLinear { weights } => Some(weights.len()),
            Func::GeneralizedKl { reference, .. } => Some(reference.len()),
            Func::Scaled { inner, .. } => inner.expected_dim(),
            Func::PNorm { .. } | Func::Custom(_) => None,
        }
    }

    /// Reject a function whose coefficient arrays do not live in ℝⁿ.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        match self.expected_dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch {
                expected: n,
                actual: d,
            }),
            _ => Ok(()),
        }
    }

    fn check(&self, x: &DenseVector) -> Result<()> {
        match self.expected_dim() {
            Some(n) => x.check_dim(n),
            None => Ok(()),
        }
    }
}

fn unit_or_zero(diff: &[f64], norm: f64) -> Vec<f64> {
    if norm > 0.0 {
        diff.iter().map(|d| d / norm).collect()
    } else {
        vec![0.0; diff.len()]
    }
}

fn pnorm_parts(x: &[f64], p: f64) -> (f64, Vec<f64>) {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return (0.0, vec![0.0; x.len()]);
    }
    let inner: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    let scaled_norm = inner.powf(1.0 / p);
    let value = scale * scaled_norm;
    // ∂‖x‖_p/∂x_i = sign(x_i)|x_i|^{p−1}/‖x‖_p^{p−1}, scale-invariant
    let denom = scaled_norm.powf(p - 1.0);
    let grad = x
        .iter()
        .map(|v| v.signum() * (v.abs() / scale).powf(p - 1.0) / denom)
        .map(|g| if g.is_nan() { 0.0 } else { g })
        .collect();
    (value, grad)
}

fn monomial(coefficient: f64, exponents: &[f64], x: &[f64]) -> f64 {
    coefficient
        * exponents
            .iter()
            .zip(x)
            .map(|(e, v)| v.powf(*e))
            .product::<f64>()
}

impl Oracle for Func {
    fn evaluate(&self, x: &DenseVector) -> Result<OracleOutput> {
        self.check(x)?;
        let xs = x.as_slice();
        match self {
            Func::Distance { center } => {
                let diff: Vec<f64> = xs.iter().zip(center).map(|(a, c)| a - c).collect();
                let norm = norm2(&diff);
                OracleOutput::new(norm, unit_or_zero(&diff, norm))
            }
            Func::PNorm { p } => {
                let (value, grad) = pnorm_parts(xs, *p);
                OracleOutput::new(value, grad)
            }
            Func::Posynomial {
                coefficient,
                exponents,
                offset,
            } => {
                if let Some(j) = xs.iter().position(|v| *v <= 0.0) {
                    return Err(Error::Oracle(format!(
                        "posynomial requires x > 0, got x[{j}] = {}",
                        xs[j]
                    )));
                }
                let mono = monomial(*coefficient, exponents, xs);
                let grad = exponents.iter().zip(xs).map(|(e, v)| e * mono / v).collect();
                OracleOutput::new(mono - offset, grad)
            }
            Func::DistanceRatio { near, far } => {
                let dn: Vec<f64> = xs.iter().zip(near).map(|(a, c)| a - c).collect();
                let df: Vec<f64> = xs.iter().zip(far).map(|(a, c)| a - c).collect();
                let (nn, nf) = (norm2(&dn), norm2(&df));
                if nf == 0.0 {
                    return Err(Error::Oracle("distance ratio undefined at the far point".into()));
                }
                let value = nn / nf;
                // quotient rule: u/(‖x−a‖‖x−b‖) − ‖x−a‖ v/‖x−b‖³
                let un = unit_or_zero(&dn, nn);
                let grad = un
                    .iter()
                    .zip(&df)
                    .map(|(u, v)| u / nf - value * v / (nf * nf))
                    .collect();
                OracleOutput::new(value, grad)
            }
            Func::NormCone { direction, offset } => {
                let norm = x.norm();
                let lin = -x.dot(direction);
                let unit = unit_or_zero(xs, norm);
                let grad = if lin > norm {
                    unit.iter().zip(direction).map(|(u, a)| u - a).collect()
                } else if norm > 0.0 {
                    unit.iter().map(|u| 2.0 * u).collect()
                } else {
                    // origin: 0 ∈ ∂‖·‖ and −a ∈ ∂max(⟨−a,·⟩, ‖·‖)
                    direction.iter().map(|a| -a).collect()
                };
                OracleOutput::new(norm + lin.max(norm) - offset, grad)
            }
            Func::Affine { coef, constant } => {
                let value = coef.iter().zip(xs).map(|(c, v)| c * v).sum::<f64>() + constant;
                OracleOutput::new(value, coef.clone())
            }
            Func::NegSqrtLinear { weights } => {
                let inner = x.dot(weights);
                if inner <= 0.0 {
                    return Err(Error::Oracle(format!(
                        "sqrt objective requires <a, x> > 0, got {inner:e}"
                    )));
                }
                let root = inner.sqrt();
                let grad = weights.iter().map(|w| -w / (2.0 * root)).collect();
                OracleOutput::new(-root, grad)
            }
            Func::GeneralizedKl { reference, budget } => {
                if let Some(j) = xs.iter().position(|v| *v <= 0.0) {
                    return Err(Error::Oracle(format!(
                        "KL divergence requires x > 0, got x[{j}] = {}",
                        xs[j]
                    )));
                }
                let mut value = -budget;
                let mut grad = Vec::with_capacity(xs.len());
                for (v, a) in xs.iter().zip(reference) {
                    let log_ratio = (v / a).ln();
                    value += v * log_ratio - v + a;
                    grad.push(log_ratio);
                }
                OracleOutput::new(value, grad)
            }
            Func::Scaled { factor, inner } => {
                let out = inner.evaluate(x)?;
                OracleOutput::new(
                    factor * out.value,
                    out.subgradient.iter().map(|g| factor * g).collect(),
                )
            }
            Func::Custom(inner) => inner.evaluate(x),
        }
    }

    fn value(&self, x: &DenseVector) -> Result<f64> {
        self.check(x)?;
        match self {
            Func::Posynomial {
                coefficient,
                exponents,
                offset,
            } => {
                // value-only path also admits boundary points x_j = 0
                let value = monomial(*coefficient, exponents, x.as_slice()) - offset;
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::Oracle(format!("non-finite posynomial value {value}")))
                }
            }
            Func::Affine { coef, constant } => {
                Ok(coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + constant)
            }
            Func::Custom(inner) => inner.value(x),
            _ => Ok(self.evaluate(x)?.value),
        }
    }

    fn near_kink(&self, x: &DenseVector, tol: f64) -> bool {
        match self {
            Func::Distance { center } => x.distance(center) < tol,
            Func::PNorm { .. } => x.iter().any(|v| v.abs() < tol),
            Func::DistanceRatio { near, far } => x.distance(near) < tol || x.distance(far) < tol,
            Func::NormCone { direction, .. } => {
                let norm = x.norm();
                norm < tol || (norm + x.dot(direction)).abs() < tol
            }
            Func::Scaled { inner, .. } => inner.near_kink(x, tol),
            Func::Custom(inner) => inner.near_kink(x, tol),
            _ => false,
        }
    }
}
