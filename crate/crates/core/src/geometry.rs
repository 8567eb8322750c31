//! Exact Euclidean projections onto the feasible sets `Q`.
//!
//! Solvers touch `Q` only through [`Projector::project`]; they never test
//! membership themselves. Every projected point satisfies the set's defining
//! inequalities exactly in floating point, which makes projection bitwise
//! idempotent for every kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::vector::{norm2, DenseVector};

/// Default floor η keeping posynomial and logarithmic oracles defined.
pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projector {
    WholeSpace,
    Ball {
        center: DenseVector,
        radius: f64,
    },
    /// `{x : x ≥ floor, ‖x‖₂ ≤ radius}`, the positive part of the origin ball.
    NonnegBall {
        radius: f64,
        floor: f64,
    },
    /// Componentwise bounds; infinite bounds are allowed and serialize as `null`.
    Box {
        #[serde(with = "lower_bounds")]
        lower: Vec<f64>,
        #[serde(with = "upper_bounds")]
        upper: Vec<f64>,
    },
}

impl Projector {
    pub fn ball(center: DenseVector, radius: f64) -> Result<Self> {
        let p = Projector::Ball { center, radius };
        p.validate(None)?;
        Ok(p)
    }

    pub fn origin_ball(n: usize, radius: f64) -> Result<Self> {
        Self::ball(DenseVector::zeros(n), radius)
    }

    pub fn nonneg_ball(radius: f64, floor: f64) -> Result<Self> {
        let p = Projector::NonnegBall { radius, floor };
        p.validate(None)?;
        Ok(p)
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let p = Projector::Box { lower, upper };
        p.validate(None)?;
        Ok(p)
    }

    /// `{x : x ≥ floor}` in ℝⁿ.
    pub fn lower_orthant(n: usize, floor: f64) -> Result<Self> {
        Self::boxed(vec![floor; n], vec![f64::INFINITY; n])
    }

    /// Check the kind's invariants, and the dimension when `n` is given.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Projector::WholeSpace => {}
            Projector::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("ball radius must be > 0, got {radius}"));
                }
                if let Some(n) = n {
                    center.check_dim(n)?;
                }
            }
            Projector::NonnegBall { radius, floor } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("ball radius must be > 0, got {radius}"));
                }
                if !(floor.is_finite() && *floor >= 0.0) {
                    return bad(format!("floor must be >= 0, got {floor}"));
                }
                if let Some(n) = n {
                    if floor * (n as f64).sqrt() >= *radius {
                        return bad(format!(
                            "floor {floor} * sqrt({n}) must be below radius {radius}"
                        ));
                    }
                }
            }
            Projector::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lower.len(),
                        actual: upper.len(),
                    });
                }
                if let Some(n) = n {
                    if lower.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            actual: lower.len(),
                        });
                    }
                }
                for (i, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if lo.is_nan() || hi.is_nan() || lo > hi || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY {
                        return bad(format!("box bounds at {i} invalid: [{lo}, {hi}]"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Euclidean nearest point of `Q`.
    pub fn project(&self, x: &DenseVector) -> Result<DenseVector> {
        match self {
            Projector::WholeSpace => Ok(x.clone()),
            Projector::Ball { center, radius } => {
                x.check_dim(center.len())?;
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let dist = norm2(&diff);
                if dist <= *radius {
                    return Ok(x.clone());
                }
                let mut factor = radius / dist;
                loop {
                    let out: Vec<f64> = center.iter().zip(&diff).map(|(c, d)| c + factor * d).collect();
                    let check: f64 = norm2(&out.iter().zip(center).map(|(o, c)| o - c).collect::<Vec<_>>());
                    if check <= *radius {
                        return DenseVector::new(out);
                    }
                    factor *= 1.0 - f64::EPSILON;
                }
            }
            Projector::NonnegBall { radius, floor } => {
                project_nonneg_ball(x.as_slice(), *radius, *floor).and_then(DenseVector::new)
            }
            Projector::Box { lower, upper } => {
                x.check_dim(lower.len())?;
                DenseVector::new(
                    x.iter()
                        .zip(lower.iter().zip(upper))
                        .map(|(v, (lo, hi))| v.max(*lo).min(*hi))
                        .collect(),
                )
            }
        }
    }

    /// Membership up to `tol` in each defining inequality.
    pub fn contains(&self, x: &DenseVector, tol: f64) -> bool {
        match self {
            Projector::WholeSpace => true,
            Projector::Ball { center, radius } => x.distance(center) <= radius + tol,
            Projector::NonnegBall { radius, floor } => {
                x.norm() <= radius + tol && x.iter().all(|v| *v >= floor - tol)
            }
            Projector::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol),
        }
    }

    /// Diameter of `Q`, when bounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            Projector::WholeSpace => None,
            Projector::Ball { radius, .. } => Some(2.0 * radius),
            // two points of the positive quarter-ball are at most √2·r apart
            Projector::NonnegBall { radius, .. } => Some(std::f64::consts::SQRT_2 * radius),
            Projector::Box { lower, upper } => {
                let widths: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                let d = norm2(&widths);
                d.is_finite().then_some(d)
            }
        }
    }

    /// A uniform sample from `Q` (bounded kinds only).
    pub fn sample(&self, n: usize, rng: &mut Stream) -> Result<DenseVector> {
        match self {
            Projector::WholeSpace => Err(Error::UnboundedDomain),
            Projector::Ball { center, radius } => {
                let p = rng.in_ball(n, *radius);
                DenseVector::new(p.iter().zip(center).map(|(a, c)| a + c).collect())
            }
            Projector::NonnegBall { radius, floor } => loop {
                let p: Vec<f64> = rng.in_ball(n, *radius).into_iter().map(f64::abs).collect();
                if p.iter().all(|v| *v >= *floor) {
                    return DenseVector::new(p);
                }
            },
            Projector::Box { lower, upper } => {
                if lower.iter().chain(upper).any(|b| !b.is_finite()) {
                    return Err(Error::UnboundedDomain);
                }
                DenseVector::new(
                    lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| rng.uniform_in(*l, *u))
                        .collect(),
                )
            }
        }
    }
}

/// Projection onto `{x ≥ floor} ∩ B(0, radius)`.
///
/// KKT gives `x_i = max(floor, s·y_i)` for a scale `s ∈ (0, 1]` chosen so the
/// norm equals the radius whenever the clamp alone lands outside the ball.
/// With `floor = 0` this reduces to clamp-then-scale.
fn project_nonneg_ball(y: &[f64], radius: f64, floor: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let clamp = |s: f64| -> Vec<f64> { y.iter().map(|v| (s * v).max(floor)).collect() };
    let clamped = clamp(1.0);
    if norm2(&clamped) <= radius {
        return Ok(clamped);
    }
    if floor * (n as f64).sqrt() >= radius {
        return Err(Error::InvalidParameter(format!(
            "floor {floor} * sqrt({n}) must be below radius {radius}"
        )));
    }
    // components above the floor, largest first; the active set at the
    // solution is a prefix of this order
    let mut order: Vec<usize> = (0..n).filter(|&i| y[i] > floor).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    let r2 = radius * radius;
    let f2 = floor * floor;
    let mut sum_sq = 0.0;
    let mut scale = 1.0;
    for (k, &i) in order.iter().enumerate() {
        sum_sq += y[i] * y[i];
        let active = k + 1;
        let s = ((r2 - (n - active) as f64 * f2) / sum_sq).sqrt();
        let next_inactive = order.get(k + 1).is_none_or(|&j| s * y[j] <= floor);
        if s * y[i] > floor && next_inactive {
            scale = s;
            break;
        }
        scale = s;
    }
    let mut out = clamp(scale);
    while norm2(&out) > radius {
        scale *= 1.0 - f64::EPSILON;
        out = clamp(scale);
    }
    Ok(out)
}

mod lower_bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|b| b.is_finite().then_some(*b)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|b| b.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}

mod upper_bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|b| b.is_finite().then_some(*b)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|b| b.unwrap_or(f64::INFINITY)).collect())
    }
}
