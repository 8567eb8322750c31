//! Ratio of distances to two points, under a norm-cone or a linear-max constraint.

use super::{GeneratorSpec, ProblemFamily};
use crate::error::{Error, Result};
use crate::geometry::Projector;
use crate::oracle::{Func, Oracle};
use crate::problem::{GroundTruth, ProblemInstance};
use crate::rng::Stream;
use crate::vector::DenseVector;

/// Distance from the near point `a = 0` to the far point `b`.
const FAR_DISTANCE: f64 = 2.0;

/// Substreams tried before giving up on a feasible origin.
const MAX_ATTEMPTS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioVariant {
    /// `‖x‖ + max(⟨−c, x⟩, ‖x‖) − d`.
    NormCone,
    /// `max_i ⟨c_i, x⟩ − d_i` over `m` rows.
    LinearMax,
}

impl RatioVariant {
    pub fn parse(name: Option<&str>) -> Result<Self> {
        match name.unwrap_or("norm-cone") {
            "norm-cone" => Ok(RatioVariant::NormCone),
            "linear-max" => Ok(RatioVariant::LinearMax),
            other => Err(Error::UnknownName {
                kind: "variant",
                name: format!("ratio/{other}"),
            }),
        }
    }
}

#[derive(Debug, Default)]
pub struct RatioDistances;

impl ProblemFamily for RatioDistances {
    fn name(&self) -> &str {
        "ratio"
    }

    fn variants(&self) -> &[&str] {
        &["norm-cone", "linear-max"]
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance> {
        gen_ratio_problem(spec)
    }
}

/// `min ‖x‖/‖x − b‖` over the ball `B(0, r)`, `r < 2`, with `‖b‖ = 2`.
///
/// The objective's gradient norm is at most `(‖x‖ + ‖x−b‖)/‖x−b‖²`, which on
/// the ball peaks at `x = r·b/2`, giving the exact constant `M_f = 2/(2−r)²`.
pub fn gen_ratio_problem(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let variant = RatioVariant::parse(spec.variant.as_deref())?;
    if spec.radius >= FAR_DISTANCE {
        return Err(Error::InvalidParameter(format!(
            "ratio family needs radius < {FAR_DISTANCE}, got {}",
            spec.radius
        )));
    }
    let n = spec.n;
    let origin = DenseVector::zeros(n);
    let mut best_g = f64::INFINITY;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = Stream::substream(spec.seed, attempt);
        let far: Vec<f64> = rng.unit_vector(n).into_iter().map(|v| FAR_DISTANCE * v).collect();
        let constraints = match variant {
            RatioVariant::NormCone => vec![Func::NormCone {
                direction: DenseVector::new(rng.uniform_vec(n))?,
                offset: rng.uniform(),
            }],
            RatioVariant::LinearMax => (0..spec.m)
                .map(|_| Func::Affine {
                    coef: rng.uniform_vec(n),
                    constant: -rng.uniform(),
                })
                .collect(),
        };
        let mut g0 = f64::NEG_INFINITY;
        for c in &constraints {
            g0 = g0.max(c.value(&origin)?);
        }
        if g0 > 0.0 {
            best_g = best_g.min(g0);
            continue;
        }
        let start = match variant {
            RatioVariant::NormCone => None,
            RatioVariant::LinearMax => Some(DenseVector::filled(n, -1.0 / (n as f64).sqrt())),
        };
        let gap = FAR_DISTANCE - spec.radius;
        let instance = ProblemInstance {
            dimension: n,
            objective: Func::DistanceRatio {
                near: origin.clone(),
                far: DenseVector::new(far)?,
            },
            constraints,
            projector: Projector::origin_ball(n, spec.radius)?,
            lipschitz_f: 2.0 / (gap * gap),
            lipschitz_g: None,
            weak_convexity_mu: 0.0,
            ground_truth: Some(GroundTruth {
                f_star: 0.0,
                solutions: vec![origin],
                sharpness_alpha: None,
            }),
            default_start: start,
        };
        instance.validate()?;
        return Ok(instance);
    }
    Err(Error::NoFeasiblePoint { best_g })
}
