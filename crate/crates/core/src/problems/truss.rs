//! Linear objective over a ball under `2m` two-sided linear constraints.

use super::{reference_by_long_run, GeneratorSpec, ProblemFamily};
use crate::error::Result;
use crate::geometry::Projector;
use crate::oracle::Func;
use crate::problem::{GroundTruth, ProblemInstance};
use crate::rng::Stream;
use crate::vector::norm2;

#[derive(Debug, Default)]
pub struct TrussDesign;

impl ProblemFamily for TrussDesign {
    fn name(&self) -> &str {
        "truss"
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance> {
        gen_truss_problem(spec)
    }
}

/// `min −⟨α, x⟩` s.t. `±⟨a_i, x⟩ − 1 ≤ 0` over `B(0, r)`.
///
/// `α` is uniform on `[0, 1)` and `a_i ~ N(0, σ²)`. Constraints are stored
/// interleaved: `+a_1, −a_1, +a_2, …`. `f*` is estimated by
/// [`reference_by_long_run`] when `reference_budget > 0`.
pub fn gen_truss_problem(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = Stream::new(spec.seed);
    let alpha = rng.uniform_vec(n);
    let mut constraints = Vec::with_capacity(2 * spec.m);
    let mut m_g: f64 = 0.0;
    for _ in 0..spec.m {
        let row = rng.normal_vec(n, spec.noise_sigma);
        m_g = m_g.max(norm2(&row));
        constraints.push(Func::Affine {
            coef: row.clone(),
            constant: -1.0,
        });
        constraints.push(Func::Affine {
            coef: row.iter().map(|v| -v).collect(),
            constant: -1.0,
        });
    }
    let lipschitz_f = norm2(&alpha).max(f64::MIN_POSITIVE);
    let mut instance = ProblemInstance {
        dimension: n,
        objective: Func::Affine {
            coef: alpha.iter().map(|v| -v).collect(),
            constant: 0.0,
        },
        constraints,
        projector: Projector::origin_ball(n, spec.radius)?,
        lipschitz_f,
        lipschitz_g: Some(m_g.max(f64::MIN_POSITIVE)),
        weak_convexity_mu: 0.0,
        ground_truth: None,
        default_start: None,
    };
    instance.validate()?;
    if spec.reference_budget > 0 {
        let reference = reference_by_long_run(&instance, spec.reference_budget)?;
        instance.ground_truth = Some(GroundTruth {
            f_star: reference.f_star,
            solutions: Vec::new(),
            sharpness_alpha: None,
        });
    }
    Ok(instance)
}
