//! p-norm minimization under posynomial constraints.

use super::{GeneratorSpec, ProblemFamily};
use crate::error::Result;
use crate::geometry::Projector;
use crate::oracle::Func;
use crate::problem::{GroundTruth, ProblemInstance};
use crate::rng::Stream;
use crate::vector::DenseVector;

/// Exponent rows with every entry below this are redrawn.
const MIN_EXPONENT: f64 = 1e-6;

#[derive(Debug, Default)]
pub struct GeometricProgram;

impl ProblemFamily for GeometricProgram {
    fn name(&self) -> &str {
        "geometric"
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance> {
        gen_geometric_program(spec)
    }
}

/// `min ‖x‖_p` s.t. `a_i ∏ x_j^{α_ij} − b_i ≤ 0` over the positive part of a ball.
///
/// Coefficients `a_i ∈ (0, 1]` and exponents `α_ij ∈ [0, 1)` are uniform. The
/// offsets are `b_i = |N(0, 1)|`: every monomial vanishes at the origin, so
/// nonnegative offsets are exactly what makes `f* = 0` the optimum.
pub fn gen_geometric_program(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = Stream::new(spec.seed);
    let constraints = (0..spec.m)
        .map(|_| {
            let coefficient = rng.uniform_open_closed();
            let exponents = loop {
                let row = rng.uniform_vec(n);
                if row.iter().any(|e| *e >= MIN_EXPONENT) {
                    break row;
                }
            };
            let offset = rng.normal().abs();
            Func::Posynomial {
                coefficient,
                exponents,
                offset,
            }
        })
        .collect();
    // ‖x‖_p ≤ n^{max(0, 1/p − 1/2)} ‖x‖₂
    let lipschitz_f = (n as f64).powf((1.0 / spec.p - 0.5).max(0.0));
    let instance = ProblemInstance {
        dimension: n,
        objective: Func::PNorm { p: spec.p },
        constraints,
        projector: Projector::nonneg_ball(spec.radius, spec.floor)?,
        lipschitz_f,
        lipschitz_g: None,
        weak_convexity_mu: 0.0,
        ground_truth: Some(GroundTruth {
            f_star: 0.0,
            solutions: vec![DenseVector::zeros(n)],
            sharpness_alpha: None,
        }),
        default_start: None,
    };
    instance.validate()?;
    Ok(instance)
}
