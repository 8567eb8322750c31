//! Distance objective with a known sharp minimum and a polyhedral constraint.

use super::{GeneratorSpec, ProblemFamily};
use crate::error::Result;
use crate::geometry::Projector;
use crate::oracle::Func;
use crate::problem::{GroundTruth, ProblemInstance};
use crate::rng::Stream;
use crate::vector::DenseVector;

#[derive(Debug, Default)]
pub struct SyntheticSharp;

impl ProblemFamily for SyntheticSharp {
    fn name(&self) -> &str {
        "synthetic-sharp"
    }

    fn generate(&self, spec: &GeneratorSpec) -> Result<ProblemInstance> {
        gen_synthetic_sharp(spec)
    }
}

/// `min ‖x − x⋆‖` s.t. `max_i ⟨a_i, x⟩ − b_i ≤ 0` over `B(0, r)`.
///
/// `x⋆` is uniform in `B(0, r/2)`, so `f* = 0`, `X_* = {x⋆}` and the minimum is
/// sharp with `α = 1 = M_f`. Row 0 separates the default start `x_0` from `x⋆`:
/// its hyperplane bisects the segment `[x⋆, x_0]`, so `x_0` is infeasible.
/// The remaining rows are strictly inactive on that segment. Row norms lie
/// in `[1, 4]`, with row 0 in `[3, 4]`.
pub fn gen_synthetic_sharp(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = Stream::new(spec.seed);
    let projector = Projector::origin_ball(n, spec.radius)?;
    let x0 = projector.project(&DenseVector::filled(n, 1.0 / (n as f64).sqrt()))?;
    let (x_star, dist0) = loop {
        let candidate = DenseVector::new(rng.in_ball(n, 0.5 * spec.radius))?;
        let d = x0.distance(&candidate);
        if d > 1e-3 * spec.radius {
            break (candidate, d);
        }
    };

    let mut constraints = Vec::with_capacity(spec.m);
    let scale0 = rng.uniform_in(3.0, 4.0);
    let row0: Vec<f64> = x0
        .iter()
        .zip(&x_star)
        .map(|(a, b)| scale0 * (a - b) / dist0)
        .collect();
    let at_star: f64 = row0.iter().zip(&x_star).map(|(a, b)| a * b).sum();
    constraints.push(Func::Affine {
        constant: -(at_star + 0.5 * scale0 * dist0),
        coef: row0,
    });
    let mut m_g = scale0;
    for _ in 1..spec.m {
        let norm = rng.uniform_in(1.0, 4.0);
        let row: Vec<f64> = rng.unit_vector(n).into_iter().map(|v| norm * v).collect();
        let at_star: f64 = row.iter().zip(&x_star).map(|(a, b)| a * b).sum();
        let at_start: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
        let margin = norm * rng.uniform_in(0.05, 0.5);
        constraints.push(Func::Affine {
            coef: row,
            constant: -(at_star.max(at_start) + margin),
        });
        m_g = m_g.max(norm);
    }

    let instance = ProblemInstance {
        dimension: n,
        objective: Func::Distance { center: x_star.clone() },
        constraints,
        projector,
        lipschitz_f: 1.0,
        lipschitz_g: Some(m_g),
        weak_convexity_mu: 0.0,
        ground_truth: Some(GroundTruth {
            f_star: 0.0,
            solutions: vec![x_star],
            sharpness_alpha: Some(1.0),
        }),
        default_start: None,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    #[test]
    fn solution_strictly_feasible_and_distance_matches() {
        for seed in 0..5 {
            let p = gen_synthetic_sharp(&GeneratorSpec::new("synthetic-sharp", 6, seed)).unwrap();
            let truth = p.ground_truth.as_ref().unwrap();
            let star = &truth.solutions[0];
            assert_eq!(p.objective.value(star).unwrap(), 0.0);
            assert!(p.max_constraint_value(star).unwrap() < 0.0);
            let x = DenseVector::filled(6, 0.1);
            assert_eq!(p.objective.value(&x).unwrap(), truth.distance(&x).unwrap());
            let x0 = p.projector.project(&p.start_point()).unwrap();
            assert!(p.max_constraint_value(&x0).unwrap() > 0.0);
        }
    }
}
