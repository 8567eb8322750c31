use sharp_subgrad::analysis::{check_projection_inequality, estimate_sharpness, replay_steps, ReplayStep};
use sharp_subgrad::problems::{generate, GeneratorSpec};
use sharp_subgrad::solvers::{list_methods, run};
use sharp_subgrad::{Aggregation, FBarModel, Oracle, ProblemInstance, SolverConfig, StepKind};

fn instances() -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for (family, variant) in [
        ("geometric", None),
        ("ratio", Some("norm-cone")),
        ("ratio", Some("linear-max")),
        ("truss", None),
        ("kl", None),
        ("synthetic-sharp", None),
    ] {
        for seed in 0..3 {
            let mut spec = GeneratorSpec::new(family, 12, seed).with_m(6);
            spec.variant = variant.map(String::from);
            spec.reference_budget = 2000;
            out.push(generate(&spec).unwrap());
        }
    }
    out
}

fn config(problem: &ProblemInstance, algorithm: &str, iters: usize) -> SolverConfig {
    let f_star = problem.ground_truth.as_ref().unwrap().f_star;
    let mut c = SolverConfig::new(algorithm, 1e-3, FBarModel::exact(f_star), iters);
    c.record_points = true;
    c
}

#[test]
fn every_method_partitions_iterations_and_stays_in_q() {
    for problem in instances() {
        for name in list_methods() {
            let trace = run(&problem, &config(&problem, &name, 150)).unwrap();
            assert!(trace.partition_is_exact(), "{name}");
            for x in trace.points().unwrap() {
                assert!(problem.projector.contains(x, 1e-12), "{name}: iterate left Q");
            }
            for r in &trace.records {
                assert!(r.step_size >= 0.0 && r.step_size.is_finite());
                if r.kind == StepKind::Nonproductive {
                    assert!(r.g_value > 1e-3 || name == "cond");
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for problem in instances().into_iter().step_by(3) {
        let a = run(&problem, &config(&problem, "eps", 100)).unwrap();
        let b = run(&problem, &config(&problem, "eps", 100)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_point, b.final_point);
    }
}

#[test]
fn generation_is_reproducible_and_serializable() {
    let spec = GeneratorSpec::new("geometric", 8, 4).with_m(3);
    let a = generate(&spec).unwrap();
    let text = serde_json::to_string(&a).unwrap();
    let b: ProblemInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(text, serde_json::to_string(&generate(&spec).unwrap()).unwrap());
    let x = a.start_point();
    assert_eq!(a.objective.value(&x).unwrap(), b.objective.value(&x).unwrap());
    assert_eq!(a.max_constraint_value(&x).unwrap(), b.max_constraint_value(&x).unwrap());
}

#[test]
fn exact_distance_never_increases_on_sharp_instances() {
    for seed in 0..5 {
        let problem = generate(&GeneratorSpec::new("synthetic-sharp", 15, seed)).unwrap();
        for name in ["eps", "cond"] {
            let trace = run(&problem, &config(&problem, name, 200)).unwrap();
            let dists: Vec<f64> = trace
                .points()
                .unwrap()
                .iter()
                .map(|x| problem.distance_to_solution(x).unwrap())
                .collect();
            for w in dists.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "{name} seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn replay_accepts_recorded_steps_and_rejects_tampering() {
    for problem in instances() {
        let trace = run(&problem, &config(&problem, "eps", 120)).unwrap();
        let steps: Vec<ReplayStep> = trace
            .records
            .iter()
            .map(|r| ReplayStep {
                kind: r.kind,
                step_size: r.step_size,
                constraint_index: r.constraint_index,
            })
            .collect();
        let points: Vec<_> = trace.points().unwrap().into_iter().cloned().collect();
        let mut refs = problem.ground_truth.as_ref().unwrap().solutions.clone();
        refs.push(points[0].clone());
        let report = replay_steps(&problem, &steps, &points, &refs, 1e-9).unwrap();
        assert!(report.passed(), "{:?}", report.failures.first());

        if let Some(k) = steps.iter().position(|s| s.step_size > 1e-6) {
            let mut bad = steps.clone();
            bad[k].step_size = 3.0 * bad[k].step_size + 0.5;
            let report = replay_steps(&problem, &bad, &points, &refs, 1e-9).unwrap();
            assert!(!report.passed());
        }
    }
}

#[test]
fn projection_inequality_hand_example_with_clipping() {
    use sharp_subgrad::DenseVector;
    let x = DenseVector::new(vec![1.0]).unwrap();
    let x_next = DenseVector::new(vec![0.5]).unwrap();
    let x_ref = DenseVector::new(vec![0.5]).unwrap();
    let grad = DenseVector::new(vec![1.0]).unwrap();
    let check = check_projection_inequality(&x, &x_next, &x_ref, 1.0, &grad, 1e-12);
    assert!(check.holds);
}

#[test]
fn first_violated_never_evaluates_more_than_max() {
    for problem in instances() {
        let mut first = config(&problem, "eps", 200);
        first.aggregation = Aggregation::FirstViolated;
        let max = config(&problem, "eps", 200);
        let a = run(&problem, &first).unwrap();
        let b = run(&problem, &max).unwrap();
        assert!(a.constraint_evaluations <= (a.len() * problem.m()) as u64);
        assert_eq!(b.constraint_evaluations, (b.len() * problem.m()) as u64);
    }
}

#[test]
fn sharpness_estimate_on_synthetic_instances() {
    let problem = generate(&GeneratorSpec::new("synthetic-sharp", 6, 2)).unwrap();
    let few = estimate_sharpness(&problem, 200, 9).unwrap();
    let many = estimate_sharpness(&problem, 2000, 9).unwrap();
    assert!(many <= few);
    assert!((1.0 - 1e-12..=1.0 + 1e-12).contains(&many), "{many}");
}
