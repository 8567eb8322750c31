//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every verdict is printed; exits nonzero if any check fails.

use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::json;
use sharp_subgrad::analysis::{check_fbar_window, verify_theorem_alternative, TheoremVariant};
use sharp_subgrad::oracle::{Func, Oracle};
use sharp_subgrad::problems::{generate, kl_reference_optimum, GeneratorSpec};
use sharp_subgrad::rng::Stream;
use sharp_subgrad::solvers::run;
use sharp_subgrad::steps::{contraction_factor, ContractionParams, RateVariant};
use sharp_subgrad::{Aggregation, DenseVector, FBarModel, ProblemInstance, Projector, SolverConfig, StepKind};
use sharp_subgrad_cli::{assemble, cmd_run, cmd_verify, CliError, DEFAULT_TOL};

type Verdict = Result<String, String>;

type Criterion = (u32, &'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- criterion 1

fn projectors(n: usize) -> Vec<Projector> {
    let center = DenseVector::new((0..n).map(|i| 0.2 - 0.15 * i as f64).collect()).unwrap();
    vec![
        Projector::WholeSpace,
        Projector::ball(center, 0.8).unwrap(),
        Projector::nonneg_ball(1.0, 0.0).unwrap(),
        Projector::nonneg_ball(1.2, 0.1).unwrap(),
        Projector::boxed(vec![-0.5; n], vec![0.6; n]).unwrap(),
        Projector::boxed(
            (0..n).map(|i| -0.3 + 0.1 * i as f64).collect(),
            (0..n).map(|i| if i % 2 == 0 { 0.4 } else { f64::INFINITY }).collect(),
        )
        .unwrap(),
    ]
}

fn grid_best(p: &Projector, x: &[f64], lo: f64, hi: f64, steps: usize) -> f64 {
    let n = x.len();
    let h = (hi - lo) / steps as f64;
    let mut idx = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut point = DenseVector::zeros(n);
    loop {
        let coords: Vec<f64> = idx.iter().map(|&i| lo + h * i as f64).collect();
        point = DenseVector::new(coords).unwrap_or(point);
        if p.contains(&point, 0.0) {
            let d: f64 = point.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            best = best.min(d);
        }
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            return best;
        }
    }
}

fn criterion_1() -> Verdict {
    let started = Instant::now();
    let mut rng = Stream::new(1);
    let n = 6;
    let kinds = projectors(n);
    for p in &kinds {
        for _ in 0..1000 {
            let x = DenseVector::new(rng.normal_vec(n, 2.0)).unwrap();
            let y = DenseVector::new(rng.normal_vec(n, 2.0)).unwrap();
            let (px, py) = (p.project(&x).map_err(|e| e.to_string())?, p.project(&y).map_err(|e| e.to_string())?);
            let ppx = p.project(&px).map_err(|e| e.to_string())?;
            ensure(ppx.distance(&px) <= 1e-12, || format!("{p:?}: not idempotent at {x:?}"))?;
            ensure(p.contains(&px, 1e-12), || format!("{p:?}: {px:?} outside Q"))?;
            ensure(px.distance(&py) <= x.distance(&y) + 1e-12, || format!("{p:?}: expansive on {x:?}, {y:?}"))?;
        }
    }
    let mut grid_cases = 0;
    for (dim, steps) in [(2, 400), (3, 80)] {
        for p in projectors(dim) {
            for _ in 0..3 {
                let x = rng.normal_vec(dim, 1.2);
                let xv = DenseVector::new(x.clone()).unwrap();
                let d = p.project(&xv).map_err(|e| e.to_string())?.distance(&xv);
                let (lo, hi) = (-3.0, 3.0);
                let best = grid_best(&p, &x, lo, hi, steps);
                let resolution = (hi - lo) / steps as f64 * (dim as f64).sqrt();
                ensure(d <= best + 1e-12 && best - d <= resolution, || {
                    format!("{p:?} at {x:?}: projection distance {d}, grid {best}")
                })?;
                grid_cases += 1;
            }
        }
    }
    within(started.elapsed(), 5.0)?;
    Ok(format!(
        "{} projector kinds x 1000 pairs, {grid_cases} grid cases, {:.2}s",
        kinds.len(),
        started.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- criterion 2

const FAMILIES: [(&str, Option<&str>); 6] = [
    ("geometric", None),
    ("ratio", Some("norm-cone")),
    ("ratio", Some("linear-max")),
    ("truss", None),
    ("kl", None),
    ("synthetic-sharp", None),
];

/// A random point where every oracle of the family is defined.
fn smooth_point(problem: &ProblemInstance, rng: &mut Stream) -> DenseVector {
    let n = problem.dimension;
    let x = match &problem.projector {
        Projector::NonnegBall { radius, .. } => {
            (0..n).map(|_| rng.uniform_in(0.2, 1.0) * radius / (n as f64).sqrt()).collect()
        }
        Projector::Box { .. } => (0..n).map(|_| rng.uniform_in(0.1, 3.0)).collect(),
        Projector::Ball { center, radius } => {
            let v = rng.in_ball(n, *radius);
            v.iter().zip(center.iter()).map(|(a, c)| a + c).collect()
        }
        Projector::WholeSpace => rng.normal_vec(n, 1.0),
    };
    DenseVector::new(x).unwrap()
}

/// `f` with its additive constant removed. Same gradient, but differences of
/// values are no longer swamped by a large offset.
fn without_constant(f: &Func) -> Func {
    let mut g = f.clone();
    match &mut g {
        Func::Posynomial { offset, .. } | Func::NormCone { offset, .. } => *offset = 0.0,
        Func::Affine { constant, .. } => *constant = 0.0,
        Func::GeneralizedKl { budget, .. } => *budget = 0.0,
        Func::Scaled { factor, inner } => return Func::Scaled { factor: *factor, inner: Box::new(without_constant(inner)) },
        _ => {}
    }
    g
}

fn fd_relative_error(f: &Func, x: &DenseVector) -> Result<f64, String> {
    let analytic = f.evaluate(x).map_err(|e| e.to_string())?.subgradient;
    let f = &without_constant(f);
    let mut fd = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1e-2);
        let mut plus = x.clone().into_inner();
        let mut minus = plus.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = f.value(&DenseVector::new(plus).unwrap()).map_err(|e| e.to_string())?;
        let fm = f.value(&DenseVector::new(minus).unwrap()).map_err(|e| e.to_string())?;
        fd.push((fp - fm) / (2.0 * h));
    }
    let diff: f64 = fd.iter().zip(analytic.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(diff / analytic.norm().max(1e-300))
}

fn criterion_2() -> Verdict {
    let started = Instant::now();
    let (mut checked, mut skipped, mut worst) = (0usize, 0usize, 0.0f64);
    for (family, variant) in FAMILIES {
        for seed in 0..10 {
            let mut spec = GeneratorSpec::new(family, 20, seed);
            spec.variant = variant.map(String::from);
            spec.reference_budget = 0;
            spec.noise_sigma = 1.0;
            let problem = generate(&spec).map_err(|e| format!("{family}: {e}"))?;
            let mut rng = Stream::substream(seed, 77);
            for _ in 0..100 {
                let x = smooth_point(&problem, &mut rng);
                for f in std::iter::once(&problem.objective).chain(&problem.constraints) {
                    if f.near_kink(&x, 1e-4) {
                        skipped += 1;
                        continue;
                    }
                    let err = fd_relative_error(f, &x)?;
                    worst = worst.max(err);
                    ensure(err <= 1e-5, || format!("{family} seed {seed}: relative error {err:e}"))?;
                    checked += 1;
                }
            }
        }
    }
    within(started.elapsed(), 30.0)?;
    Ok(format!(
        "{checked} oracle checks (skipped {skipped} near kinks), worst relative error {worst:.1e}, {:.2}s",
        started.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Verdict {
    let started = Instant::now();
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = 0;
    for (family, variant) in FAMILIES {
        for algo in ["eps", "cond", "baseline"] {
            for seed in 0..20u64 {
                let dir = root.path().join(format!("{family}-{}-{algo}-{seed}", variant.unwrap_or("")));
                let config = assemble(
                    None,
                    json!({
                        "generator": {"family": family, "variant": variant, "n": 20, "m": 10, "seed": seed},
                        "solver": {"algorithm": algo, "epsilon": 1e-3, "fbar": "exact", "max_iters": 500},
                        "output_dir": dir,
                    }),
                )
                .map_err(|e| e.to_string())?;
                let label = format!("{family} {} {algo} seed {seed}", variant.unwrap_or(""));
                cmd_run(&config).map_err(|e| format!("{label}: run: {e}"))?;
                match cmd_verify(Path::new(&dir), DEFAULT_TOL) {
                    Ok(_) => {}
                    Err(e) => return Err(format!("{label}: verify exit {}: {e}", CliError::exit_code(&e))),
                }
                runs += 1;
            }
        }
    }
    within(started.elapsed(), 60.0)?;
    Ok(format!("{runs} runs verified (exit 0), {:.2}s", started.elapsed().as_secs_f64()))
}

// ---------------------------------------------------------------- criteria 4-6

fn synthetic(seed: u64) -> Result<ProblemInstance, String> {
    generate(&GeneratorSpec::new("synthetic-sharp", 20, seed)).map_err(|e| e.to_string())
}

fn dist_sq(problem: &ProblemInstance, x: &DenseVector) -> f64 {
    let d = problem.distance_to_solution(x).expect("synthetic instances know X_*");
    d * d
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let n_iters = 200;
    let mut worst_ratio = 0.0f64;
    for seed in 0..10 {
        let problem = synthetic(seed)?;
        let mut config = SolverConfig::new("cond", 1e-3, FBarModel::exact(0.0), n_iters);
        config.record_points = true;
        let trace = run(&problem, &config).map_err(|e| e.to_string())?;
        let m_g = problem.lipschitz_g.ok_or("synthetic instance lacks M_g")?;
        let params = ContractionParams::new(1.0, problem.lipschitz_f, Some(m_g), 1.0).map_err(|e| e.to_string())?;
        let q = contraction_factor(&params, RateVariant::CondUniform).map_err(|e| e.to_string())?;
        let d0 = dist_sq(&problem, &trace.start_point);
        let bound = q.powi(n_iters as i32) * d0 * (1.0 + 1e-9);
        let d_final = dist_sq(&problem, &trace.final_point);
        ensure(d_final <= bound, || format!("seed {seed}: dist^2 {d_final:e} > bound {bound:e}"))?;
        worst_ratio = worst_ratio.max(d_final / bound);
        let points = trace.points().ok_or("points not recorded")?;
        for (k, w) in points.windows(2).enumerate() {
            let (a, b) = (problem.distance_to_solution(w[0]).unwrap(), problem.distance_to_solution(w[1]).unwrap());
            ensure(b <= a + 1e-12, || format!("seed {seed}: dist rose at step {k}: {a:e} -> {b:e}"))?;
        }
    }
    within(started.elapsed(), 1.0)?;
    Ok(format!(
        "10 seeds, max dist^2/bound {worst_ratio:.2e}, dist monotone, {:.3}s",
        started.elapsed().as_secs_f64()
    ))
}

fn criterion_5() -> Verdict {
    let started = Instant::now();
    let mut checked = 0;
    for seed in 0..10 {
        let problem = synthetic(seed)?;
        let alpha = problem.ground_truth.as_ref().and_then(|t| t.sharpness_alpha).ok_or("no alpha")?;
        for (algo, variant) in [("eps", TheoremVariant::Theorem1), ("cond", TheoremVariant::Theorem2)] {
            let config = SolverConfig::new(algo, 1e-3, FBarModel::exact(0.0), 200);
            let trace = run(&problem, &config).map_err(|e| e.to_string())?;
            let params = ContractionParams::new(alpha, problem.lipschitz_f, problem.lipschitz_g, 1.0)
                .map_err(|e| e.to_string())?;
            let report = verify_theorem_alternative(&trace, &problem, &params, 1e-3, variant, 1e-9)
                .map_err(|e| e.to_string())?;
            ensure(report.passed(), || {
                format!("seed {seed} {variant:?}: fails at {:?}", report.failures.first())
            })?;
            let inflated = ContractionParams { alpha: 10.0 * alpha, ..params };
            let control = verify_theorem_alternative(&trace, &problem, &inflated, 1e-3, variant, 1e-9)
                .map_err(|e| e.to_string())?;
            ensure(!control.passed(), || format!("seed {seed} {variant:?}: inflated alpha still passes"))?;
            checked += report.checked;
        }
    }
    within(started.elapsed(), 5.0)?;
    Ok(format!(
        "{checked} iterations pass both variants, 10x alpha fails on every run, {:.3}s",
        started.elapsed().as_secs_f64()
    ))
}

fn criterion_6() -> Verdict {
    let started = Instant::now();
    let mut compliant_steps = 0;
    for seed in 0..10 {
        let problem = synthetic(seed)?;
        let x0 = problem.projector.project(&problem.start_point()).map_err(|e| e.to_string())?;
        let f0 = problem.objective.value(&x0).map_err(|e| e.to_string())?;
        let f_star = 0.0;
        let f_bar = f_star + 0.5 * (f0 - f_star);
        let fbar = FBarModel::new(f_bar, 0.5, Some(f_star)).map_err(|e| e.to_string())?;
        for algo in ["eps", "cond"] {
            let mut config = SolverConfig::new(algo, 1e-3, fbar, 200);
            config.record_points = true;
            let trace = run(&problem, &config).map_err(|e| e.to_string())?;
            let window = check_fbar_window(&trace, &fbar).map_err(|e| e.to_string())?;
            ensure(window.is_compliant(0), || format!("seed {seed} {algo}: x0 not in the C = 0.5 window"))?;
            let points = trace.points().ok_or("points not recorded")?;
            for k in 0..trace.len() {
                if window.is_compliant(k) {
                    let (a, b) = (dist_sq(&problem, points[k]), dist_sq(&problem, points[k + 1]));
                    ensure(b <= a * (1.0 + 1e-12) + 1e-24, || {
                        format!("seed {seed} {algo}: dist rose on compliant step {k}")
                    })?;
                    compliant_steps += 1;
                }
            }
            let gap = trace.final_f - f_star;
            ensure(gap <= f_bar - f_star + 1e-6, || {
                format!("seed {seed} {algo}: final gap {gap:e} above fbar - f* = {:e}", f_bar - f_star)
            })?;
        }
    }
    within(started.elapsed(), 2.0)?;
    Ok(format!(
        "{compliant_steps} compliant steps never increase dist, final gaps within fbar - f*, {:.3}s",
        started.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- criteria 7-10

fn criterion_7() -> Verdict {
    let started = Instant::now();
    let (mut wins, mut counts) = (0, Vec::new());
    for seed in 0..10 {
        let mut spec = GeneratorSpec::new("geometric", 50, seed).with_m(20);
        spec.p = 5.0;
        spec.radius = 1.0;
        let problem = generate(&spec).map_err(|e| e.to_string())?;
        let first = |algo: &str| -> Result<Option<usize>, String> {
            let config = SolverConfig::new(algo, 1e-3, FBarModel::exact(0.0), 5000);
            let trace = run(&problem, &config).map_err(|e| e.to_string())?;
            // f* = 0, so f − f* ≤ ε is exactly f ≤ 1e−3
            Ok(trace.first_eps_solution(0.0, 1e-3))
        };
        let (ours, theirs) = (first("eps")?, first("baseline")?);
        let ours = ours.ok_or_else(|| format!("seed {seed}: eps never reaches f <= 1e-3, g <= 1e-3"))?;
        if theirs.is_none_or(|t| ours < t) {
            wins += 1;
        }
        counts.push((ours, theirs));
    }
    ensure(wins >= 8, || format!("eps faster on only {wins}/10 seeds: {counts:?}"))?;
    let (o, t) = counts[0];
    Ok(format!(
        "eps faster on {wins}/10 seeds (seed 0: {o} vs {}), {:.2}s",
        t.map_or("not reached".into(), |t| t.to_string()),
        started.elapsed().as_secs_f64()
    ))
}

fn productive_steps_to_gap(problem: &ProblemInstance, algo: &str, f_star: f64) -> Result<Option<usize>, String> {
    let config = SolverConfig::new(algo, 1e-3, FBarModel::exact(f_star), 5000);
    let trace = run(problem, &config).map_err(|e| e.to_string())?;
    let mut productive = 0;
    for r in &trace.records {
        if r.f_value - f_star <= 0.01 * f_star.abs() {
            return Ok(Some(productive));
        }
        if r.kind == StepKind::Productive {
            productive += 1;
        }
    }
    Ok((trace.final_f - f_star <= 0.01 * f_star.abs()).then_some(productive))
}

fn criterion_8() -> Verdict {
    let started = Instant::now();
    let (mut wins, mut worst_kl, mut worst_stat) = (0, 0.0f64, 0.0f64);
    let mut sample = None;
    for seed in 0..10 {
        let spec = GeneratorSpec::new("kl", 100, seed);
        let problem = generate(&spec).map_err(|e| e.to_string())?;
        let Some(Func::GeneralizedKl { reference, budget }) = problem.constraints.first() else {
            return Err("kl instance lacks its divergence constraint".into());
        };
        ensure(*budget == 1000.0, || format!("budget {budget}"))?;
        let optimum = kl_reference_optimum(reference, *budget, 1e-10).map_err(|e| e.to_string())?;
        worst_kl = worst_kl.max(optimum.kl_residual.abs());
        worst_stat = worst_stat.max(optimum.stationarity_residual.abs());
        ensure(optimum.stationarity_residual.abs() <= 1e-8, || {
            format!("seed {seed}: stationarity residual {:e}", optimum.stationarity_residual)
        })?;
        ensure(optimum.kl_residual.abs() <= 1e-10, || format!("seed {seed}: KL residual {:e}", optimum.kl_residual))?;
        let f_star = optimum.f_star;
        let polyak = productive_steps_to_gap(&problem, "polyak-unit-g", f_star)?;
        let comparator = productive_steps_to_gap(&problem, "baseline", f_star)?;
        if polyak.is_some_and(|p| comparator.is_none_or(|c| p < c)) {
            wins += 1;
        }
        sample.get_or_insert((polyak, comparator));
    }
    ensure(wins >= 8, || format!("Polyak steps faster on only {wins}/10 seeds"))?;
    let (p, c) = sample.unwrap();
    let show = |v: Option<usize>| v.map_or("not reached".to_string(), |v| v.to_string());
    Ok(format!(
        "Polyak faster on {wins}/10 seeds (seed 0: {} vs {} productive steps), residuals KL {worst_kl:.1e} stationarity {worst_stat:.1e}, {:.2}s",
        show(p),
        show(c),
        started.elapsed().as_secs_f64()
    ))
}

fn criterion_9() -> Verdict {
    let a = DenseVector::new(vec![1.0]).unwrap();
    let optimum = kl_reference_optimum(&a, 1.0, 1e-12).map_err(|e| e.to_string())?;
    let expected = -std::f64::consts::E.sqrt();
    let err = (optimum.f_star - expected).abs();
    ensure(err <= 1e-8, || format!("f* = {} vs -sqrt(e) = {expected}", optimum.f_star))?;
    Ok(format!("f* = {:.15}, error {err:.1e}", optimum.f_star))
}

fn criterion_10() -> Verdict {
    let started = Instant::now();
    let (mut first_total, mut max_total) = (0u64, 0u64);
    for seed in 0..10 {
        let mut spec = GeneratorSpec::new("truss", 50, seed).with_m(10);
        spec.noise_sigma = 1.0;
        let problem = generate(&spec).map_err(|e| e.to_string())?;
        ensure(problem.m() == 20, || format!("expected 2m = 20 constraints, got {}", problem.m()))?;
        let f_star = problem.ground_truth.as_ref().map(|t| t.f_star).ok_or("truss lacks f*")?;
        let mut evaluations = [0u64; 2];
        for (slot, aggregation) in [Aggregation::FirstViolated, Aggregation::MaxOfConstraints].into_iter().enumerate() {
            let mut config = SolverConfig::new("eps", 1e-3, FBarModel::exact(f_star), 2000);
            config.aggregation = aggregation;
            let trace = run(&problem, &config).map_err(|e| e.to_string())?;
            ensure(trace.first_eps_solution(f_star, 1e-3).is_some(), || {
                format!("seed {seed} {aggregation:?}: no eps-solution within 2000 iterations")
            })?;
            evaluations[slot] = trace.constraint_evaluations;
        }
        ensure(evaluations[0] <= evaluations[1], || {
            format!("seed {seed}: FirstViolated {} > MaxOfConstraints {}", evaluations[0], evaluations[1])
        })?;
        first_total += evaluations[0];
        max_total += evaluations[1];
    }
    Ok(format!(
        "both modes reach eps-solutions on 10 seeds; evaluations {first_total} (first-violated) <= {max_total} (max), {:.2}s",
        started.elapsed().as_secs_f64()
    ))
}

fn criterion_11() -> Verdict {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let config = assemble(
            None,
            json!({
                "generator": {"family": "truss", "n": 30, "m": 8, "seed": 5, "noise_sigma": 1.0},
                "solver": {"algorithm": "eps", "epsilon": 1e-3, "max_iters": 400, "aggregation": "first-violated"},
                "output_dir": root.path().join(name),
            }),
        )
        .map_err(|e| e.to_string())?;
        cmd_run(&config).map_err(|e| e.to_string())?;
        traces.push(std::fs::read(root.path().join(name).join("trace.csv")).map_err(|e| e.to_string())?);
    }
    ensure(traces[0] == traces[1], || "trace CSVs differ".into())?;
    Ok(format!("two runs, {} identical bytes", traces[0].len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "projection suite", criterion_1),
        (2, "subgradient finite differences", criterion_2),
        (3, "step replay via verify", criterion_3),
        (4, "conditional rate bound", criterion_4),
        (5, "theorem alternative", criterion_5),
        (6, "inexact fbar", criterion_6),
        (7, "geometric program vs comparator", criterion_7),
        (8, "KL problem vs comparator", criterion_8),
        (9, "KL analytic case", criterion_9),
        (10, "aggregation modes on truss", criterion_10),
        (11, "determinism", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
