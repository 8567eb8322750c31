//! The `run`, `compare` and `verify` subcommands as library functions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sharp_subgrad::analysis::{replay_steps, verify_theorem_alternative, ReplayStep, TheoremVariant};
use sharp_subgrad::problems::{self, GeneratorSpec};
use sharp_subgrad::solvers::{self, GammaRule};
use sharp_subgrad::steps::ContractionParams;
use sharp_subgrad::{DenseVector, Oracle, ProblemInstance, RunTrace, SolverConfig, StepRecord};

use crate::artifacts::{
    fmt_float, read_json, read_points_csv, read_trace_csv, write_json, write_points_csv, write_trace_csv,
    InstanceArtifact, PointRow, RunSummary, TraceRow, VerifyReport, INSTANCE_FILE, POINTS_FILE, SUMMARY_FILE,
    TRACE_FILE, VERIFY_FILE,
};
use crate::config::{Artifact, ExperimentConfig};
use crate::error::{CliError, CliResult};

/// Replay and theorem tolerance, scaled by `max(1, ‖x_k‖²)`.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub trace: RunTrace,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn generate(spec: &GeneratorSpec) -> CliResult<ProblemInstance> {
    problems::generate(spec).map_err(CliError::from)
}

fn summarize(
    config: &ExperimentConfig,
    solver: &SolverConfig,
    trace: &RunTrace,
    f_star: Option<f64>,
    wall_time_secs: f64,
) -> RunSummary {
    RunSummary {
        algorithm: trace.algorithm.clone(),
        seed: config.generator.seed,
        iterations: trace.len(),
        productive_steps: trace.productive_set.len(),
        nonproductive_steps: trace.nonproductive_set.len(),
        best_feasible_f: trace.best_feasible.as_ref().map(|b| b.f_value),
        best_feasible_iteration: trace.best_feasible.as_ref().map(|b| b.iteration),
        final_f: trace.final_f,
        final_g: trace.final_g,
        f_star,
        f_bar: solver.fbar.f_bar,
        first_eps_solution: f_star.and_then(|f| trace.first_eps_solution(f, solver.epsilon)),
        constraint_evaluations: trace.constraint_evaluations,
        terminated_early: trace.terminated_early.clone(),
        wall_time_secs,
        config: config.clone(),
    }
}

/// Generate the instance, run one solver and write the requested artifacts.
pub fn cmd_run(config: &ExperimentConfig) -> CliResult<RunOutcome> {
    config.validate()?;
    let dir = config.output_dir.clone();
    create_dir(&dir)?;
    let problem = generate(&config.generator)?;
    let solver = config.solver_config(&problem)?;

    let started = Instant::now();
    let trace = solvers::run(&problem, &solver)?;
    let wall_time = started.elapsed().as_secs_f64();

    let f_star = problem.ground_truth.as_ref().map(|t| t.f_star);
    let summary = summarize(config, &solver, &trace, f_star, wall_time);

    if config.emits(Artifact::InstanceJson) {
        let artifact = InstanceArtifact {
            generator: config.generator.clone(),
            instance: problem.clone(),
        };
        write_json(&dir.join(INSTANCE_FILE), &artifact)?;
    }
    if config.emits(Artifact::TraceCsv) {
        write_trace_csv(&dir.join(TRACE_FILE), &trace)?;
        if solver.record_points {
            write_points_csv(&dir.join(POINTS_FILE), &trace)?;
        }
    }
    if config.emits(Artifact::SummaryJson) {
        write_json(&dir.join(SUMMARY_FILE), &summary)?;
    }
    if config.emits(Artifact::VerifyJson) {
        let rows = trace_rows(&trace);
        let points = point_rows(&trace)?;
        let report = verify_run(&problem, &solver, &rows, &points, DEFAULT_TOL)?;
        write_json(&dir.join(VERIFY_FILE), &report)?;
        fail_unless_passed(&report)?;
    }
    Ok(RunOutcome { dir, summary, trace })
}

fn trace_rows(trace: &RunTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            k: r.iteration,
            kind: r.kind,
            f: r.f_value,
            g: r.g_value,
            h: r.step_size,
            grad_norm: r.grad_norm,
            gamma: r.gamma,
            dist: r.dist_to_solution,
        })
        .collect()
}

fn point_rows(trace: &RunTrace) -> CliResult<Vec<PointRow>> {
    let points = trace
        .points()
        .ok_or_else(|| CliError::Config("verification needs recorded points".into()))?;
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(k, x)| PointRow {
            k,
            constraint: trace.records.get(k).and_then(|r| r.constraint_index),
            x: x.clone(),
        })
        .collect())
}

/// Result of one solver inside a comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareEntry {
    pub label: String,
    pub algorithm: String,
    pub iterations: usize,
    pub productive_steps: usize,
    pub nonproductive_steps: usize,
    pub final_f: f64,
    pub final_g: f64,
    /// Iteration index, or a reason it is unavailable.
    pub first_eps_solution: Value,
    pub constraint_evaluations: u64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareSummary {
    pub seed: u64,
    pub f_star: Option<f64>,
    pub generator: GeneratorSpec,
    pub solvers: Vec<CompareEntry>,
}

pub const COMBINED_FILE: &str = "combined.csv";
pub const COMPARE_SUMMARY_FILE: &str = "compare_summary.json";

/// Labels from algorithm names, suffixed `-2`, `-3`, … on repeats.
fn labels(configs: &[ExperimentConfig]) -> Vec<String> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    configs
        .iter()
        .map(|c| {
            let count = seen.entry(c.solver.algorithm.as_str()).or_insert(0);
            *count += 1;
            match *count {
                1 => c.solver.algorithm.clone(),
                i => format!("{}-{i}", c.solver.algorithm),
            }
        })
        .collect()
}

/// Run several solvers on one instance and write a combined CSV and summary.
///
/// Output goes to the first config's directory; all configs must share the
/// generator spec.
pub fn cmd_compare(configs: &[ExperimentConfig]) -> CliResult<CompareSummary> {
    if configs.len() < 2 {
        return Err(CliError::Config(format!(
            "compare needs at least two solver configs, got {}",
            configs.len()
        )));
    }
    for c in configs {
        c.validate()?;
        if c.generator != configs[0].generator {
            return Err(CliError::Config("compare configs must share one generator spec".into()));
        }
    }
    let dir = &configs[0].output_dir;
    create_dir(dir)?;
    let problem = generate(&configs[0].generator)?;
    let solver_configs = configs
        .iter()
        .map(|c| c.solver_config(&problem))
        .collect::<CliResult<Vec<_>>>()?;

    let results: Vec<CliResult<(RunTrace, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = solver_configs
            .iter()
            .map(|solver| {
                let problem = &problem;
                scope.spawn(move || {
                    let started = Instant::now();
                    let trace = solvers::run(problem, solver)?;
                    Ok((trace, started.elapsed().as_secs_f64()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let runs = results.into_iter().collect::<CliResult<Vec<_>>>()?;

    let labels = labels(configs);
    let f_star = problem.ground_truth.as_ref().map(|t| t.f_star);
    let emits = |a| configs[0].emits(a);
    if emits(Artifact::InstanceJson) {
        let artifact = InstanceArtifact {
            generator: configs[0].generator.clone(),
            instance: problem.clone(),
        };
        write_json(&dir.join(INSTANCE_FILE), &artifact)?;
    }
    if emits(Artifact::TraceCsv) {
        for (label, (trace, _)) in labels.iter().zip(&runs) {
            write_trace_csv(&dir.join(format!("trace_{label}.csv")), trace)?;
        }
    }
    write_combined_csv(&dir.join(COMBINED_FILE), &labels, &runs)?;

    let solvers = labels
        .iter()
        .zip(&runs)
        .zip(&solver_configs)
        .map(|((label, (trace, secs)), solver)| CompareEntry {
            label: label.clone(),
            algorithm: trace.algorithm.clone(),
            iterations: trace.len(),
            productive_steps: trace.productive_set.len(),
            nonproductive_steps: trace.nonproductive_set.len(),
            final_f: trace.final_f,
            final_g: trace.final_g,
            first_eps_solution: match f_star {
                None => Value::from("unknown f*"),
                Some(f) => trace
                    .first_eps_solution(f, solver.epsilon)
                    .map_or_else(|| Value::from("not reached"), Value::from),
            },
            constraint_evaluations: trace.constraint_evaluations,
            wall_time_secs: *secs,
        })
        .collect();
    let summary = CompareSummary {
        seed: configs[0].generator.seed,
        f_star,
        generator: configs[0].generator.clone(),
        solvers,
    };
    if emits(Artifact::SummaryJson) {
        write_json(&dir.join(COMPARE_SUMMARY_FILE), &summary)?;
    }
    Ok(summary)
}

/// Columns `k, f_<label>, g_<label>, …`; row `K` of each solver is its final point.
fn write_combined_csv(path: &Path, labels: &[String], runs: &[(RunTrace, f64)]) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| CliError::io(path, e);
    let header = std::iter::once("k".to_string())
        .chain(labels.iter().flat_map(|l| [format!("f_{l}"), format!("g_{l}")]));
    w.write_record(header).map_err(io)?;
    let rows = runs.iter().map(|(t, _)| t.len() + 1).max().unwrap_or(0);
    for k in 0..rows {
        let mut row = vec![k.to_string()];
        for (trace, _) in runs {
            let (f, g) = match trace.records.get(k) {
                Some(r) => (fmt_float(r.f_value), fmt_float(r.g_value)),
                None if k == trace.len() => (fmt_float(trace.final_f), fmt_float(trace.final_g)),
                None => (String::new(), String::new()),
            };
            row.push(f);
            row.push(g);
        }
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Replay a run directory's trace against its instance and write `verify.json`.
pub fn cmd_verify(dir: &Path, tol: f64) -> CliResult<VerifyReport> {
    let artifact: InstanceArtifact = read_json(&dir.join(INSTANCE_FILE))?;
    let summary: RunSummary = read_json(&dir.join(SUMMARY_FILE))?;
    let rows = read_trace_csv(&dir.join(TRACE_FILE))?;
    let points = read_points_csv(&dir.join(POINTS_FILE))?;
    let problem = artifact.instance;
    problem.validate()?;
    let mut solver = summary.config.solver_config(&problem)?;
    // the recorded f̄ is authoritative, whatever rule produced it
    solver.fbar.f_bar = summary.f_bar;

    let report = verify_run(&problem, &solver, &rows, &points, tol)?;
    write_json(&dir.join(VERIFY_FILE), &report)?;
    fail_unless_passed(&report)?;
    Ok(report)
}

fn fail_unless_passed(report: &VerifyReport) -> CliResult<()> {
    if report.passed {
        return Ok(());
    }
    let k = report.first_failure.expect("a failed report names an iteration");
    let what = report
        .replay
        .failures
        .iter()
        .find(|f| f.iteration == k)
        .map(|f| format!("{} (residual {:e})", f.check, f.residual))
        .or_else(|| {
            let t = report.theorem.as_ref()?;
            let f = t.failures.iter().find(|f| f.iteration == k)?;
            Some(format!("{:?} bound (dist² {:e} > {:e})", t.variant, f.dist_sq, f.bound))
        })
        .unwrap_or_default();
    Err(CliError::Verify(format!("verification failed at iteration {k}: {what}")))
}

/// Lemma replay on every step and, where ground truth allows, the theorem alternative.
pub fn verify_run(
    problem: &ProblemInstance,
    solver: &SolverConfig,
    rows: &[TraceRow],
    points: &[PointRow],
    tol: f64,
) -> CliResult<VerifyReport> {
    if points.len() != rows.len() + 1 {
        return Err(CliError::Config(format!(
            "{} trace rows need {} points, got {}",
            rows.len(),
            rows.len() + 1,
            points.len()
        )));
    }
    if rows.iter().enumerate().any(|(k, r)| r.k != k) || points.iter().enumerate().any(|(k, p)| p.k != k) {
        return Err(CliError::Config("trace and point rows must be numbered 0, 1, 2, …".into()));
    }
    let steps: Vec<ReplayStep> = rows
        .iter()
        .zip(points)
        .map(|(r, p)| ReplayStep {
            kind: r.kind,
            step_size: r.h,
            constraint_index: p.constraint,
        })
        .collect();
    let xs: Vec<DenseVector> = points.iter().map(|p| p.x.clone()).collect();
    for x in &xs {
        x.check_dim(problem.dimension)?;
    }
    let truth = problem.ground_truth.as_ref();
    // any point of Q serves as a reference; the start point always qualifies
    let mut references = truth.map(|t| t.solutions.clone()).unwrap_or_default();
    references.push(xs[0].clone());
    let replay = replay_steps(problem, &steps, &xs, &references, tol)?;

    let variant = match solvers::get_method(&solver.algorithm)?.gamma_rule() {
        Some(GammaRule::Eps) => Some(TheoremVariant::Theorem1),
        Some(GammaRule::Cond) => Some(TheoremVariant::Theorem2),
        None => None,
    };
    let (theorem, theorem_skipped) = match (variant, truth) {
        (None, _) => (None, Some(format!("method `{}` has no rate theorem", solver.algorithm))),
        (_, None) => (None, Some("instance has no ground truth".into())),
        (Some(_), Some(t)) if t.solutions.is_empty() || t.sharpness_alpha.is_none() => {
            (None, Some("ground truth lacks X_* or alpha".into()))
        }
        (Some(_), Some(t)) if solver.fbar.f_bar != t.f_star => (None, Some("fbar differs from f*".into())),
        (Some(variant), Some(t)) => {
            let alpha = t.sharpness_alpha.expect("checked above");
            let params = ContractionParams::new(alpha, problem.lipschitz_f, problem.lipschitz_g, solver.fbar.big_c)?;
            let trace = rebuild_trace(problem, &solver.algorithm, rows, &steps, &xs)?;
            let report = verify_theorem_alternative(&trace, problem, &params, solver.epsilon, variant, tol)?;
            (Some(report), None)
        }
    };

    let first_failure = replay
        .failures
        .iter()
        .map(|f| f.iteration)
        .chain(theorem.iter().flat_map(|t| t.failures.iter().map(|f| f.iteration)))
        .min();
    Ok(VerifyReport {
        passed: first_failure.is_none(),
        first_failure,
        replay,
        theorem,
        theorem_skipped,
    })
}

/// Trace with values recomputed from the points; only `γ` comes from the file.
fn rebuild_trace(
    problem: &ProblemInstance,
    algorithm: &str,
    rows: &[TraceRow],
    steps: &[ReplayStep],
    xs: &[DenseVector],
) -> CliResult<RunTrace> {
    let mut records = Vec::with_capacity(rows.len());
    for (k, (row, step)) in rows.iter().zip(steps).enumerate() {
        let x = &xs[k];
        let f = problem.objective.value(x)?;
        let g = problem.max_constraint_value(x)?;
        let grad = match step.constraint_index {
            Some(i) if row.kind == sharp_subgrad::StepKind::Nonproductive && i < problem.m() => {
                problem.constraints[i].evaluate(x)?.subgradient
            }
            _ => problem.objective.evaluate(x)?.subgradient,
        };
        records.push(StepRecord {
            iteration: k,
            kind: row.kind,
            f_value: f,
            g_value: g,
            step_size: row.h,
            grad_norm: grad.norm(),
            gamma: row.gamma,
            dist_to_solution: problem.distance_to_solution(x),
            constraint_index: step.constraint_index,
            point: Some(x.clone()),
        });
    }
    let last = xs.last().expect("at least one point");
    let (productive_set, nonproductive_set) = records
        .iter()
        .map(|r| r.iteration)
        .partition(|&k| records[k].kind == sharp_subgrad::StepKind::Productive);
    Ok(RunTrace {
        algorithm: algorithm.to_string(),
        records,
        productive_set,
        nonproductive_set,
        start_point: xs[0].clone(),
        final_point: last.clone(),
        final_f: problem.objective.value(last)?,
        final_g: problem.max_constraint_value(last)?,
        best_feasible: None,
        constraint_evaluations: 0,
        terminated_early: None,
    })
}
