//! On-disk formats: trace and point CSVs, instance, summary and verification JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sharp_subgrad::analysis::{ReplayReport, TheoremReport};
use sharp_subgrad::problems::GeneratorSpec;
use sharp_subgrad::steps::StepKind;
use sharp_subgrad::{DenseVector, ProblemInstance, RunTrace};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const TRACE_FILE: &str = "trace.csv";
pub const POINTS_FILE: &str = "points.csv";
pub const INSTANCE_FILE: &str = "instance.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const VERIFY_FILE: &str = "verify.json";

pub const TRACE_HEADER: [&str; 8] = ["k", "kind", "f", "g", "h", "grad_norm", "gamma", "dist"];

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(file)))
}

fn csv_reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().from_reader(file))
}

pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in &trace.records {
        w.write_record([
            r.iteration.to_string(),
            r.kind.code().to_string(),
            fmt_float(r.f_value),
            fmt_float(r.g_value),
            fmt_float(r.step_size),
            fmt_float(r.grad_norm),
            fmt_opt(r.gamma),
            fmt_opt(r.dist_to_solution),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub kind: StepKind,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub grad_norm: f64,
    pub gamma: Option<f64>,
    pub dist: Option<f64>,
}

pub fn read_trace_csv(path: &Path) -> CliResult<Vec<TraceRow>> {
    let mut r = csv_reader(path)?;
    let bad = |line: usize, what: &str| CliError::Config(format!("{}: row {line}: {what}", path.display()));
    let header = r.headers().map_err(|e| bad(0, &e.to_string()))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(bad(0, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(line + 1, &e.to_string()))?;
        let num = |i: usize| -> CliResult<f64> {
            record[i].parse().map_err(|_| bad(line + 1, &format!("bad value in column {}", TRACE_HEADER[i])))
        };
        let opt = |i: usize| -> CliResult<Option<f64>> {
            if record[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        rows.push(TraceRow {
            k: record[0].parse().map_err(|_| bad(line + 1, "bad k"))?,
            kind: StepKind::from_code(&record[1]).ok_or_else(|| bad(line + 1, "kind must be P or N"))?,
            f: num(2)?,
            g: num(3)?,
            h: num(4)?,
            grad_norm: num(5)?,
            gamma: opt(6)?,
            dist: opt(7)?,
        });
    }
    Ok(rows)
}

/// Rows `k, constraint, x_0 … x_{n−1}` for `x_0 … x_K`; the last row is the final point.
pub fn write_points_csv(path: &Path, trace: &RunTrace) -> CliResult<()> {
    let Some(points) = trace.points() else {
        return Err(CliError::Config("points were not recorded".into()));
    };
    let n = trace.final_point.len();
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e);
    let header = ["k".to_string(), "constraint".to_string()]
        .into_iter()
        .chain((0..n).map(|j| format!("x_{j}")));
    w.write_record(header).map_err(io)?;
    for (k, x) in points.iter().enumerate() {
        let constraint = trace
            .records
            .get(k)
            .and_then(|r| r.constraint_index)
            .map(|i| i.to_string())
            .unwrap_or_default();
        let row = [k.to_string(), constraint]
            .into_iter()
            .chain(x.iter().map(|&v| fmt_float(v)));
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRow {
    pub k: usize,
    pub constraint: Option<usize>,
    pub x: DenseVector,
}

pub fn read_points_csv(path: &Path) -> CliResult<Vec<PointRow>> {
    let mut r = csv_reader(path)?;
    let bad = |line: usize, what: &str| CliError::Config(format!("{}: row {line}: {what}", path.display()));
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(line + 1, &e.to_string()))?;
        let k = record[0].parse().map_err(|_| bad(line + 1, "bad k"))?;
        let constraint = match &record[1] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad(line + 1, "bad constraint index"))?),
        };
        let x = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad(line + 1, "bad coordinate"))?;
        let x = DenseVector::new(x).map_err(|e| bad(line + 1, &e.to_string()))?;
        rows.push(PointRow { k, constraint, x });
    }
    Ok(rows)
}

/// A generated instance together with the spec that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceArtifact {
    pub generator: GeneratorSpec,
    pub instance: ProblemInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    pub iterations: usize,
    pub productive_steps: usize,
    pub nonproductive_steps: usize,
    pub best_feasible_f: Option<f64>,
    pub best_feasible_iteration: Option<usize>,
    pub final_f: f64,
    pub final_g: f64,
    pub f_star: Option<f64>,
    pub f_bar: f64,
    /// First `k` with `f − f* ≤ ε` and `g ≤ ε`; needs `f*`.
    pub first_eps_solution: Option<usize>,
    pub constraint_evaluations: u64,
    pub terminated_early: Option<String>,
    pub wall_time_secs: f64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    /// First iteration at which any check failed.
    pub first_failure: Option<usize>,
    pub replay: ReplayReport,
    pub theorem: Option<TheoremReport>,
    /// Why the theorem check did not run, when it did not.
    pub theorem_skipped: Option<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Missing or malformed input is a configuration error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}
