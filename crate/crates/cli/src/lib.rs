//! Experiment runner for the switching subgradient solvers.
//!
//! Three subcommands: `run` generates an instance and runs one solver,
//! `compare` runs several solvers on one instance, `verify` replays a run
//! directory and checks the step inequalities. Exit status: 0 success,
//! 1 I/O failure, 2 bad configuration or input, 3 numerical failure,
//! 4 failed verification.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

pub use commands::{cmd_compare, cmd_run, cmd_verify, verify_run, CompareSummary, RunOutcome, DEFAULT_TOL};
pub use config::{assemble, Artifact, ExperimentConfig, FBarSpec, Scale, SolverSettings};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sharp-subgrad", version, about = "Switching subgradient experiments with Polyak steps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance, run one solver and write its artifacts.
    Run {
        /// JSON experiment config; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: ExperimentFlags,
    },
    /// Run several solvers on the same instance.
    Compare {
        /// JSON experiment config, repeatable; one solver per file.
        #[arg(long)]
        config: Vec<PathBuf>,
        /// Comma-separated solver names sharing all other settings.
        #[arg(long, value_delimiter = ',')]
        algos: Vec<String>,
        #[command(flatten)]
        flags: ExperimentFlags,
    },
    /// Replay a run directory and check the step inequalities.
    Verify {
        /// Directory holding instance.json, summary.json, trace.csv and points.csv.
        #[arg(long)]
        dir: PathBuf,
        /// Check tolerance, scaled by max(1, |x_k|^2).
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregationArg {
    Max,
    FirstViolated,
}

#[derive(Debug, Args)]
struct ExperimentFlags {
    /// Problem family: geometric, ratio, truss, kl, synthetic-sharp.
    #[arg(long)]
    family: Option<String>,
    /// Family variant, e.g. norm-cone or linear-max for ratio.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Standard deviation of the truss constraint coefficients.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Divergence budget of the kl family.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    floor: Option<f64>,
    /// Iterations spent estimating f* where no closed form exists.
    #[arg(long)]
    reference_budget: Option<usize>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// `exact`, a number, or `frac:<t>` for f* + t(f(x0) - f*).
    #[arg(long, value_parser = parse_fbar)]
    fbar: Option<FBarSpec>,
    /// Quality constant C of the f̄ estimate.
    #[arg(long)]
    big_c: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    /// Store iterates (needed by verify).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    record_points: Option<bool>,
    /// Stop once f(x) <= fbar and g(x) <= eps.
    #[arg(long)]
    early_stop: bool,
    /// Output directory; defaults to $SHARP_SUBGRAD_OUT, then `results`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated artifacts: trace_csv, summary_json, instance_json, verify_json.
    #[arg(long, value_delimiter = ',')]
    emit: Option<Vec<Artifact>>,
    #[arg(long, value_enum)]
    scale: Option<Scale>,
}

fn parse_fbar(s: &str) -> Result<FBarSpec, String> {
    s.parse()
}

impl ExperimentFlags {
    /// The flags actually given, shaped like a config document.
    fn to_overrides(&self) -> Value {
        let mut generator = Map::new();
        let mut solver = Map::new();
        let mut top = Map::new();
        let put = |map: &mut Map<String, Value>, key: &str, value: Option<Value>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        put(&mut generator, "family", self.family.clone().map(Value::from));
        put(&mut generator, "variant", self.variant.clone().map(Value::from));
        put(&mut generator, "n", self.n.map(Value::from));
        put(&mut generator, "m", self.m.map(Value::from));
        put(&mut generator, "p", self.p.map(Value::from));
        put(&mut generator, "radius", self.radius.map(Value::from));
        put(&mut generator, "noise_sigma", self.sigma.map(Value::from));
        put(&mut generator, "seed", self.seed.map(Value::from));
        put(&mut generator, "budget", self.budget.map(Value::from));
        put(&mut generator, "floor", self.floor.map(Value::from));
        put(&mut generator, "reference_budget", self.reference_budget.map(Value::from));
        put(&mut solver, "algorithm", self.algo.clone().map(Value::from));
        put(&mut solver, "epsilon", self.eps.map(Value::from));
        put(&mut solver, "fbar", self.fbar.map(|f| Value::from(f.to_string())));
        put(&mut solver, "big_c", self.big_c.map(Value::from));
        put(&mut solver, "gamma0", self.gamma0.map(Value::from));
        put(&mut solver, "max_iters", self.iters.map(Value::from));
        put(
            &mut solver,
            "aggregation",
            self.aggregation.map(|a| match a {
                AggregationArg::Max => json!("max-of-constraints"),
                AggregationArg::FirstViolated => json!("first-violated"),
            }),
        );
        put(&mut solver, "record_points", self.record_points.map(Value::from));
        put(&mut solver, "early_stop", self.early_stop.then_some(Value::Bool(true)));
        put(&mut top, "output_dir", self.out.as_ref().map(|p| json!(p)));
        put(
            &mut top,
            "emit",
            self.emit.as_ref().map(|list| {
                let mut unique = list.clone();
                unique.sort();
                unique.dedup();
                json!(unique)
            }),
        );
        put(&mut top, "scale", self.scale.map(|s| json!(s)));
        top.insert("generator".into(), Value::Object(generator));
        top.insert("solver".into(), Value::Object(solver));
        Value::Object(top)
    }
}

fn load(file: Option<&PathBuf>, flags: &ExperimentFlags) -> CliResult<ExperimentConfig> {
    let doc = file.map(|p| config::read_json_file(p)).transpose()?;
    assemble(doc, flags.to_overrides())
}

fn compare_configs(files: &[PathBuf], algos: &[String], flags: &ExperimentFlags) -> CliResult<Vec<ExperimentConfig>> {
    match (files.len(), algos.is_empty()) {
        (0 | 1, false) => {
            let base = load(files.first(), flags)?;
            Ok(algos
                .iter()
                .map(|a| {
                    let mut c = base.clone();
                    c.solver.algorithm = a.clone();
                    c
                })
                .collect())
        }
        (_, true) => files.iter().map(|f| load(Some(f), flags)).collect(),
        _ => Err(CliError::Config("use either --algos or several --config files, not both".into())),
    }
}

fn dispatch(command: Command) -> CliResult<String> {
    match command {
        Command::Run { config, flags } => {
            let config = load(config.as_ref(), &flags)?;
            let out = cmd_run(&config)?;
            let s = &out.summary;
            Ok(format!(
                "{}: {} iterations (|I| = {}, |J| = {}), final f = {:e}, g = {:e}; wrote {}",
                s.algorithm,
                s.iterations,
                s.productive_steps,
                s.nonproductive_steps,
                s.final_f,
                s.final_g,
                out.dir.display()
            ))
        }
        Command::Compare { config, algos, flags } => {
            let configs = compare_configs(&config, &algos, &flags)?;
            let summary = cmd_compare(&configs)?;
            let lines: Vec<String> = summary
                .solvers
                .iter()
                .map(|e| format!("{}: first eps-solution {}", e.label, e.first_eps_solution))
                .collect();
            Ok(lines.join("\n"))
        }
        Command::Verify { dir, tol } => {
            let report = cmd_verify(&dir, tol)?;
            Ok(format!(
                "verified {} steps against {} reference points{}",
                report.replay.steps,
                report.replay.references,
                if report.theorem.is_some() { " and the rate bound" } else { "" }
            ))
        }
    }
}

/// Parse `args` (program name first), run the subcommand, return the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(message) => {
            println!("{message}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Config(msg) = &e {
                if msg.starts_with("missing --") {
                    let mut cmd = Cli::command();
                    if let Some(run) = cmd.find_subcommand_mut("run") {
                        eprintln!("\n{}", run.render_usage());
                    }
                }
            }
            e.exit_code()
        }
    }
}
