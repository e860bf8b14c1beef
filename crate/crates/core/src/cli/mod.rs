//! Command-line front end: `fit`, `predict`, `eval`, `simulate`, `check`.
//!
//! Exit codes: 0 success, 2 usage or parse errors, 3 solver failures,
//! 4 undefined metrics. Every error is one line on stderr starting with
//! `error:`.

mod config;
mod dataset;
mod model_file;

pub use config::{parse_config, ExperimentConfig};
pub use dataset::Dataset;
pub use model_file::ModelFile;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::estimators::{fit, EstimatorKind, FitOptions, Fitted, OptConfig, TmoLoss};
use crate::inference::{point_predict, MetricTarget, DEFAULT_SAMPLES};
use crate::linalg::dot;
use crate::linear_model::{FixedDesign, ParamSpace, ParamVector};
use crate::metrics::{evaluate, Metric};
use crate::simharness::{check_assumptions, run_trials, RiskTable};
use crate::{rng, Error, Result};

#[derive(Parser)]
#[command(name = "mlelab", version, about = "Target-metric optimization and MLE with post-hoc inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV dataset and write a model file.
    Fit(FitArgs),
    /// Predict with a model file.
    Predict(PredictArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Run a Monte-Carlo experiment described by a config file.
    Simulate(SimulateArgs),
    /// Report design diagnostics for a parameter vector.
    Check(CheckArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: Option<String>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    model: EstimatorKind,
    /// ZNBP Pareto tail.
    #[arg(long, default_value_t = 4.0)]
    alpha: f64,
    /// Pareto tail for pareto-mle.
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Quantile level for tmo-pinball.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    huber_delta: Option<f64>,
    #[arg(long, default_value_t = 1e6)]
    w: f64,
    #[arg(long, default_value_t = 1e-6)]
    gamma: f64,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    metric: Option<MetricTarget>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Truth column; defaults to `y`, or the only column.
    #[arg(long)]
    response: Option<String>,
    #[arg(long)]
    metric: Metric,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    data: PathBuf,
    /// Column to drop before the check.
    #[arg(long)]
    response: Option<String>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value_t = 1e6)]
    w: f64,
    #[arg(long, default_value_t = 1e-6)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Comma-separated coordinates of θ*.
    #[arg(long)]
    theta_star: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MapeUndefined | Error::WapeUndefined => 4,
        Error::ProjectionFailed { .. }
        | Error::RankDeficient(_)
        | Error::NoFeasiblePareto
        | Error::InsufficientSamples { .. }
        | Error::NonFiniteGradient { .. }
        | Error::NoPositiveMass
        | Error::DesignInfeasible { .. } => 3,
        _ => 2,
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return 2;
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            exit_code(&e)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let response = a.response.as_deref().ok_or_else(|| Error::Parse("response column required".into()))?;
    let data = Dataset::load(&a.data, Some(response), a.id.as_deref())?;
    let y = data.response.clone().expect("response column loaded");
    let design = FixedDesign::from_rows(&data.rows)?;
    let kind = match a.model {
        EstimatorKind::Tmo(TmoLoss::Huber(_)) if a.huber_delta.is_some() => {
            EstimatorKind::Tmo(TmoLoss::huber(a.huber_delta.unwrap_or_default())?)
        }
        EstimatorKind::Tmo(TmoLoss::Pinball(_)) if a.q.is_some() => EstimatorKind::Tmo(TmoLoss::pinball(a.q.unwrap_or_default())?),
        k => k,
    };
    let mut opt = OptConfig::with_seed(a.seed);
    if let Some(m) = a.max_iters {
        opt.max_iters = m;
    }
    let opts = FitOptions { opt, delta: a.delta, pareto_tail: a.b, znbp_tail: a.alpha };
    let space = ParamSpace::new(a.w, a.gamma)?;
    let report = fit(kind, &design, &y, &space, &opts)?;
    if !report.converged {
        eprintln!(
            "warning: {kind} stopped after {} iterations without meeting its tolerance (last {:.3e})",
            report.iterations, report.gradient_norm
        );
    }
    let model = ModelFile { kind, features: data.feature_names, params: report.params };
    write_file(&a.out, &model.render())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let model = ModelFile::parse(&read_file(&a.model)?)?;
    let data = Dataset::load(&a.data, None, a.id.as_deref())?;
    let rows = data.select(&model.features)?;
    let preds: Vec<f64> = match &model.params {
        Fitted::Theta(theta) => {
            if a.metric.is_some() {
                eprintln!("warning: --metric is ignored for point-estimate model {}", model.kind);
            }
            rows.iter().map(|r| dot(r, theta.as_slice())).collect()
        }
        Fitted::Layer(layer) => {
            let target = a.metric.ok_or_else(|| Error::Parse("--metric is required for znbp models".into()))?;
            rows.iter()
                .enumerate()
                .map(|(i, r)| point_predict(layer, r, target, a.samples, rng::split(a.seed, i as u64).random()))
                .collect::<Result<_>>()?
        }
    };
    let mut out = String::new();
    match &data.ids {
        Some(ids) => {
            out.push_str("id,prediction\n");
            for (id, p) in ids.iter().zip(&preds) {
                let _ = writeln!(out, "{id},{p}");
            }
        }
        None => {
            out.push_str("prediction\n");
            for p in &preds {
                let _ = writeln!(out, "{p}");
            }
        }
    }
    match &a.out {
        Some(path) => write_file(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn header_columns(path: &Path) -> Result<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(reader.headers()?.iter().map(|h| h.trim().to_string()).collect())
}

/// Column `name` of a CSV; a column called `id` is skipped rather than parsed.
fn load_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let id = header_columns(path)?.iter().any(|c| c == "id" && name != "id").then_some("id");
    Ok(Dataset::load(path, Some(name), id)?.response.expect("column loaded"))
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let yhat = load_column(&a.pred, "prediction")?;
    let column = match a.response {
        Some(c) => c,
        None => {
            let cols: Vec<String> = header_columns(&a.truth)?.into_iter().filter(|c| c != "id").collect();
            if cols.iter().any(|c| c == "y") {
                "y".to_string()
            } else if cols.len() == 1 {
                cols[0].clone()
            } else {
                return Err(Error::Parse("response column required".into()));
            }
        }
    };
    let y = load_column(&a.truth, &column)?;
    if y.len() != yhat.len() {
        return Err(Error::Parse(format!("truth has {} rows but predictions have {}", y.len(), yhat.len())));
    }
    let v = evaluate(a.metric, &y, &yhat)?;
    println!("{},{},{}", v.name, v.value, v.n_used);
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = parse_config(&read_file(&a.config)?)?;
    let tables: Vec<RiskTable> = cfg.runs.iter().map(run_trials).collect::<Result<_>>()?;
    let mut csv = format!("{}\n", RiskTable::CSV_HEADER);
    let mut md = String::new();
    for t in &tables {
        csv.push_str(&t.csv_rows());
        md.push_str(&t.to_markdown());
        md.push('\n');
    }
    if let Some(path) = &cfg.output_path {
        write_file(path, &csv)?;
        write_file(&path.with_extension("md"), &md)?;
    }
    print!("{md}");
    Ok(())
}

fn cmd_check(a: CheckArgs) -> Result<()> {
    let data = Dataset::load(&a.data, a.response.as_deref(), a.id.as_deref())?;
    let design = FixedDesign::from_rows(&data.rows)?;
    let theta: Vec<f64> = a
        .theta_star
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad --theta-star entry '{s}'"))))
        .collect::<Result<_>>()?;
    if theta.len() != design.d() {
        return Err(Error::Parse(format!("--theta-star has {} entries for {} features", theta.len(), design.d())));
    }
    let space = ParamSpace::new(a.w, a.gamma)?;
    let report = check_assumptions(&design, &ParamVector::new(theta)?, &space, a.delta);
    println!("{report}");
    Ok(())
}
