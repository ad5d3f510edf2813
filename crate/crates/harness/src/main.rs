use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fwboost_core::analysis::{
    check_combined_class_bound, convergence_bound_curve, estimate_rademacher, generalization_bound,
    SigmaMode, DEFAULT_DRAWS,
};
use fwboost_core::fwboost::DEFAULT_GAP_TOL;
use fwboost_core::learners::StumpSearchSpace;
use fwboost_core::report::error_metric;
use fwboost_core::step::DEFAULT_LINE_SEARCH_TOL;
use fwboost_core::{Dataset, Ensemble, LossKind, LossModel, StepPolicy, Task};
use fwboost_harness::data::{generate_synthetic, load_atoms, load_csv, write_csv, SyntheticSpec};
use fwboost_harness::experiment::{
    curves_to_long, parse_learner, run_experiment, DataSource, ExperimentConfig,
};
use fwboost_harness::protocol::{
    cross_validate, default_loss, fit, Algorithm, FitSettings, GridSpec, Params, Selection,
};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "fwboost",
    version,
    about = "Frank-Wolfe boosting with l1-constrained stump ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model and save it.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Evaluate(EvaluateArgs),
    /// Repeated split / tune / fit runs with metric files.
    Experiment(ExperimentArgs),
    /// Cross-validate a hyperparameter grid.
    Tune(TuneArgs),
    /// Bound and complexity computations, printed as JSON.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Reshape curves.csv into a long, plot-ready CSV.
    Plot {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with a header row; the last column is the target.
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,
    /// Synthetic generator: step-regression, two-gaussian or separable-stump.
    #[arg(long)]
    synth: Option<String>,
    /// Generator parameter as key=value (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource> {
        match (&self.data, &self.synth) {
            (Some(path), None) => Ok(DataSource::Csv(path.clone())),
            (None, Some(name)) => Ok(DataSource::Synthetic(SyntheticSpec {
                name: name.clone(),
                params: self.params.iter().cloned().collect(),
            })),
            _ => bail!("give either --data <csv> or --synth <generator>"),
        }
    }

    fn load(&self, seed: u64) -> Result<Dataset> {
        Ok(self.source()?.load(seed)?)
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|_| format!("{v:?} is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    s.parse::<LossKind>().map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Schedule,
    #[value(name = "linesearch", alias = "line-search")]
    LineSearch,
}

#[derive(Args, Clone)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "fwboost-r")]
    algo: Algorithm,
    /// squared, lp:<p>, exponential or logistic (default by task).
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    /// stump or oracle:<atoms-file>.
    #[arg(long, default_value = "stump")]
    learner: String,
    /// Number of boosting iterations T.
    #[arg(short = 'T', long, visible_alias = "iters", default_value_t = 100)]
    iterations: usize,
    #[arg(long, value_enum)]
    step: Option<StepArg>,
    /// Stop FW solvers once the gap falls to this value.
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    gap_tol: f64,
    #[arg(long, default_value_t = DEFAULT_LINE_SEARCH_TOL)]
    line_search_tol: f64,
    #[arg(long, default_value_t = 0.2)]
    val_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FitArgs {
    fn settings(&self, task: Task) -> Result<FitSettings> {
        let mut s = FitSettings::new(task, self.iterations);
        s.loss = self.loss.unwrap_or_else(|| default_loss(task));
        s.learner = parse_learner(&self.learner)?;
        s.step = self.step.map(|st| match st {
            StepArg::Schedule => StepPolicy::Schedule,
            StepArg::LineSearch => StepPolicy::LineSearch {
                tol: self.line_search_tol,
            },
        });
        s.gap_tol = self.gap_tol;
        s.val_fraction = self.val_frac;
        s.seed = self.seed;
        Ok(s)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// l1 radius C.
    #[arg(short = 'C', long)]
    capacity: Option<f64>,
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    /// Held-out CSV whose error is tracked per iteration.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Where to save the fitted model (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Where to save per-iteration records (JSON Lines).
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    task: Task,
    loss: LossKind,
    ensemble: Ensemble,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration; other flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    /// Algorithms to compare (repeatable).
    #[arg(long = "algo", value_enum)]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    #[arg(long, default_value_t = 0.5)]
    train_frac: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(short = 'T', long, visible_alias = "iters", default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_loss)]
    loss: Option<LossKind>,
    #[arg(long, default_value = "stump")]
    learner: String,
    #[arg(long, value_enum, default_value = "final")]
    selection: Selection,
    /// Output directory.
    #[arg(long, default_value = "fwboost-out")]
    out: PathBuf,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_delimiter = ',')]
    grid_c: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    grid_shrinkage: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    grid_subsample: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    grid_patience: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, value_enum, default_value = "final")]
    selection: Selection,
}

#[derive(Args, Clone)]
struct SigmaArgs {
    /// Enumerate all 2^m sign vectors (m ≤ 12).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SigmaArgs {
    fn mode(&self) -> SigmaMode {
        if self.exact {
            SigmaMode::Exact
        } else {
            SigmaMode::MonteCarlo {
                draws: self.draws,
                seed: self.seed,
            }
        }
    }
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Empirical Rademacher complexity of an atom list (default: all stumps).
    Rademacher {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        atoms: Option<PathBuf>,
        /// Multiply every atom by this factor.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        sigma: SigmaArgs,
    },
    /// Combined-class complexity against C times the base complexity.
    Combined {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        atoms: PathBuf,
        #[arg(short = 'C', long, default_value_t = 1.0)]
        capacity: f64,
        #[arg(long, default_value_t = 1)]
        terms: usize,
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        #[command(flatten)]
        sigma: SigmaArgs,
    },
    /// Right-hand side of the generalization bound.
    Generalization {
        #[arg(long)]
        empirical_risk: f64,
        #[arg(long)]
        lipschitz: f64,
        #[arg(long)]
        loss_bound: f64,
        #[arg(long)]
        rademacher: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        m: usize,
    },
    /// Convergence-rate bound C*(1+2δ)/(2+t) for t = 1..T.
    Rate {
        #[arg(long, value_parser = parse_loss)]
        loss: LossKind,
        #[arg(short = 'C', long)]
        capacity: f64,
        /// Empirical risk of the zero function.
        #[arg(long)]
        initial_risk: f64,
        #[arg(short = 'T', long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    name: String,
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let data = args.data.load(args.fit.seed)?;
    let test = args.test.as_ref().map(load_csv).transpose()?;
    let settings = args.fit.settings(data.task())?;
    let params = Params {
        capacity: args.capacity,
        shrinkage: args.shrinkage,
        subsample: args.subsample,
        patience: args.patience,
    };
    let report = fit(args.fit.algo, &params, &settings, &data, test.as_ref())?;
    if let Some(path) = &args.records {
        let mut text = String::new();
        for r in &report.records {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.model {
        let model = ModelFile {
            task: data.task(),
            loss: settings.loss,
            ensemble: report.ensemble.clone(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&model)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let last = report.records.last();
    print_json(&serde_json::json!({
        "algorithm": args.fit.algo,
        "iterations": report.records.len(),
        "termination": report.termination,
        "atoms": report.ensemble.len(),
        "l1_norm": report.ensemble.l1_norm(),
        "train_risk": last.map(|r| r.train_risk),
        "train_error": last.map(|r| r.train_error),
        "test_error": last.and_then(|r| r.test_error),
    }))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let model: ModelFile = serde_json::from_str(&text)?;
    let data = args.data.load(args.seed)?;
    if data.task() != model.task {
        bail!(
            "model was trained for {:?} but the data is {:?}",
            model.task,
            data.task()
        );
    }
    let preds = model.ensemble.predict(&data)?;
    let loss = LossModel::new(model.loss, 1.0)?;
    print_json(&serde_json::json!({
        "m": data.len(),
        "error": error_metric(data.task(), &preds, data.targets()),
        "risk": loss.empirical_risk(&preds, data.targets())?,
    }))
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text)?
        }
        None => {
            if args.algos.is_empty() {
                bail!("name at least one --algo");
            }
            let mut c = ExperimentConfig::new(args.data.source()?, &args.algos, args.iterations);
            c.repeats = args.repeats;
            c.train_fraction = args.train_frac;
            c.folds = args.folds;
            c.seed = args.seed;
            c.loss = args.loss;
            c.learner = args.learner.clone();
            c.selection = args.selection;
            c
        }
    };
    if args.dump_config {
        return print_json(&config);
    }
    let result = run_experiment(&config, &args.out)?;
    log::info!("wrote {}", args.out.display());
    print_json(&result.summary.algorithms)
}

fn tune(args: TuneArgs) -> Result<()> {
    let data = args.data.load(args.fit.seed)?;
    let settings = args.fit.settings(data.task())?;
    let custom = GridSpec {
        capacity: args.grid_c.clone(),
        shrinkage: args.grid_shrinkage.clone(),
        subsample: args.grid_subsample.clone(),
        patience: args.grid_patience.clone(),
    };
    let grid = if custom == GridSpec::default() {
        args.fit.algo.default_grid()
    } else {
        custom
    };
    let points = grid.points();
    let outcome = cross_validate(
        &data,
        args.fit.algo,
        &points,
        args.folds,
        &settings,
        args.selection,
        args.fit.seed,
    )?;
    let scores: Vec<_> = points
        .iter()
        .zip(&outcome.scores)
        .map(|(p, s)| serde_json::json!({ "params": p, "score": s }))
        .collect();
    print_json(&serde_json::json!({ "best": outcome.best, "grid": scores }))
}

fn analyze(what: AnalyzeCommand) -> Result<()> {
    match what {
        AnalyzeCommand::Rademacher {
            data,
            atoms,
            scale,
            sigma,
        } => {
            let d = data.load(sigma.seed)?;
            let base = match atoms {
                Some(path) => load_atoms(path)?,
                None => StumpSearchSpace::new(&d).classifiers(),
            };
            let scaled: Vec<_> = base.iter().map(|h| h.scaled(scale)).collect();
            let est = estimate_rademacher(&scaled, &d, sigma.mode())?;
            print_json(
                &serde_json::json!({ "atoms": scaled.len(), "m": d.len(), "rademacher": est }),
            )
        }
        AnalyzeCommand::Combined {
            data,
            atoms,
            capacity,
            terms,
            resolution,
            sigma,
        } => {
            let d = data.load(sigma.seed)?;
            let base = load_atoms(atoms)?;
            let check =
                check_combined_class_bound(&base, capacity, terms, &d, sigma.mode(), resolution)?;
            print_json(&serde_json::json!({ "check": check, "holds": check.holds(0.0) }))
        }
        AnalyzeCommand::Generalization {
            empirical_risk,
            lipschitz,
            loss_bound,
            rademacher,
            delta,
            m,
        } => {
            let bound =
                generalization_bound(empirical_risk, lipschitz, loss_bound, rademacher, delta, m)?;
            print_json(&serde_json::json!({ "bound": bound }))
        }
        AnalyzeCommand::Rate {
            loss,
            capacity,
            initial_risk,
            iterations,
            delta,
        } => {
            let model = LossModel::new(loss, capacity)?;
            let curve = convergence_bound_curve(&model, initial_risk, iterations, delta)?;
            print_json(&serde_json::json!({
                "smoothness": model.smoothness_constant()?,
                "c_star": fwboost_core::analysis::convergence_constant(&model, initial_risk)?,
                "bound": curve,
            }))
        }
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        name: args.name,
        params: args.params.into_iter().collect::<BTreeMap<_, _>>(),
    };
    let data = generate_synthetic(&spec, args.seed)?;
    write_csv(&data, &args.out)?;
    print_json(
        &serde_json::json!({ "rows": data.len(), "features": data.n_features(), "task": data.task() }),
    )
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    fwboost_harness::init_threads()?;
    match Cli::parse().command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
        Command::Tune(a) => tune(a),
        Command::Analyze { what } => analyze(what),
        Command::Synth(a) => synth(a),
        Command::Plot { curves, out } => Ok(curves_to_long(&curves, &out)?),
    }
}
