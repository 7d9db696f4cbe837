use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cgens_core::cg_binary::TrainConfig;
use cgens_core::dataset::{self, Dataset, LabelColumn, SplitSpec};
use cgens_core::error::{Error, Result};
use cgens_core::eval::{self, GridSpec, MethodSpec};
use cgens_core::model::{self, Method, TrainedModel};
use cgens_core::seed;
use cgens_core::weak::Family;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod demo;

/// Seed stream for data splits, kept apart from the learner seeds.
const SPLIT_STREAM: u64 = 0x5350_4c49;

#[derive(Parser)]
#[command(name = "cgens", version, about = "Column-generation SVM ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it with its per-iteration trace.
    Train(TrainCmd),
    /// Write per-sample scores and predicted labels.
    Predict(PredictCmd),
    /// Print the error rate of a model on a labelled file.
    Eval(EvalCmd),
    /// Cross-validate C and the ensemble size over a grid.
    Cv(CvCmd),
    /// Compare methods over repeated train/test splits.
    Bench(BenchCmd),
    /// Toy-data demos.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Count how often each feature is used by the stumps of saved models.
    ReportFeatures(ReportFeaturesCmd),
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Circle-in-Gaussian data: CGEns against AdaBoost.
    Toy2d(demo::Toy2dArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Libsvm,
    Csv,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "libsvm")]
    format: Format,
    /// CSV label column, by index or header name.
    #[arg(long, default_value = "0")]
    label_col: String,
    /// The CSV file starts with a header row.
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        match self.format {
            Format::Libsvm => dataset::load_libsvm(&self.data),
            Format::Csv => {
                let label: LabelColumn = self.label_col.parse().unwrap_or_else(|e| match e {});
                dataset::load_csv(&self.data, &label, self.header)
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Standardize {
    /// On for perceptron and Fourier learners, off for stumps.
    Auto,
    On,
    Off,
}

#[derive(Args, Clone)]
struct LearnArgs {
    #[arg(long, value_parser = parse_family, default_value = "stump")]
    family: Family,
    #[arg(long = "C", allow_hyphen_values = true, value_parser = positive, default_value = "1")]
    c: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = non_negative, default_value = "0.001")]
    epsilon: f64,
    /// Maximum ensemble size (AdaBoost: number of rounds).
    #[arg(long, default_value = "500")]
    jmax: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value = "2000")]
    pool_size: u64,
    /// Fourier frequency bandwidth.
    #[arg(long, allow_hyphen_values = true, value_parser = positive, default_value = "1")]
    sigma: f64,
    #[arg(long, value_enum, default_value = "auto")]
    standardize: Standardize,
    #[arg(long, default_value = "0")]
    seed: u64,
}

impl LearnArgs {
    fn config(&self) -> TrainConfig {
        let mut cfg = TrainConfig::new(self.c).with_family(self.family);
        cfg.epsilon = self.epsilon;
        cfg.j_max = self.jmax;
        cfg.pool.pool_size = self.pool_size as usize;
        cfg.pool.sigma = self.sigma;
        cfg.pool.seed = self.seed;
        cfg.standardize = match self.standardize {
            Standardize::Auto => None,
            Standardize::On => Some(true),
            Standardize::Off => Some(false),
        };
        cfg
    }
}

#[derive(Args)]
struct TrainCmd {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = parse_method, default_value = "cgens")]
    method: Method,
    #[command(flatten)]
    learn: LearnArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PredictCmd {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalCmd {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args)]
struct CvCmd {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = parse_method, default_value = "cgens")]
    method: Method,
    #[command(flatten)]
    learn: LearnArgs,
    /// Comma-separated C grid.
    #[arg(long, value_delimiter = ',', value_parser = positive, default_value = "0.1,1,10")]
    c_values: Vec<f64>,
    /// Comma-separated ensemble-size grid.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,250,500")]
    jmax_values: Vec<usize>,
    #[arg(long, default_value = "5")]
    folds: usize,
    /// Cross-validation table.
    #[arg(long)]
    out: PathBuf,
    /// Also train on all data with the selected setting and save the model.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitKind {
    Holdout,
    Kfold,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated methods, each run with the shared settings.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "cgens,adaboost")]
    methods: Vec<Method>,
    #[command(flatten)]
    learn: LearnArgs,
    #[arg(long, value_enum, default_value = "holdout")]
    split: SplitKind,
    #[arg(long, allow_hyphen_values = true, value_parser = fraction, default_value = "0.6")]
    train_fraction: f64,
    #[arg(long, default_value = "5")]
    folds: usize,
    #[arg(long, default_value = "5")]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportFeaturesCmd {
    /// Glob matching model files.
    #[arg(long)]
    models: String,
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    number(s).and_then(|v| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err("must be > 0".into())
        }
    })
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    number(s).and_then(|v| {
        if v >= 0.0 {
            Ok(v)
        } else {
            Err("must be >= 0".into())
        }
    })
}

fn fraction(s: &str) -> std::result::Result<f64, String> {
    number(s).and_then(|v| {
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err("must lie strictly between 0 and 1".into())
        }
    })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn finish(mut w: impl Write, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn train(cmd: &TrainCmd) -> Result<()> {
    let data = cmd.data.load()?;
    let (model, trace) = model::fit(cmd.method, &data, &cmd.learn.config())?;
    model.save(&cmd.out)?;
    if let Some(path) = &cmd.trace {
        trace.save_csv(path)?;
    }
    let err = model.error(&data)?;
    println!(
        "trained {} with {} learners, train error {err}",
        cmd.method,
        model.learners().len()
    );
    Ok(())
}

fn predict(cmd: &PredictCmd) -> Result<()> {
    let model = TrainedModel::load(&cmd.model)?;
    let data = cmd.data.load()?;
    let preds = model.predict(&data)?;
    let mut out = csv::Writer::from_writer(create(&cmd.out)?);
    let mut header: Vec<String> = if model.method == Method::CgensSls {
        (1..=model.class_count())
            .map(|c| format!("score_{c}"))
            .collect()
    } else {
        vec!["margin".into()]
    };
    header.push("label".into());
    out.write_record(&header)?;
    for p in &preds {
        let mut rec: Vec<String> = p.scores.iter().map(|s| s.to_string()).collect();
        rec.push(dataset::format_label(model.raw_label(p.class)));
        out.write_record(&rec)?;
    }
    let w = out.into_inner().map_err(|e| Error::Io {
        path: cmd.out.clone(),
        source: e.into_error(),
    })?;
    finish(w, &cmd.out)
}

fn eval_cmd(cmd: &EvalCmd) -> Result<()> {
    let model = TrainedModel::load(&cmd.model)?;
    let data = cmd.data.load()?;
    println!("{}", model.error(&data)?);
    Ok(())
}

fn cv(cmd: &CvCmd) -> Result<()> {
    let data = cmd.data.load()?;
    let grid = GridSpec {
        c_values: cmd.c_values.clone(),
        j_max_values: cmd.jmax_values.clone(),
        folds: cmd.folds,
    };
    let base = cmd.learn.config();
    let split_seed = seed::derive(cmd.learn.seed, SPLIT_STREAM);
    let result = eval::cv_select(&data, &grid, cmd.method, &base, split_seed)?;
    let w = create(&cmd.out)?;
    eval::write_cv_csv(&result, w)?;
    println!(
        "best C={} jmax={} cv error {}",
        result.best_c, result.best_j_max, result.best_error
    );
    if let Some(path) = &cmd.model {
        let cfg = TrainConfig {
            c: result.best_c,
            j_max: result.best_j_max,
            ..base
        };
        let (model, _) = model::fit(cmd.method, &data, &cfg)?;
        model.save(path)?;
    }
    Ok(())
}

fn bench(cmd: &BenchCmd) -> Result<()> {
    let data = cmd.data.load()?;
    let base = cmd.learn.config();
    let methods: Vec<MethodSpec> = cmd
        .methods
        .iter()
        .map(|&method| MethodSpec {
            name: method.to_string(),
            method,
            config: base.clone(),
        })
        .collect();
    let seed = seed::derive(cmd.learn.seed, SPLIT_STREAM);
    let split = match cmd.split {
        SplitKind::Holdout => SplitSpec::Holdout {
            train_fraction: cmd.train_fraction,
            seed,
        },
        SplitKind::Kfold => SplitSpec::KFold {
            folds: cmd.folds,
            seed,
        },
    };
    let reports = eval::benchmark(&data, &methods, &split, cmd.repeats)?;
    eval::write_reports_csv(&reports, create(&cmd.out)?)?;
    print!("{}", eval::format_reports_table(&reports));
    Ok(())
}

fn report_features(cmd: &ReportFeaturesCmd) -> Result<()> {
    let pattern = glob::glob(&cmd.models)
        .map_err(|e| Error::InvalidArgument(format!("bad glob {:?}: {e}", cmd.models)))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in pattern {
        paths.push(entry.map_err(|e| Error::Io {
            path: e.path().to_path_buf(),
            source: io::Error::other(e.to_string()),
        })?);
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no model files match {:?}",
            cmd.models
        )));
    }
    let models: Vec<TrainedModel> = paths
        .iter()
        .map(TrainedModel::load)
        .collect::<Result<_>>()?;
    let counts = model::feature_frequency(&models)?;
    let mut out = csv::Writer::from_writer(create(&cmd.out)?);
    out.write_record(["feature", "count", "mean_per_model"])?;
    for (j, &n) in counts.iter().enumerate() {
        out.write_record([
            (j + 1).to_string(),
            n.to_string(),
            (n as f64 / models.len() as f64).to_string(),
        ])?;
    }
    let w = out.into_inner().map_err(|e| Error::Io {
        path: cmd.out.clone(),
        source: e.into_error(),
    })?;
    finish(w, &cmd.out)?;
    println!("counted features over {} models", models.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(c) => train(&c),
        Command::Predict(c) => predict(&c),
        Command::Eval(c) => eval_cmd(&c),
        Command::Cv(c) => cv(&c),
        Command::Bench(c) => bench(&c),
        Command::Demo(DemoCmd::Toy2d(a)) => demo::toy2d(&a),
        Command::ReportFeatures(c) => report_features(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and succeed; real usage
            // errors exit with status 2.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
