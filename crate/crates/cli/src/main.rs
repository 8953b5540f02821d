//! `labelrank`: generate, featurize, train, predict, evaluate and
//! cross-validate label-ranking models.

mod manifest;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use labelrank::amm::{NuMode, TrainConfig};
use labelrank::baselines::RankPredictor;
use labelrank::experiment::{self, AlgoConfig, Algorithm, CvConfig, TrainedModel};
use labelrank::metrics::evaluate;
use labelrank::pipeline::{self, Demographics, EventLog, PipelineConfig, SyntheticConfig};
use labelrank::{RankedDataset, Ranking};

use manifest::Manifest;

const DEFAULT_TOPK: usize = 10;

#[derive(Parser, Debug)]
#[command(
    name = "labelrank",
    version,
    about = "Label ranking with adaptive multi-hyperplane models"
)]
struct Cli {
    /// Seed for every random choice (shuffles, subsamples, generation).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic event log and demographics table.
    Gen(GenArgs),
    /// Turn an event log into a ranked dataset.
    Featurize(FeaturizeArgs),
    /// Train a model and write it to a file.
    Train(TrainArgs),
    /// Write one predicted ranking per input instance.
    Predict(PredictArgs),
    /// Score predictions against a test set.
    Evaluate(EvaluateArgs),
    /// Compare algorithms by k-fold cross-validation.
    Cv(CvArgs),
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("alpha must be in (0, 1), got {v}"))
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 10_000)]
    users: usize,
    /// Number of categories.
    #[arg(long = "labels", visible_alias = "L", default_value_t = 20)]
    labels: usize,
    #[arg(long, default_value_t = pipeline::DEFAULT_ALPHA, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 120)]
    horizon: i64,
    #[arg(long, default_value_t = 4)]
    prototypes: usize,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Directory for events.tsv, demographics.tsv and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturizeArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    demographics: Option<PathBuf>,
    #[arg(long)]
    t_features: i64,
    #[arg(long)]
    t_labels: i64,
    #[arg(long, default_value_t = pipeline::DEFAULT_ALPHA, value_parser = parse_alpha)]
    alpha: f64,
    /// Include ad-view intensity and recency features.
    #[arg(long)]
    adv: bool,
    #[arg(long, default_value_t = pipeline::DEFAULT_MIN_CATEGORIES)]
    min_categories: usize,
    /// Keep raw feature values instead of scaling each vector to unit norm.
    #[arg(long)]
    no_normalize: bool,
    /// Category count, when the log has no header.
    #[arg(long)]
    labels: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the user id of every output instance, one per line.
    #[arg(long)]
    users_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NuArg {
    Constant,
    InverseRank,
}

impl From<NuArg> for NuMode {
    fn from(n: NuArg) -> NuMode {
        match n {
            NuArg::Constant => NuMode::Constant,
            NuArg::InverseRank => NuMode::InverseRank,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct HyperArgs {
    #[arg(long, default_value_t = TrainConfig::default().lambda)]
    lambda: f64,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, value_enum, default_value_t = NuArg::Constant)]
    nu: NuArg,
    /// Hyperplane budget per class for AMM models.
    #[arg(long, default_value_t = TrainConfig::default().max_weights_per_class)]
    max_weights: usize,
    /// Scale inputs to unit norm inside the model.
    #[arg(long)]
    normalize: bool,
    /// Neighbourhood size for ib-mal.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Training-pool size for ib-mal.
    #[arg(long, default_value_t = 100_000)]
    subsample: usize,
}

impl HyperArgs {
    fn algo_config(&self, seed: u64) -> AlgoConfig {
        AlgoConfig {
            train: TrainConfig {
                lambda: self.lambda,
                epochs: self.epochs,
                seed,
                max_weights_per_class: self.max_weights,
                nu_mode: self.nu.into(),
                l2_normalize: self.normalize,
                ..Default::default()
            },
            neighbors: self.k,
            pool_size: self.subsample,
        }
    }

    fn snapshot(&self) -> serde_json::Value {
        json!({
            "lambda": self.lambda,
            "epochs": self.epochs,
            "nu": NuMode::from(self.nu).name(),
            "max_weights": self.max_weights,
            "normalize": self.normalize,
            "k": self.k,
            "subsample": self.subsample,
        })
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    algo: Algorithm,
    #[command(flatten)]
    hyper: HyperArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Where predictions come from: a model file, or ib-mal over a training set.
#[derive(Args, Debug)]
struct SourceArgs {
    #[arg(long, conflicts_with_all = ["algo", "train"])]
    model: Option<PathBuf>,
    /// Only ib-mal, which has no model file.
    #[arg(long, requires = "train")]
    algo: Option<Algorithm>,
    /// Training set for ib-mal.
    #[arg(long)]
    train: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Score a file of predicted rankings instead of running a model.
    #[arg(long, conflicts_with_all = ["model", "algo", "train"])]
    predictions: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Largest K of the top-K curve; defaults to min(10, L).
    #[arg(long)]
    topk_max: Option<usize>,
    /// Writes `<prefix>.txt` (key=value) and `<prefix>.csv` (top-K curve).
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "amm-rank,pw-lr,lr,ag-mal,central-mal"
    )]
    algos: Vec<Algorithm>,
    /// λ candidates, chosen per fold on a held-out slice of the training part.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.001,0.0001")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    holdout: f64,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Largest K of the top-K curve; defaults to min(10, L).
    #[arg(long)]
    topk_max: Option<usize>,
    /// Writes `<prefix>.summary.csv`, `<prefix>.curves.csv`, `<prefix>.table.txt`.
    #[arg(long)]
    out_prefix: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!(
                "{}",
                msg.lines().next().unwrap_or("error: invalid arguments")
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => cmd_gen(a, seed),
        Command::Featurize(a) => cmd_featurize(a, seed),
        Command::Train(a) => cmd_train(a, seed),
        Command::Predict(a) => cmd_predict(a, seed),
        Command::Evaluate(a) => cmd_evaluate(a, seed),
        Command::Cv(a) => cmd_cv(a, seed),
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    let f = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_dataset(path: &Path) -> Result<RankedDataset> {
    RankedDataset::read(open(path)?).with_context(|| format!("reading dataset {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_gen(a: GenArgs, seed: u64) -> Result<()> {
    let mut m = Manifest::start("gen", seed);
    let cfg = SyntheticConfig {
        n_users: a.users,
        num_labels: a.labels,
        alpha: a.alpha,
        horizon: a.horizon,
        n_prototypes: a.prototypes,
        noise: a.noise,
        seed,
    };
    let (log, demo) = pipeline::generate_synthetic(&cfg)?;
    m.lap("generate");
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    let events_path = a.out_dir.join("events.tsv");
    let demo_path = a.out_dir.join("demographics.tsv");
    let mut w = BufWriter::new(
        fs::File::create(&events_path)
            .with_context(|| format!("cannot write {}", events_path.display()))?,
    );
    log.write(&mut w)?;
    w.flush()?;
    write_file(&demo_path, &demo.to_text())?;
    m.lap("write");
    let (tf, tl) = cfg.default_times();
    m.config(json!({
        "users": a.users,
        "labels": a.labels,
        "alpha": a.alpha,
        "horizon": a.horizon,
        "prototypes": a.prototypes,
        "noise": a.noise,
        "suggested_t_features": tf,
        "suggested_t_labels": tl,
    }));
    m.outputs(&[&events_path, &demo_path]);
    m.write(&a.out_dir.join("manifest.json"))?;
    println!(
        "users={} events={} demographics={}",
        a.users,
        log.events.len(),
        demo.0.len()
    );
    println!("suggested window: --t-features {tf} --t-labels {tl}");
    Ok(())
}

fn cmd_featurize(a: FeaturizeArgs, seed: u64) -> Result<()> {
    let mut m = Manifest::start("featurize", seed);
    if a.t_features >= a.t_labels {
        bail!(
            "--t-features ({}) must be less than --t-labels ({})",
            a.t_features,
            a.t_labels
        );
    }
    let log = EventLog::read(open(&a.events)?, a.labels)
        .with_context(|| format!("reading events {}", a.events.display()))?;
    let demo = match &a.demographics {
        Some(p) => Demographics::read(open(p)?)
            .with_context(|| format!("reading demographics {}", p.display()))?,
        None => Demographics::default(),
    };
    m.lap("read");
    let cfg = PipelineConfig {
        t_features: a.t_features,
        t_labels: a.t_labels,
        alpha: a.alpha,
        min_categories: a.min_categories,
        include_adv: a.adv,
        normalize: !a.no_normalize,
    };
    let (ds, users) = pipeline::build_dataset(&log, &demo, &cfg)?;
    m.lap("featurize");
    let mut w = BufWriter::new(
        fs::File::create(&a.out).with_context(|| format!("cannot write {}", a.out.display()))?,
    );
    ds.write(&mut w)?;
    w.flush()?;
    let mut outputs = vec![a.out.clone()];
    if let Some(p) = &a.users_out {
        let text: String = users.iter().map(|u| format!("{u}\n")).collect();
        write_file(p, &text)?;
        outputs.push(p.clone());
    }
    m.lap("write");
    m.config(json!({
        "t_features": a.t_features,
        "t_labels": a.t_labels,
        "alpha": a.alpha,
        "adv": a.adv,
        "min_categories": a.min_categories,
        "normalize": !a.no_normalize,
        "labels": log.num_labels,
        "dim": ds.dim(),
        "users": ds.len(),
    }));
    let mut inputs = vec![a.events.clone()];
    inputs.extend(a.demographics.clone());
    m.inputs(&inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    m.outputs(&outputs.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    m.write(&with_suffix(&a.out, ".manifest.json"))?;
    println!("L={} d={} users={}", ds.num_labels(), ds.dim(), ds.len());
    Ok(())
}

fn cmd_train(a: TrainArgs, seed: u64) -> Result<()> {
    if a.algo == Algorithm::IbMal {
        bail!("ib-mal has no model file; use `predict` or `evaluate` with --algo ib-mal --train <data>");
    }
    let mut m = Manifest::start("train", seed);
    let ds = read_dataset(&a.data)?;
    m.lap("read");
    let model = experiment::train(a.algo, &ds, &a.hyper.algo_config(seed))?;
    m.lap("train");
    let text = model
        .to_text()
        .expect("trainable algorithms have model files");
    write_file(&a.out, &text)?;
    m.algorithm(a.algo);
    m.config(a.hyper.snapshot());
    if let TrainedModel::Amm(amm) = &model {
        m.extra(
            "weights_per_class",
            json!((0..amm.num_labels())
                .map(|c| amm.num_weights(c))
                .collect::<Vec<_>>()),
        );
    }
    m.inputs(&[&a.data]);
    m.outputs(&[&a.out]);
    m.write(&with_suffix(&a.out, ".manifest.json"))?;
    println!("trained {} on {} instances", a.algo, ds.len());
    Ok(())
}

/// Loads the predictor named by `source`.
fn load_predictor(source: &SourceArgs, seed: u64) -> Result<Box<dyn RankPredictor>> {
    if let Some(path) = &source.model {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let model = TrainedModel::parse_str(&text)
            .with_context(|| format!("reading model {}", path.display()))?;
        return Ok(match model {
            TrainedModel::Amm(m) => Box::new(m),
            TrainedModel::Central(m) => Box::new(m),
            TrainedModel::Grouped(m) => Box::new(m),
            TrainedModel::Knn(m) => Box::new(m),
            TrainedModel::Lr(m) => Box::new(m),
            TrainedModel::Pw(m) => Box::new(m),
        });
    }
    match (source.algo, &source.train) {
        (Some(Algorithm::IbMal), Some(train)) => {
            let ds = read_dataset(train)?;
            let TrainedModel::Knn(knn) =
                experiment::train(Algorithm::IbMal, &ds, &source.hyper.algo_config(seed))?
            else {
                unreachable!("ib-mal trains a nearest-neighbour ranker")
            };
            Ok(Box::new(knn))
        }
        (Some(other), _) => {
            bail!("--algo only selects ib-mal; train {other} first and pass --model")
        }
        _ => bail!("pass --model <file>, or --algo ib-mal --train <data>"),
    }
}

fn source_inputs(source: &SourceArgs) -> Vec<PathBuf> {
    source.model.iter().chain(&source.train).cloned().collect()
}

fn cmd_predict(a: PredictArgs, seed: u64) -> Result<()> {
    let mut m = Manifest::start("predict", seed);
    let model = load_predictor(&a.source, seed)?;
    let ds = read_dataset(&a.data)?;
    m.lap("load");
    let preds = experiment::predict_all(model.as_ref(), &ds)?;
    m.lap("predict");
    let text: String = preds.iter().map(|r| format!("{r}\n")).collect();
    write_file(&a.out, &text)?;
    let mut inputs = source_inputs(&a.source);
    inputs.push(a.data.clone());
    if let Some(algo) = a.source.algo {
        m.algorithm(algo);
        m.config(a.source.hyper.snapshot());
    }
    m.inputs(&inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    m.outputs(&[&a.out]);
    m.write(&with_suffix(&a.out, ".manifest.json"))?;
    println!("wrote {} predictions", preds.len());
    Ok(())
}

fn read_predictions(path: &Path, num_labels: usize) -> Result<Vec<Ranking>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let labels = l
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("{}:{}: bad ranking", path.display(), n + 1))?;
            Ranking::from_one_based(&labels, num_labels)
                .with_context(|| format!("{}:{}", path.display(), n + 1))
        })
        .collect()
}

fn cmd_evaluate(a: EvaluateArgs, seed: u64) -> Result<()> {
    let mut m = Manifest::start("evaluate", seed);
    let ds = read_dataset(&a.data)?;
    let mut inputs = vec![a.data.clone()];
    let preds = match &a.predictions {
        Some(p) => {
            inputs.push(p.clone());
            read_predictions(p, ds.num_labels())?
        }
        None => {
            inputs.extend(source_inputs(&a.source));
            let model = load_predictor(&a.source, seed)?;
            m.lap("load");
            experiment::predict_all(model.as_ref(), &ds)?
        }
    };
    m.lap("predict");
    let topk_max = a.topk_max.unwrap_or(DEFAULT_TOPK.min(ds.num_labels()));
    let report = evaluate(&preds, &ds.truths(), ds.num_labels(), topk_max)?;
    let kv_path = with_suffix(&a.out_prefix, ".txt");
    let csv_path = with_suffix(&a.out_prefix, ".csv");
    write_file(&kv_path, &report.to_key_value())?;
    write_file(&csv_path, &report.to_csv())?;
    if let Some(algo) = a.source.algo {
        m.algorithm(algo);
        m.config(a.source.hyper.snapshot());
    }
    m.extra("topk_max", json!(topk_max));
    m.inputs(&inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>());
    m.outputs(&[&kv_path, &csv_path]);
    m.write(&with_suffix(&a.out_prefix, ".manifest.json"))?;
    println!("dis_error={:.6} n_test={}", report.dis_error, report.n_test);
    Ok(())
}

fn cmd_cv(a: CvArgs, seed: u64) -> Result<()> {
    if a.folds < 2 {
        bail!("--folds must be at least 2, got {}", a.folds);
    }
    if !(a.holdout > 0.0 && a.holdout < 1.0) {
        bail!("--holdout must be in (0, 1), got {}", a.holdout);
    }
    let mut m = Manifest::start("cv", seed);
    let ds = read_dataset(&a.data)?;
    m.lap("read");
    let cfg = CvConfig {
        folds: a.folds,
        seed,
        algorithms: a.algos.clone(),
        lambda_grid: a.lambdas.clone(),
        holdout_fraction: a.holdout,
        base: a.hyper.algo_config(seed),
        topk_max: a.topk_max.unwrap_or(DEFAULT_TOPK.min(ds.num_labels())),
    };
    let report = experiment::cross_validate(&ds, &cfg)?;
    m.lap("cv");
    let summary = with_suffix(&a.out_prefix, ".summary.csv");
    let curves = with_suffix(&a.out_prefix, ".curves.csv");
    let table = with_suffix(&a.out_prefix, ".table.txt");
    write_file(&summary, &report.summary_csv())?;
    write_file(&curves, &report.curves_csv())?;
    write_file(&table, &report.to_table())?;
    let mut snapshot = a.hyper.snapshot();
    if let Some(obj) = snapshot.as_object_mut() {
        obj.remove("lambda");
    }
    snapshot["folds"] = json!(a.folds);
    snapshot["algos"] = json!(a.algos.iter().map(|x| x.name()).collect::<Vec<_>>());
    snapshot["lambdas"] = json!(a.lambdas);
    snapshot["holdout"] = json!(a.holdout);
    snapshot["topk_max"] = json!(cfg.topk_max);
    m.config(snapshot);
    m.inputs(&[&a.data]);
    m.outputs(&[&summary, &curves, &table]);
    m.write(&with_suffix(&a.out_prefix, ".manifest.json"))?;
    print!("{}", report.to_table());
    Ok(())
}
