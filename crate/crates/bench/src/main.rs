use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kfhe::dataset::{load_csv, CsvOptions, LabelColumn};
use kfhe::model_io::{self, SavedModel};
use kfhe::{Dataset, Features, Variant};
use kfhe_bench::config::{DatasetSpec, ExperimentConfig};
use kfhe_bench::{experiment, output, Algorithm};

#[derive(Parser)]
#[command(name = "kfhe", version, about = "Kalman filter boosting ensembles and their benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on a CSV file and save it.
    Train(TrainArgs),
    /// Score a CSV file with a saved model.
    Predict(PredictArgs),
    /// Repeated cross-validation over datasets, algorithms and noise levels.
    Benchmark(GridArgs),
    /// Same grid as `benchmark`, summarized as mean F1 per noise level.
    NoiseSweep(GridArgs),
    /// Train KFHE on whole datasets and write the per-iteration filter trace.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainAlgorithm {
    /// KFHE with the variant chosen by --variant
    Kfhe,
    KfheE,
    KfheL,
    Adaboost,
    Bagging,
    Cart,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    E,
    L,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::E => Variant::Exponential,
            VariantArg::L => Variant::Linear,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    data: PathBuf,
    #[arg(long, value_enum, default_value = "kfhe")]
    algorithm: TrainAlgorithm,
    #[arg(long, value_enum, default_value = "e")]
    variant: VariantArg,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Label column name; defaults to the last column.
    #[arg(long)]
    label: Option<String>,
    /// Model file; defaults to <data>.model.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV for KFHE; defaults to the model path with `.trace.csv`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    tree: TreeArgs,
}

#[derive(Args, Default)]
struct TreeArgs {
    /// 0 means unlimited.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_split: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    min_impurity_decrease: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Bundled dataset name or path to a CSV; repeatable.
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    noise: Vec<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    tree: TreeArgs,
}

#[derive(Args)]
struct TraceArgs {
    /// Bundled dataset names or CSV paths.
    #[arg(required = true)]
    datasets: Vec<String>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Both variants when omitted.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => grid(a, false),
        Command::NoiseSweep(a) => grid(a, true),
        Command::Trace(a) => trace(a),
    }
}

fn apply_tree(section: &mut kfhe_bench::config::TreeSection, args: &TreeArgs) {
    if let Some(v) = args.max_depth {
        section.max_depth = v;
    }
    if let Some(v) = args.min_split {
        section.min_split = v;
    }
    if let Some(v) = args.min_leaf {
        section.min_leaf = v;
    }
    if let Some(v) = args.min_impurity_decrease {
        section.min_impurity_decrease = v;
    }
}

fn dataset_spec(arg: &str) -> DatasetSpec {
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "csv") {
        let name = path.file_stem().map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
        DatasetSpec::File { name, path: path.to_path_buf(), label: None }
    } else {
        DatasetSpec::Name(arg.to_string())
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let options =
        CsvOptions { label: args.label.clone().map_or(LabelColumn::Last, LabelColumn::Name), ..Default::default() };
    let ds = load_csv(&args.data, &options).with_context(|| format!("loading {}", args.data.display()))?;
    let algorithm = match args.algorithm {
        TrainAlgorithm::Kfhe => Algorithm::kfhe(args.variant.into()),
        TrainAlgorithm::KfheE => Algorithm::KfheE,
        TrainAlgorithm::KfheL => Algorithm::KfheL,
        TrainAlgorithm::Adaboost => Algorithm::Adaboost,
        TrainAlgorithm::Bagging => Algorithm::Bagging,
        TrainAlgorithm::Cart => Algorithm::Cart,
    };
    let mut tree = kfhe_bench::config::TreeSection::default();
    apply_tree(&mut tree, &args.tree);
    let params = tree.params();
    params.validate()?;
    let start = Instant::now();
    let trained = algorithm.train(&ds, args.iterations, &params, args.seed)?;
    log::info!("trained {algorithm} in {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    let out = args.out.unwrap_or_else(|| args.data.with_extension("model"));
    let saved = SavedModel::new(trained.model, ds.class_names().to_vec())?;
    fs::write(&out, model_io::to_text(&saved)).with_context(|| format!("writing {}", out.display()))?;
    if let model_io::Model::Kfhe(m) = &saved.model {
        let path = args.trace.unwrap_or_else(|| out.with_extension("trace.csv"));
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        m.write_trace(std::io::BufWriter::new(file))?;
    }
    println!(
        "{}: {} components, {} classes -> {}",
        algorithm,
        saved.model.component_count(),
        ds.class_count(),
        out.display()
    );
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let text = fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let saved = model_io::from_text(&text).with_context(|| format!("parsing {}", args.model.display()))?;
    let bytes = fs::read(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let features = if bytes.iter().all(u8::is_ascii_whitespace) {
        None
    } else {
        let (features, _) = Features::from_csv_reader(bytes.as_slice(), saved.schema())
            .with_context(|| format!("reading features from {}", args.data.display()))?;
        Some(features)
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let header = std::iter::once("row".to_string())
        .chain(saved.class_names.iter().map(|c| format!("score_{c}")))
        .chain(std::iter::once("predicted".to_string()));
    w.write_record(header)?;
    if let Some(features) = features {
        let scores = saved.model.predict_scores(&features)?;
        for (i, row) in scores.iter_rows().enumerate() {
            let class = &saved.class_names[kfhe::scores::argmax(row)];
            let cells = std::iter::once(i.to_string())
                .chain(row.iter().map(f64::to_string))
                .chain(std::iter::once(class.clone()));
            w.write_record(cells)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn grid(args: GridArgs, sweep: bool) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = args.data_dir {
        cfg.data_dir = v;
    }
    if !args.datasets.is_empty() {
        cfg.datasets = args.datasets.iter().map(|d| dataset_spec(d)).collect();
    }
    if !args.algorithms.is_empty() {
        cfg.algorithms = args.algorithms;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    if !args.noise.is_empty() {
        cfg.noise = args.noise;
    }
    if let Some(v) = args.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = args.folds {
        cfg.folds = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    apply_tree(&mut cfg.tree, &args.tree);
    cfg.validate()?;
    let start = Instant::now();
    let outcome = experiment::run(&cfg)?;
    output::write_all(&cfg.out, &outcome, &cfg.algorithms, &cfg.noise, sweep)?;
    println!(
        "{} records, {} failures in {:.1} s -> {}",
        outcome.records.len(),
        outcome.failures.len(),
        start.elapsed().as_secs_f64(),
        cfg.out.display()
    );
    if outcome.records.is_empty() {
        bail!("no cell completed");
    }
    Ok(())
}

fn trace(args: TraceArgs) -> Result<()> {
    let data_dir = args.data_dir.unwrap_or_else(|| PathBuf::from("data"));
    let variants = match args.variant {
        Some(v) => vec![Variant::from(v)],
        None => vec![Variant::Exponential, Variant::Linear],
    };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for d in &args.datasets {
        let spec = dataset_spec(d);
        let ds: Dataset = spec.load(&data_dir)?;
        for &variant in &variants {
            let cfg = kfhe::TrainConfig { iterations: args.iterations, seed: args.seed, ..Default::default() };
            let fit = kfhe::ensemble::train(&ds, &cfg, variant)?;
            let path = args.out.join(format!("trace_{}_kfhe-{}.csv", spec.name(), variant.tag()));
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            fit.model.write_trace(std::io::BufWriter::new(file))?;
            println!("{} -> {}", spec.name(), path.display());
        }
    }
    Ok(())
}
