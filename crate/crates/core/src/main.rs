//! Command-line entry point: data generation, demonstration harvesting,
//! policy training, benchmarking, and report rendering.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use albench::bench::{run_benchmark, BenchConfig, ExperimentResult};
use albench::data::{
    generate_synthetic, load_cache, normalize_minmax, sample_spec_capped, save_cache, Dataset,
};
use albench::demogen::{harvest, HarvestConfig};
use albench::encoding::Metric;
use albench::manifest::{require_artifact, RunManifest};
use albench::policy::{train, DemoCorpus, PolicyNet, TrainConfig, Variant};
use albench::report::{write_report, ReportFormat};
use albench::rng::{stream, tag};
use albench::strategies::StrategyContext;
use albench::{Error, Result};

/// Environment variable naming the default dataset cache directory.
const CACHE_DIR_ENV: &str = "ALBENCH_CACHE_DIR";

#[derive(Parser)]
#[command(name = "albench", version, about = "Active-learning strategy workbench")]
struct Cli {
    /// TOML config file; flag values override it, it overrides defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for harvest/bench (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded synthetic dataset cache files.
    GenData(GenDataArgs),
    /// Harvest expert demonstrations from synthetic datasets.
    Harvest(HarvestArgs),
    /// Train a query policy on a harvested corpus.
    Train(TrainArgs),
    /// Benchmark query strategies on cached datasets and emit a report.
    Bench(BenchArgs),
    /// Re-render the report from a saved benchmark result.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $ALBENCH_CACHE_DIR or ./data).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Upper bounds tightening the sampled parameter ranges.
    #[arg(long)]
    max_samples: Option<usize>,
    #[arg(long)]
    max_features: Option<usize>,
    #[arg(long)]
    max_classes: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GenDataConfig {
    count: usize,
    seed: u64,
    out: PathBuf,
    max_samples: usize,
    max_features: usize,
    max_classes: usize,
}

#[derive(Args)]
struct HarvestArgs {
    /// Policy variant: single or batch.
    #[arg(long)]
    variant: Option<String>,
    /// Number of synthetic datasets to harvest from.
    #[arg(long)]
    alpha: Option<usize>,
    /// Cycles harvested per dataset.
    #[arg(long)]
    beta: Option<usize>,
    /// Candidate actions per state.
    #[arg(long)]
    k: Option<usize>,
    /// Query batch size.
    #[arg(long)]
    b: Option<usize>,
    /// Random candidate draws per pre-sampling step.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "euclidean|cosine")]
    metric_distance: Option<String>,
    /// Output corpus file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus file produced by the harvest stage.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use a softmax output layer instead of per-unit sigmoids.
    #[arg(long)]
    softmax: bool,
    /// Output model file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainFileConfig {
    corpus: PathBuf,
    seed: u64,
    softmax: bool,
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of cached datasets (default: $ALBENCH_CACHE_DIR or ./data).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Query cycles per run.
    #[arg(long)]
    cycles: Option<usize>,
    /// Query batch size.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "euclidean|cosine")]
    metric_distance: Option<String>,
    /// Trained single-variant policy (required for imital-single).
    #[arg(long)]
    model_single: Option<PathBuf>,
    /// Trained batch-variant policy (required for imital-batch).
    #[arg(long)]
    model_batch: Option<PathBuf>,
    /// Output directory for results and the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BenchFileConfig {
    data: PathBuf,
    strategies: Vec<String>,
    repeats: usize,
    cycles: usize,
    b: usize,
    seed: u64,
    metric_distance: String,
    model_single: Option<PathBuf>,
    model_batch: Option<PathBuf>,
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// result.json written by the bench stage.
    #[arg(long)]
    result: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional per-subcommand sections of the TOML config file.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    #[serde(rename = "gen-data", default)]
    gen_data: toml::Table,
    #[serde(default)]
    harvest: toml::Table,
    #[serde(default)]
    train: toml::Table,
    #[serde(default)]
    bench: toml::Table,
    #[serde(default)]
    report: toml::Table,
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let body = fs::read_to_string(p)?;
            toml::from_str(&body).map_err(|e| Error::Config(format!("bad config file: {e}")))
        }
    }
}

/// Resolve one option with defaults < config file < flag precedence.
fn pick<T: Clone, F: FnOnce(&toml::Value) -> Option<T>>(
    flag: Option<T>,
    section: &toml::Table,
    key: &str,
    from_toml: F,
    default: T,
) -> T {
    if let Some(v) = flag {
        return v;
    }
    if let Some(v) = section.get(key).and_then(|v| from_toml(v)) {
        return v;
    }
    default
}

fn pick_usize(flag: Option<usize>, section: &toml::Table, key: &str, default: usize) -> usize {
    pick(flag, section, key, |v| v.as_integer().map(|i| i as usize), default)
}

fn pick_u64(flag: Option<u64>, section: &toml::Table, key: &str, default: u64) -> u64 {
    pick(flag, section, key, |v| v.as_integer().map(|i| i as u64), default)
}

fn pick_string(flag: Option<String>, section: &toml::Table, key: &str, default: &str) -> String {
    pick(flag, section, key, |v| v.as_str().map(String::from), default.to_string())
}

fn pick_path(flag: Option<PathBuf>, section: &toml::Table, key: &str, default: &str) -> PathBuf {
    pick(
        flag,
        section,
        key,
        |v| v.as_str().map(PathBuf::from),
        PathBuf::from(default),
    )
}

fn default_cache_dir() -> String {
    std::env::var(CACHE_DIR_ENV).unwrap_or_else(|_| "data".to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size worker pool: {e}")))?;
    }
    let file = load_file_config(&cli.config)?;
    match cli.command {
        Command::GenData(args) => cmd_gen_data(args, &file.gen_data),
        Command::Harvest(args) => cmd_harvest(args, &file.harvest),
        Command::Train(args) => cmd_train(args, &file.train),
        Command::Bench(args) => cmd_bench(args, &file.bench),
        Command::Report(args) => cmd_report(args, &file.report),
    }
}

fn cmd_gen_data(args: GenDataArgs, section: &toml::Table) -> Result<ExitCode> {
    let cfg = GenDataConfig {
        count: pick_usize(args.count, section, "count", 10),
        seed: pick_u64(args.seed, section, "seed", 0),
        out: pick_path(args.out, section, "out", &default_cache_dir()),
        max_samples: pick_usize(args.max_samples, section, "max_samples", usize::MAX),
        max_features: pick_usize(args.max_features, section, "max_features", usize::MAX),
        max_classes: pick_usize(args.max_classes, section, "max_classes", usize::MAX),
    };
    if cfg.count == 0 {
        return Err(Error::Config("--count must be positive".into()));
    }
    fs::create_dir_all(&cfg.out)?;
    let mut manifest = RunManifest::new("gen-data", cfg.seed, &cfg)?;
    let mut total_samples = 0usize;
    for i in 0..cfg.count {
        let mut rng = stream(cfg.seed, &[tag("gendata"), i as u64]);
        let spec = sample_spec_capped(&mut rng, cfg.max_samples, cfg.max_features, cfg.max_classes);
        let dataset = normalize_minmax(&generate_synthetic(&spec)?);
        let path = cfg.out.join(format!("{:05}-{}.alds", i, dataset.name));
        save_cache(&dataset, &path)?;
        total_samples += dataset.labels.len();
        manifest.push_output(path, true);
    }
    manifest.save(&cfg.out)?;
    println!(
        "wrote {} datasets ({} samples total) to {}",
        cfg.count,
        total_samples,
        cfg.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_harvest(args: HarvestArgs, section: &toml::Table) -> Result<ExitCode> {
    let variant = Variant::parse(&pick_string(args.variant, section, "variant", "single"))?;
    let metric = pick_string(args.metric_distance, section, "metric_distance", "euclidean");
    Metric::parse(&metric)?;
    let mut cfg = HarvestConfig::new(variant, 0);
    cfg.alpha = pick_usize(args.alpha, section, "alpha", cfg.alpha);
    cfg.beta = pick_usize(args.beta, section, "beta", cfg.beta);
    cfg.k = pick_usize(args.k, section, "k", cfg.k);
    cfg.b = pick_usize(args.b, section, "b", cfg.b);
    cfg.j = pick_usize(args.j, section, "j", cfg.j);
    cfg.seed = pick_u64(args.seed, section, "seed", 0);
    cfg.metric = Metric::parse(&metric)?;
    let out = pick_path(args.out, section, "out", "corpus.aldc");

    let corpus = harvest(&cfg)?;
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    corpus.save(&out)?;
    let mut manifest = RunManifest::new("harvest", cfg.seed, &cfg)?;
    manifest.push_output(&out, true);
    manifest.save(out.parent().unwrap_or(Path::new(".")))?;
    println!(
        "harvested {} records ({} variant) to {}",
        corpus.inputs.len(),
        variant.name(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(args: TrainArgs, section: &toml::Table) -> Result<ExitCode> {
    let cfg = TrainFileConfig {
        corpus: pick_path(args.corpus, section, "corpus", "corpus.aldc"),
        seed: pick_u64(args.seed, section, "seed", 0),
        softmax: args.softmax
            || section
                .get("softmax")
                .and_then(|v| v.as_bool())
                .unwrap_or(false),
        out: pick_path(args.out, section, "out", "policy.alpol"),
    };
    require_artifact(&cfg.corpus, "harvest")?;
    let corpus = DemoCorpus::load(&cfg.corpus)?;
    let train_cfg = TrainConfig {
        output_softmax: cfg.softmax,
        ..TrainConfig::default()
    };
    let (net, log) = train(&corpus, &train_cfg, cfg.seed)?;
    if let Some(dir) = cfg.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    net.save(&cfg.out)?;
    let mut manifest = RunManifest::new("train", cfg.seed, &cfg)?;
    manifest.push_output(&cfg.out, true);
    manifest.save(cfg.out.parent().unwrap_or(Path::new(".")))?;
    println!(
        "trained {} epochs, final validation MSE {}, model at {}",
        log.epochs.len(),
        log.epochs.last().map(|e| e.val_loss).unwrap_or(f64::NAN),
        cfg.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_datasets(dir: &Path) -> Result<Vec<Arc<Dataset>>> {
    require_artifact(dir, "gen-data")?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "alds").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::MissingArtifact(format!(
            "no dataset cache files in {}; run the `gen-data` stage first",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| load_cache(p).map(Arc::new))
        .collect()
}

fn cmd_bench(args: BenchArgs, section: &toml::Table) -> Result<ExitCode> {
    let cfg = BenchFileConfig {
        data: pick_path(args.data, section, "data", &default_cache_dir()),
        strategies: match args.strategies {
            Some(s) => s,
            None => section
                .get("strategies")
                .and_then(|v| v.as_array())
                .map(|a| {
                    a.iter()
                        .filter_map(|v| v.as_str().map(String::from))
                        .collect()
                })
                .unwrap_or_else(|| BenchConfig::default().strategies),
        },
        repeats: pick_usize(args.repeats, section, "repeats", 3),
        cycles: pick_usize(args.cycles, section, "cycles", 50),
        b: pick_usize(args.b, section, "b", 5),
        seed: pick_u64(args.seed, section, "seed", 0),
        metric_distance: pick_string(args.metric_distance, section, "metric_distance", "euclidean"),
        model_single: args.model_single.or_else(|| {
            section
                .get("model_single")
                .and_then(|v| v.as_str())
                .map(PathBuf::from)
        }),
        model_batch: args.model_batch.or_else(|| {
            section
                .get("model_batch")
                .and_then(|v| v.as_str())
                .map(PathBuf::from)
        }),
        out: pick_path(args.out, section, "out", "results"),
    };

    let datasets = load_datasets(&cfg.data)?;
    let mut ctx = StrategyContext {
        metric: Metric::parse(&cfg.metric_distance)?,
        ..StrategyContext::default()
    };
    if cfg.strategies.iter().any(|s| s == "imital-single") {
        let path = cfg.model_single.as_ref().ok_or_else(|| {
            Error::MissingArtifact(
                "imital-single needs --model-single; run the `train` stage first".into(),
            )
        })?;
        require_artifact(path, "train")?;
        ctx.policy_single = Some(Arc::new(PolicyNet::load(path)?));
    }
    if cfg.strategies.iter().any(|s| s == "imital-batch") {
        let path = cfg.model_batch.as_ref().ok_or_else(|| {
            Error::MissingArtifact(
                "imital-batch needs --model-batch; run the `train` stage first".into(),
            )
        })?;
        require_artifact(path, "train")?;
        ctx.policy_batch = Some(Arc::new(PolicyNet::load(path)?));
    }

    let bench_cfg = BenchConfig {
        strategies: cfg.strategies.clone(),
        repeats: cfg.repeats,
        test_fraction: 0.5,
        seed: cfg.seed,
        run: albench::cycle::ALRunConfig {
            b: cfg.b,
            max_cycles: cfg.cycles,
            ..albench::cycle::ALRunConfig::default()
        },
    };
    let result = run_benchmark(&datasets, &bench_cfg, &ctx)?;

    fs::create_dir_all(&cfg.out)?;
    let mut manifest = RunManifest::new("bench", cfg.seed, &cfg)?;
    let result_path = cfg.out.join("result.json");
    let body = serde_json::to_string(&result)
        .map_err(|e| Error::Config(format!("cannot serialize result: {e}")))?;
    fs::write(&result_path, body)?;
    manifest.push_output(&result_path, false);
    for file in write_report(&result, &cfg.out, ReportFormat::Svg)? {
        manifest.push_output(file.path, file.primary);
    }
    manifest.save(&cfg.out)?;

    print!("{}", albench::report::render_rank_table(&result));
    if result.all_complete() {
        println!("all {} runs completed", result.runs.len());
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &result.failures {
            eprintln!(
                "failed: {} / {} repeat {}: {}",
                f.dataset, f.strategy, f.repeat, f.message
            );
        }
        eprintln!("{} of {} runs failed", result.failures.len(), result.runs.len() + result.failures.len());
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_report(args: ReportArgs, section: &toml::Table) -> Result<ExitCode> {
    let result_path = pick_path(args.result, section, "result", "results/result.json");
    let format = ReportFormat::parse(&pick_string(args.format, section, "format", "svg"))?;
    let out = pick_path(args.out, section, "out", "results");
    require_artifact(&result_path, "bench")?;
    let body = fs::read_to_string(&result_path)?;
    let result: ExperimentResult = serde_json::from_str(&body)
        .map_err(|e| Error::Config(format!("malformed result file: {e}")))?;
    let files = write_report(&result, &out, format)?;
    println!("wrote {} report files to {}", files.len(), out.display());
    Ok(ExitCode::SUCCESS)
}
