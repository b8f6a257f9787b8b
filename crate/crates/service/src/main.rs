use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use persq_core::evaluation::{
    error_histogram, loocv, window_sweep, write_fold_metrics, write_histogram, write_per_day,
    write_sweep, FoldTrainer, LinearTrainer, LoocvResult, MlpTrainer, PerSqTrainer,
    DEFAULT_BIN_WIDTH,
};
use persq_core::features::{fit_scaler, window_dataset, WindowLength};
use persq_core::feedback::{FeedbackEngine, FeedbackReport};
use persq_core::ingest::{
    apply_exclusions, discover_sources, parse_sources, pmdata, read_dataset, resample_daily,
    write_dataset, UserSeries,
};
use persq_core::model::{
    load_checkpoint, save_checkpoint, Checkpoint, LinearBaseline, MlpBaseline, ModelKind,
    PerSqModel, CHECKPOINT_VERSION,
};
use persq_core::patterns::{mine_all, write_group_patterns, SqGroup};
use persq_core::synthetic::{carry_over_cohort, write_sources, CohortConfig};
use persq_service::{router, sha256_hex, AppConfig, Snapshot};

#[derive(Parser)]
#[command(
    name = "persq",
    version,
    about = "Personalized sleep-quality prediction, pattern mining and feedback"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "PERSQ_CONFIG")]
    config: Option<PathBuf>,
    /// Canonical dataset directory (overrides the configuration).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SourceFormat {
    /// One directory per user with profile.toml and activity/wellness/sleep CSVs.
    Sources,
    /// The PMData participant layout.
    Pmdata,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelFamily {
    Persq,
    Linear,
    Mlp,
}

impl ModelFamily {
    fn name(self) -> &'static str {
        match self {
            ModelFamily::Persq => "persq",
            ModelFamily::Linear => "linear",
            ModelFamily::Mlp => "mlp",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw sources into the canonical dataset.
    Ingest {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SourceFormat::Sources)]
        format: SourceFormat,
    },
    /// Train a model on every user and write a checkpoint.
    Train {
        /// Previous days in the window.
        #[arg(long)]
        t: Option<i64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_model: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModelFamily::Persq)]
        model: ModelFamily,
    },
    /// Leave-one-user-out evaluation and window sweep.
    Evaluate {
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "persq,linear"
        )]
        models: Vec<ModelFamily>,
        /// Window lengths to sweep, as `1..7` (inclusive) or `0,2,3`.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        t: Option<i64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mine frequent life-event patterns per sleep-quality group.
    Mine {
        #[arg(long)]
        min_support: Option<f64>,
        /// TOML file overriding cut points.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the feedback report for one user-day.
    Feedback {
        #[arg(long)]
        user: String,
        #[arg(long)]
        date: NaiveDate,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded synthetic cohort as raw sources.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        users: usize,
        #[arg(long, default_value_t = 80)]
        days: usize,
        #[arg(long, default_value_t = 2019)]
        seed: u64,
        /// Previous days whose activity drives sleep quality.
        #[arg(long, default_value_t = 3)]
        lag: usize,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
}

/// Exit status 1: bad invocation or configuration.
const USAGE: u8 = 1;
/// Exit status 2: missing or invalid input data.
const DATA: u8 = 2;
/// Exit status 3: failure while computing or writing results.
const RUNTIME: u8 = 3;

struct Failure(u8, anyhow::Error);

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure(USAGE, e.into()))
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure(DATA, e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure(RUNTIME, e.into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(code)
        }
    }
}

/// The error and its causes, skipping causes already quoted in the message.
fn describe(e: &anyhow::Error) -> String {
    let mut message = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !message.contains(&text) {
            message.push_str(": ");
            message.push_str(&text);
        }
    }
    message
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = AppConfig::resolve(cli.config.as_deref()).usage()?;
    if let Some(dir) = cli.dataset {
        config.dataset_dir = dir;
    }
    match cli.command {
        Command::Ingest {
            data_dir,
            out,
            format,
        } => ingest(&data_dir, &out, format),
        Command::Train {
            t,
            seed,
            out_model,
            model,
        } => {
            let t = window(t, &config)?;
            let seed = seed.unwrap_or(config.seed);
            let out = out_model.unwrap_or_else(|| config.model_path.clone());
            train(&config, model, t, seed, &out)
        }
        Command::Evaluate {
            models,
            sweep,
            t,
            out_dir,
        } => {
            let t = window(t, &config)?;
            let sweep = sweep.as_deref().map(parse_sweep).transpose().usage()?;
            let out = out_dir.unwrap_or_else(|| config.output_dir.clone());
            evaluate(&config, &models, t, sweep.as_deref(), &out)
        }
        Command::Mine {
            min_support,
            thresholds,
            out_dir,
        } => {
            let min_support = min_support.unwrap_or(config.min_support_fraction);
            let out = out_dir.unwrap_or_else(|| config.output_dir.clone());
            mine(&config, min_support, thresholds.as_deref(), &out)
        }
        Command::Feedback {
            user,
            date,
            model,
            json,
        } => {
            let path = model.unwrap_or_else(|| config.model_path.clone());
            feedback(&config, &user, date, &path, json)
        }
        Command::Synth {
            out,
            users,
            days,
            seed,
            lag,
        } => {
            let cohort = carry_over_cohort(&CohortConfig {
                users,
                days,
                seed,
                lag,
                ..CohortConfig::default()
            });
            write_sources(&out, &cohort).runtime()?;
            println!(
                "wrote {users} synthetic users ({days} days) to {}",
                out.display()
            );
            Ok(())
        }
        Command::Serve { bind, port } => {
            if let Some(b) = bind {
                config.server.bind = b;
            }
            if let Some(p) = port {
                config.server.port = p;
            }
            config.validate().usage()?;
            serve(&config)
        }
    }
}

fn window(t: Option<i64>, config: &AppConfig) -> Result<WindowLength, Failure> {
    WindowLength::new(t.unwrap_or(config.window_t as i64)).usage()
}

/// `a..b` (inclusive) or a comma-separated list.
fn parse_sweep(spec: &str) -> anyhow::Result<Vec<WindowLength>> {
    let values: Vec<i64> = match spec.split_once("..") {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse()?, b.trim().parse()?);
            if a > b {
                bail!("empty sweep range {spec}");
            }
            (a..=b).collect()
        }
        None => spec
            .split(',')
            .map(|s| s.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("invalid sweep {spec:?}"))?,
    };
    values
        .into_iter()
        .map(|t| Ok(WindowLength::new(t)?))
        .collect()
}

fn load_dataset(config: &AppConfig) -> Result<Vec<UserSeries>, Failure> {
    let dataset = read_dataset(&config.dataset_dir)
        .with_context(|| format!("reading dataset {}", config.dataset_dir.display()))
        .data()?;
    if dataset.is_empty() {
        return Err(anyhow!(
            "dataset {} holds no users",
            config.dataset_dir.display()
        ))
        .data();
    }
    Ok(dataset)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .runtime()?;
    }
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .runtime()
}

fn ingest(data_dir: &Path, out: &Path, format: SourceFormat) -> Result<(), Failure> {
    let series: Vec<UserSeries> = match format {
        SourceFormat::Sources => discover_sources(data_dir)
            .data()?
            .iter()
            .map(|files| resample_daily(&parse_sources(files)?))
            .collect::<Result<_, _>>()
            .data()?,
        SourceFormat::Pmdata => pmdata::discover_participants(data_dir)
            .data()?
            .iter()
            .map(|dir| resample_daily(&pmdata::parse_participant(dir)?))
            .collect::<Result<_, _>>()
            .data()?,
    };
    let outcome = apply_exclusions(series)
        .with_context(|| format!("ingesting {}", data_dir.display()))
        .data()?;
    for e in &outcome.excluded {
        println!("excluded {}: {}", e.user_id, e.reason());
    }
    write_dataset(out, &outcome.retained).runtime()?;
    let days: usize = outcome.retained.iter().map(|s| s.days().len()).sum();
    println!(
        "wrote {} users ({days} days) to {}",
        outcome.retained.len(),
        out.display()
    );
    Ok(())
}

fn train(
    config: &AppConfig,
    family: ModelFamily,
    t: WindowLength,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let dataset = load_dataset(config)?;
    let scaler = fit_scaler(&dataset).data()?;
    let samples = window_dataset(&dataset, &scaler, t).data()?;
    if samples.is_empty() {
        return Err(anyhow!(
            "no complete {}-day windows in the dataset",
            t.span()
        ))
        .data();
    }
    let train_config = config.train_config(seed);
    let checkpoint = match family {
        ModelFamily::Persq => {
            let model_config = persq_core::model::ModelConfig {
                seed,
                ..config.model_config(t.previous_days())
            };
            let mut model = PerSqModel::init(&model_config).usage()?.with_scaler(scaler);
            let report = model
                .train(&samples, &train_config)
                .context("training")
                .runtime()?;
            println!(
                "trained persq on {} windows: {} epochs, best epoch {}, final loss {:.6}",
                samples.len(),
                report.loss_history.len(),
                report.best_epoch,
                report.loss_history.last().copied().unwrap_or(f64::NAN)
            );
            Checkpoint::from_persq(&model).runtime()?
        }
        ModelFamily::Linear => {
            let model = LinearBaseline::fit(&samples, &scaler).runtime()?;
            println!("fitted linear baseline on {} windows", samples.len());
            Checkpoint {
                format_version: CHECKPOINT_VERSION,
                model: ModelKind::Linear(model),
            }
        }
        ModelFamily::Mlp => {
            let (model, report) = MlpBaseline::fit(
                &samples,
                &scaler,
                &MlpBaseline::DEFAULT_HIDDEN,
                &train_config,
            )
            .context("training")
            .runtime()?;
            println!(
                "trained mlp on {} windows: {} epochs, best epoch {}",
                samples.len(),
                report.loss_history.len(),
                report.best_epoch
            );
            Checkpoint {
                format_version: CHECKPOINT_VERSION,
                model: ModelKind::Mlp(model),
            }
        }
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).runtime()?;
    }
    save_checkpoint(out, &checkpoint).runtime()?;
    let bytes = fs::read(out).runtime()?;
    println!("sha256 {}  {}", sha256_hex(&bytes), out.display());
    Ok(())
}

fn trainer(config: &AppConfig, family: ModelFamily) -> Box<dyn FoldTrainer> {
    match family {
        ModelFamily::Persq => Box::new(PerSqTrainer {
            model: config.model_config(config.window_t),
            train: config.train_config(config.seed),
        }),
        ModelFamily::Linear => Box::new(LinearTrainer),
        ModelFamily::Mlp => Box::new(MlpTrainer {
            hidden: MlpBaseline::DEFAULT_HIDDEN.to_vec(),
            train: config.train_config(config.seed),
        }),
    }
}

fn evaluate(
    config: &AppConfig,
    models: &[ModelFamily],
    t: WindowLength,
    sweep: Option<&[WindowLength]>,
    out: &Path,
) -> Result<(), Failure> {
    let dataset = load_dataset(config)?;
    let mut results: Vec<LoocvResult> = Vec::new();
    for family in models {
        let trainer = trainer(config, *family);
        let result = loocv(&dataset, trainer.as_ref(), t)
            .with_context(|| format!("evaluating {}", family.name()))
            .runtime()?;
        let r2 = result
            .aggregate
            .r2
            .map_or_else(|| "NaN".to_string(), |r| format!("{r:.4}"));
        println!(
            "{} t={}: rmse {:.4}, mae {:.4}, r2 {r2}, n {}",
            result.model,
            result.window_t,
            result.aggregate.rmse,
            result.aggregate.mae,
            result.aggregate.n
        );
        let errors: Vec<f64> = result
            .folds
            .iter()
            .flat_map(|f| f.per_day.iter().map(|d| d.error()))
            .collect();
        let mut buf = Vec::new();
        write_histogram(
            &mut buf,
            &error_histogram(&errors, DEFAULT_BIN_WIDTH).runtime()?,
        )
        .runtime()?;
        write_file(&out.join(format!("histogram_{}.csv", family.name())), &buf)?;
        if let Some(ts) = sweep {
            let points = window_sweep(&dataset, trainer.as_ref(), ts).runtime()?;
            for p in &points {
                println!(
                    "{} sweep t={}: rmse {:.4}, mae {:.4}, n {}",
                    family.name(),
                    p.t,
                    p.rmse,
                    p.mae,
                    p.n
                );
            }
            let mut buf = Vec::new();
            write_sweep(&mut buf, family.name(), &points).runtime()?;
            write_file(&out.join(format!("sweep_{}.csv", family.name())), &buf)?;
        }
        results.push(result);
    }
    let mut buf = Vec::new();
    write_fold_metrics(&mut buf, &results).runtime()?;
    write_file(&out.join("fold_metrics.csv"), &buf)?;
    let mut buf = Vec::new();
    write_per_day(&mut buf, &results).runtime()?;
    write_file(&out.join("per_day.csv"), &buf)?;
    println!("wrote results to {}", out.display());
    Ok(())
}

fn mine(
    config: &AppConfig,
    min_support: f64,
    overrides: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let dataset = load_dataset(config)?;
    let thresholds = config.thresholds(&dataset, overrides).data()?;
    let outcome = mine_all(&dataset, &thresholds, min_support).usage()?;
    for group in SqGroup::ALL {
        let mut buf = Vec::new();
        write_group_patterns(&mut buf, &outcome.patterns, group).runtime()?;
        write_file(&out.join(format!("patterns_{group}.csv")), &buf)?;
        println!(
            "{group}: {} days, {} patterns",
            outcome.groups.get(group).len(),
            outcome.patterns.get(group).len()
        );
    }
    write_file(
        &out.join("thresholds.toml"),
        thresholds.to_toml_string().runtime()?.as_bytes(),
    )?;
    println!("wrote patterns to {}", out.display());
    Ok(())
}

fn print_report(report: &FeedbackReport) {
    println!(
        "user {} on {}: predicted sleep quality {:.2} ({})",
        report.user_id, report.target_date, report.predicted_sq, report.sq_group
    );
    match &report.matched_pattern {
        Some(p) => println!(
            "matched {} pattern (support {}): {}",
            p.group,
            p.support_count,
            p.items_string()
        ),
        None => println!("no matching pattern"),
    }
    for item in &report.items {
        println!(
            "- {}: {} -> {}: {}",
            item.parameter, item.current_level, item.target_level, item.message
        );
    }
}

fn feedback(
    config: &AppConfig,
    user: &str,
    date: NaiveDate,
    model_path: &Path,
    json: bool,
) -> Result<(), Failure> {
    if !model_path.is_file() {
        return Err(anyhow!(
            "no trained model at {}; run `persq train` first",
            model_path.display()
        ))
        .data();
    }
    let dataset = load_dataset(config)?;
    let series = dataset
        .iter()
        .find(|s| s.user_id() == user)
        .ok_or_else(|| anyhow!("unknown user {user}"))
        .data()?;
    let model = load_checkpoint(model_path)
        .and_then(Checkpoint::into_predictor)
        .with_context(|| format!("loading {}", model_path.display()))
        .data()?;
    let thresholds = config.thresholds(&dataset, None).data()?;
    let patterns = mine_all(&dataset, &thresholds, config.min_support_fraction)
        .usage()?
        .patterns;
    let engine = FeedbackEngine {
        model: Arc::from(model),
        patterns,
        thresholds,
        catalog: config.catalog().data()?,
    };
    let report = engine.report(series, date).data()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).runtime()?);
    } else {
        print_report(&report);
    }
    Ok(())
}

fn serve(config: &AppConfig) -> Result<(), Failure> {
    let snapshot = Snapshot::load(config).data()?;
    let addr = format!("{}:{}", config.server.bind, config.server.port);
    let app = router(Arc::new(snapshot), &config.server.cors_origins);
    let runtime = tokio::runtime::Runtime::new().runtime()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))
            .runtime()?;
        log::info!("listening on {addr}");
        eprintln!("listening on {addr}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .runtime()
    })
}
