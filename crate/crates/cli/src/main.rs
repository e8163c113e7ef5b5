use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gazeread::error_models::DriftModel;
use gazeread::harness::{self, load_scenarios, report_write, ModelSource, RunConfig, DEFAULT_SYNTH_SEED};
use gazeread::layout::{layout_document, LayoutConfig};
use gazeread::llm::{ProviderConfig, ProviderKind};
use gazeread::simulator::{scenario_suite_default, simulate, texts, ScenarioScript};
use gazeread::tracker::{Tracker, TrackerConfig};
use gazeread_service::{bind_and_serve, ServiceConfig, Session};

#[derive(Parser)]
#[command(name = "gazeread", version, about = "Gaze-driven reading tracker: experiments and live service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, track and score a scenario suite.
    Run(RunArgs),
    /// Run a suite twice, with calibration on and off.
    Ablate(RunArgs),
    /// Write scenario scripts and their simulated gaze traces.
    Simulate(SimulateArgs),
    /// Serve a live tracking session over WebSocket.
    Serve(ServeArgs),
    /// Write the synthetic error models in the on-disk format.
    ExportModels {
        #[arg(long, default_value_t = DEFAULT_SYNTH_SEED)]
        synth_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Directory with range.json and vectors.csv.
    #[arg(long, conflicts_with = "synth_seed")]
    models: Option<PathBuf>,
    /// Seed for synthetic models (the default when --models is absent).
    #[arg(long)]
    synth_seed: Option<u64>,
}

impl ModelArgs {
    fn source(&self) -> Result<ModelSource> {
        match (&self.models, self.synth_seed) {
            (Some(dir), _) => {
                if !dir.is_dir() {
                    bail!("model directory {} does not exist", dir.display());
                }
                Ok(ModelSource::Dir(dir.clone()))
            }
            (None, seed) => Ok(ModelSource::Synth { seed: seed.unwrap_or(DEFAULT_SYNTH_SEED) }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Llm {
    Mock,
    External,
    /// Every request times out.
    Timeout,
}

#[derive(Args)]
struct LlmArgs {
    #[arg(long, value_enum, default_value_t = Llm::Mock)]
    llm: Llm,
    /// Chat-completions endpoint for --llm external.
    #[arg(long)]
    llm_endpoint: Option<String>,
    #[arg(long)]
    llm_model: Option<String>,
    #[arg(long)]
    llm_timeout_ms: Option<u64>,
}

impl LlmArgs {
    fn config(&self) -> ProviderConfig {
        let provider = match self.llm {
            Llm::Mock => ProviderKind::Mock,
            Llm::External => ProviderKind::External,
            Llm::Timeout => ProviderKind::Timeout,
        };
        let mut c = ProviderConfig { provider, ..ProviderConfig::default() };
        if let Some(u) = &self.llm_endpoint {
            c.endpoint_url = u.clone();
        }
        if let Some(m) = &self.llm_model {
            c.model_name = m.clone();
        }
        if let Some(t) = self.llm_timeout_ms {
            c.timeout_ms = t;
        }
        c
    }
}

#[derive(Args)]
struct RunArgs {
    /// Directory of scenario JSON files. The built-in suite when omitted.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    calibration: Switch,
    #[command(flatten)]
    llm: LlmArgs,
    /// Drift growth in cm/s. Defaults to the built-in drift model.
    #[arg(long)]
    drift_rate: Option<f64>,
    /// Sleep after every ingested sample, in ms.
    #[arg(long, default_value_t = 0)]
    pacing_ms: u64,
    /// Keep per-scenario event logs and traces under OUT/logs.
    #[arg(long)]
    keep_logs: bool,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(scenarios(self.scenarios.as_deref())?);
        cfg.models = self.models.source()?;
        cfg.tracker.calibration_enabled = matches!(self.calibration, Switch::On);
        cfg.llm = self.llm.config();
        cfg.drift = drift(self.drift_rate);
        cfg.pacing = Duration::from_millis(self.pacing_ms);
        cfg.log_dir = self.keep_logs.then(|| self.out.join("logs"));
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory of scenario JSON files. The built-in suite when omitted.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long)]
    drift_rate: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Plain-text document to lay out. A built-in paragraph when omitted.
    #[arg(long)]
    document: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8765")]
    bind: String,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    calibration: Switch,
    #[command(flatten)]
    llm: LlmArgs,
    /// Interval between full highlight snapshots, in ms.
    #[arg(long, default_value_t = 2000)]
    snapshot_ms: u64,
}

fn scenarios(dir: Option<&Path>) -> Result<Vec<ScenarioScript>> {
    match dir {
        None => Ok(scenario_suite_default()),
        Some(d) => load_scenarios(d).with_context(|| format!("loading scenarios from {}", d.display())),
    }
}

fn drift(rate: Option<f64>) -> DriftModel<f64> {
    rate.map_or_else(DriftModel::default, DriftModel::with_rate)
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let report = harness::run(&cfg)?;
    report_write(&report, &args.out)?;
    print!("{}", report.summary_table());
    Ok(())
}

fn ablate(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let report = harness::ablate(&cfg)?;
    report.write(&args.out)?;
    println!(
        "mean Y error over 120 s: calibrated {:.4} cm, uncalibrated {:.4} cm",
        report.calibrated.mean_y_error(120.0),
        report.uncalibrated.mean_y_error(120.0)
    );
    Ok(())
}

fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let scripts = scenarios(args.scenarios.as_deref())?;
    let models = args.models.source()?.load()?;
    let drift = drift(args.drift_rate);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for s in &scripts {
        let layout = s.build_layout::<f64>()?;
        let trace = simulate(s, &layout, &models.vectors, &drift)?;
        s.write_json(&args.out.join(format!("{}.json", s.name)))?;
        trace.write_csv(&args.out.join(format!("{}.csv", s.name)))?;
    }
    println!("wrote {} scenarios to {}", scripts.len(), args.out.display());
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<()> {
    let text = match &args.document {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => texts::LIGHTHOUSE.to_owned(),
    };
    let layout = layout_document(&text, &LayoutConfig::default())?;
    let models = args.models.source()?.load()?;
    let config = TrackerConfig {
        pixels_per_cm: layout.config.pixels_per_cm,
        calibration_enabled: matches!(args.calibration, Switch::On),
        ..TrackerConfig::default()
    };
    let tracker = Tracker::new(config, Arc::new(layout), models.range, models.vectors, args.llm.config().build())?;
    let session = Session::start(
        tracker,
        ServiceConfig { snapshot_interval: Duration::from_millis(args.snapshot_ms.max(1)), ..ServiceConfig::default() },
    );
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(bind_and_serve(args.bind.as_str(), session, |addr| println!("listening on ws://{addr}")))?;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Ablate(a) => ablate(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Serve(a) => serve(a),
        Command::ExportModels { synth_seed, out } => ModelSource::Synth { seed: *synth_seed }
            .load()
            .and_then(|m| m.write(out))
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
