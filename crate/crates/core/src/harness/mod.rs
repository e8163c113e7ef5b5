//! Experiment runner: simulate, track, score.

pub mod metrics;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use metrics::{scenario_metrics, Bucket, Distribution, JumpTable, ScenarioMetrics, Tally};
pub use report::{report_write, AblationReport, JumpRow, LatencySummary, MetricsReport, ScenarioSummary, TimelinePoint};

use crate::error::{Error, Result};
use crate::error_models::{synth_default_models, DriftModel, ErrorRangeModel, ErrorVectorModel};
use crate::layout::DocumentLayout;
use crate::llm::ProviderConfig;
use crate::simulator::{simulate, GroundTruthTrace, ScenarioScript};
use crate::tracker::{read_event_log, write_event_log, ElectionTiming, EventRecord, Tracker, TrackerConfig};

pub const DEFAULT_SYNTH_SEED: u64 = 42;
pub const RANGE_FILE: &str = "range.json";
pub const VECTORS_FILE: &str = "vectors.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Synth { seed: u64 },
    /// Directory holding `range.json` and `vectors.csv`.
    Dir(PathBuf),
}

impl ModelSource {
    pub fn load(&self) -> Result<Models> {
        let (range, vectors) = match self {
            Self::Synth { seed } => synth_default_models(*seed),
            Self::Dir(dir) => (
                ErrorRangeModel::read_json(&dir.join(RANGE_FILE))?,
                ErrorVectorModel::read_csv(&dir.join(VECTORS_FILE))?,
            ),
        };
        Ok(Models { range: Arc::new(range), vectors: Arc::new(vectors) })
    }

    fn describe(&self) -> String {
        match self {
            Self::Synth { seed } => format!("synth:{seed}"),
            Self::Dir(d) => format!("dir:{}", d.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Models {
    pub range: Arc<ErrorRangeModel<f64>>,
    pub vectors: Arc<ErrorVectorModel<f64>>,
}

impl Models {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.range.write_json(&dir.join(RANGE_FILE))?;
        self.vectors.write_csv(&dir.join(VECTORS_FILE))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenarios: Vec<ScenarioScript>,
    pub models: ModelSource,
    /// `pixels_per_cm` is overridden per scenario from its layout.
    pub tracker: TrackerConfig<f64>,
    pub llm: ProviderConfig,
    pub drift: DriftModel<f64>,
    /// Sleep after every ingest, as a live loop would.
    pub pacing: Duration,
    /// Where to keep per-scenario event logs and traces, if anywhere.
    pub log_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(scenarios: Vec<ScenarioScript>) -> Self {
        Self {
            scenarios,
            models: ModelSource::Synth { seed: DEFAULT_SYNTH_SEED },
            tracker: TrackerConfig::default(),
            llm: ProviderConfig::mock(),
            drift: DriftModel::default(),
            pacing: Duration::ZERO,
            log_dir: None,
        }
    }
}

/// Reads every `*.json` scenario in `dir`, sorted by file name.
pub fn load_scenarios(dir: &Path) -> Result<Vec<ScenarioScript>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| ScenarioScript::read_json(p)).collect()
}

/// Everything one scenario produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: String,
    pub seed: u64,
    pub jumps_scripted: usize,
    pub layout: Arc<DocumentLayout<f64>>,
    pub trace: GroundTruthTrace<f64>,
    pub events: Vec<EventRecord>,
    pub ingest_times: Vec<Duration>,
    pub elections: Vec<ElectionTiming>,
}

pub fn run_scenario(script: &ScenarioScript, models: &Models, cfg: &RunConfig) -> Result<ScenarioOutcome> {
    let layout = Arc::new(script.build_layout::<f64>()?);
    let trace = simulate(script, &layout, &models.vectors, &cfg.drift)?;
    let tc = TrackerConfig { pixels_per_cm: layout.config.pixels_per_cm, ..cfg.tracker.clone() };
    let mut tracker = Tracker::new(tc, layout.clone(), models.range.clone(), models.vectors.clone(), cfg.llm.build())?;
    let mut events = Vec::new();
    let mut ingest_times = Vec::with_capacity(trace.len());
    let mut elections = Vec::new();
    for s in &trace.samples {
        let started = Instant::now();
        let out = tracker.ingest(*s)?;
        let took = started.elapsed();
        match tracker.take_election_timing() {
            Some(t) => elections.push(t),
            None => ingest_times.push(took),
        }
        events.extend(out.into_iter().map(|event| EventRecord { t_ms: s.t_ms, event }));
        if !cfg.pacing.is_zero() {
            std::thread::sleep(cfg.pacing);
        }
    }
    let outcome = ScenarioOutcome {
        name: script.name.clone(),
        seed: script.seed,
        jumps_scripted: script.jump_count(),
        layout,
        trace,
        events,
        ingest_times,
        elections,
    };
    if let Some(dir) = &cfg.log_dir {
        let d = dir.join(&outcome.name);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        write_event_log(&d.join("events.jsonl"), &outcome.events)?;
        outcome.trace.write_csv(&d.join("trace.csv"))?;
    }
    Ok(outcome)
}

pub fn run_outcomes(cfg: &RunConfig) -> Result<Vec<ScenarioOutcome>> {
    if cfg.scenarios.is_empty() {
        return Err(Error::NoScenarios);
    }
    cfg.drift.validate()?;
    let models = cfg.models.load()?;
    cfg.scenarios.par_iter().map(|s| run_scenario(s, &models, cfg)).collect()
}

pub fn run(cfg: &RunConfig) -> Result<MetricsReport> {
    let outcomes = run_outcomes(cfg)?;
    Ok(build_report(cfg, &outcomes))
}

/// Aggregates scenario outcomes in order.
pub fn build_report(cfg: &RunConfig, outcomes: &[ScenarioOutcome]) -> MetricsReport {
    let per: Vec<ScenarioMetrics> = outcomes
        .par_iter()
        .map(|o| scenario_metrics(&o.layout, &o.trace, &o.events))
        .collect();
    let mut linear = Vec::new();
    let mut jumps = JumpTable::default();
    let mut y_bins = metrics::YErrorBins::default();
    let mut scenarios = Vec::new();
    let (mut detected, mut forced) = (0, 0);
    for (o, m) in outcomes.iter().zip(&per) {
        scenarios.push(ScenarioSummary {
            name: o.name.clone(),
            seed: o.seed,
            samples: o.trace.len(),
            jumps_scripted: o.jumps_scripted,
            jumps_detected: m.jumps_detected,
            relocations: m.jumps.overall.total,
            relocations_correct: m.jumps.overall.correct,
            linear_error_mean_cm: Distribution::from_values(m.linear_errors_cm.clone()).mean,
        });
        linear.extend_from_slice(&m.linear_errors_cm);
        jumps.merge(&m.jumps);
        y_bins.merge(&m.y_bins);
        detected += m.jumps_detected;
        forced += m.forced_relocations;
    }
    let ingest: Vec<Duration> = outcomes.iter().flat_map(|o| o.ingest_times.iter().copied()).collect();
    let elections: Vec<ElectionTiming> = outcomes.iter().flat_map(|o| o.elections.iter().copied()).collect();
    MetricsReport {
        scenario_count: outcomes.len(),
        calibration_enabled: cfg.tracker.calibration_enabled,
        llm_provider: format!("{:?}", cfg.llm.provider).to_lowercase(),
        model_source: cfg.models.describe(),
        linear_error_cm: Distribution::from_values(linear),
        jump_accuracy: MetricsReport::jump_rows(&jumps),
        jumps_scripted: outcomes.iter().map(|o| o.jumps_scripted).sum(),
        jumps_detected: detected,
        y_error_timeline: MetricsReport::timeline(&y_bins),
        force_relocation_count: forced,
        scenarios,
        latency: LatencySummary::from_timings(&ingest, &elections),
    }
}

/// Rebuilds the report from the logs a run left in `cfg.log_dir`.
pub fn report_from_logs(cfg: &RunConfig) -> Result<MetricsReport> {
    let dir = cfg.log_dir.as_ref().ok_or_else(|| Error::Config("no log directory configured".into()))?;
    if cfg.scenarios.is_empty() {
        return Err(Error::NoScenarios);
    }
    let outcomes = cfg
        .scenarios
        .iter()
        .map(|s| {
            let d = dir.join(&s.name);
            Ok(ScenarioOutcome {
                name: s.name.clone(),
                seed: s.seed,
                jumps_scripted: s.jump_count(),
                layout: Arc::new(s.build_layout()?),
                trace: GroundTruthTrace::read_csv(&d.join("trace.csv"))?,
                events: read_event_log(&d.join("events.jsonl"))?,
                ingest_times: Vec::new(),
                elections: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(build_report(cfg, &outcomes))
}

/// Same scenarios and seeds with calibration on and off.
pub fn ablate(cfg: &RunConfig) -> Result<AblationReport> {
    let arm = |on: bool| {
        let mut c = cfg.clone();
        c.tracker.calibration_enabled = on;
        c.log_dir = cfg.log_dir.as_ref().map(|d| d.join(if on { "calibrated" } else { "uncalibrated" }));
        run(&c)
    };
    Ok(AblationReport { calibrated: arm(true)?, uncalibrated: arm(false)? })
}
