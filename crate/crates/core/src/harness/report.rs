use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::metrics::{Bucket, Distribution, JumpTable, Tally, YErrorBins, TIMELINE_BIN_S};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRow {
    pub bucket: String,
    pub correct: usize,
    pub total: usize,
    /// Fraction correct, or `"n/a"` for an empty bucket.
    pub accuracy: Value,
}

impl JumpRow {
    fn new(bucket: &str, t: Tally) -> Self {
        Self {
            bucket: bucket.to_owned(),
            correct: t.correct,
            total: t.total,
            accuracy: t.accuracy().map_or_else(|| Value::from("n/a"), Value::from),
        }
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.accuracy.as_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    /// Bin start.
    pub t_s: f64,
    /// |mean signed Y error| over every sample in the bin, all scenarios pooled.
    pub y_error_cm: f64,
    /// Mean per-sample |Y error| in the bin.
    pub mean_abs_y_error_cm: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub jumps_scripted: usize,
    pub jumps_detected: usize,
    pub relocations: usize,
    pub relocations_correct: usize,
    pub linear_error_mean_cm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencySummary {
    pub iterations: usize,
    pub ingest_mean_s: f64,
    pub ingest_max_s: f64,
    pub elections: usize,
    pub election_mean_s: f64,
    pub election_llm_mean_s: f64,
    pub election_non_llm_mean_s: f64,
    pub election_non_llm_max_s: f64,
}

impl LatencySummary {
    pub fn from_timings(ingest: &[Duration], elections: &[crate::tracker::ElectionTiming]) -> Self {
        let mean = |v: &mut dyn Iterator<Item = f64>, n: usize| if n == 0 { 0.0 } else { v.sum::<f64>() / n as f64 };
        let secs = |d: &Duration| d.as_secs_f64();
        Self {
            iterations: ingest.len(),
            ingest_mean_s: mean(&mut ingest.iter().map(secs), ingest.len()),
            ingest_max_s: ingest.iter().map(secs).fold(0.0, f64::max),
            elections: elections.len(),
            election_mean_s: mean(&mut elections.iter().map(|e| secs(&e.total)), elections.len()),
            election_llm_mean_s: mean(&mut elections.iter().map(|e| secs(&e.llm)), elections.len()),
            election_non_llm_mean_s: mean(&mut elections.iter().map(|e| secs(&e.non_llm())), elections.len()),
            election_non_llm_max_s: elections.iter().map(|e| secs(&e.non_llm())).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario_count: usize,
    pub calibration_enabled: bool,
    pub llm_provider: String,
    pub model_source: String,
    pub linear_error_cm: Distribution,
    pub jump_accuracy: Vec<JumpRow>,
    pub jumps_scripted: usize,
    pub jumps_detected: usize,
    pub y_error_timeline: Vec<TimelinePoint>,
    pub force_relocation_count: usize,
    pub scenarios: Vec<ScenarioSummary>,
    /// Wall-clock figures; kept out of `metrics.json` so that file only
    /// depends on seeds.
    #[serde(skip)]
    pub latency: LatencySummary,
}

impl MetricsReport {
    pub(crate) fn timeline(bins: &YErrorBins) -> Vec<TimelinePoint> {
        bins.bins
            .iter()
            .map(|(&b, &(sum, abs, n))| TimelinePoint {
                t_s: b as f64 * TIMELINE_BIN_S,
                y_error_cm: (sum / n as f64).abs(),
                mean_abs_y_error_cm: abs / n as f64,
                samples: n,
            })
            .collect()
    }

    pub(crate) fn jump_rows(table: &JumpTable) -> Vec<JumpRow> {
        let mut rows: Vec<JumpRow> = [Bucket::None, Bucket::One, Bucket::Two, Bucket::ThreePlus]
            .into_iter()
            .map(|b| JumpRow::new(b.label(), table.bucket(b)))
            .collect();
        rows.push(JumpRow::new("overall", table.overall));
        rows
    }

    pub fn jump_row(&self, bucket: &str) -> Option<&JumpRow> {
        self.jump_accuracy.iter().find(|r| r.bucket == bucket)
    }

    /// Mean of the timeline's `y_error_cm` over bins starting before `horizon_s`.
    pub fn mean_y_error(&self, horizon_s: f64) -> f64 {
        let v: Vec<f64> = self.y_error_timeline.iter().filter(|p| p.t_s < horizon_s).map(|p| p.y_error_cm).collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }

    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenarios          {}", self.scenario_count);
        let _ = writeln!(s, "calibration        {}", if self.calibration_enabled { "on" } else { "off" });
        let _ = writeln!(s, "llm provider       {}", self.llm_provider);
        let _ = writeln!(s, "models             {}", self.model_source);
        let d = &self.linear_error_cm;
        let _ = writeln!(s, "linear error (cm)  mean {:.4}  p50 {:.4}  p90 {:.4}  n {}", d.mean, d.p50, d.p90, d.count);
        let _ = writeln!(s, "jumps              scripted {}  detected {}", self.jumps_scripted, self.jumps_detected);
        let _ = writeln!(s, "forced relocations {}", self.force_relocation_count);
        let _ = writeln!(s);
        let _ = writeln!(s, "candidates  correct  total  accuracy");
        for r in &self.jump_accuracy {
            let acc = r.accuracy().map_or_else(|| "n/a".to_owned(), |a| format!("{:.2}%", a * 100.0));
            let _ = writeln!(s, "{:<10}  {:>7}  {:>5}  {:>8}", r.bucket, r.correct, r.total, acc);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "scenario                        seed        relocations  correct  linear err (cm)");
        for sc in &self.scenarios {
            let _ = writeln!(
                s,
                "{:<30}  {:<10}  {:>11}  {:>7}  {:.4}",
                sc.name, sc.seed, sc.relocations, sc.relocations_correct, sc.linear_error_mean_cm
            );
        }
        s
    }

    fn timeline_csv(&self) -> String {
        let mut s = String::from("t_s,y_error_cm,mean_abs_y_error_cm,samples\n");
        for p in &self.y_error_timeline {
            let _ = writeln!(s, "{},{},{},{}", p.t_s, p.y_error_cm, p.mean_abs_y_error_cm, p.samples);
        }
        s
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `metrics.json`, `timeline.csv`, `summary.txt` and `latency.json`.
pub fn report_write(report: &MetricsReport, dir: &Path) -> Result<()> {
    if report.scenario_count == 0 {
        return Err(Error::NoScenarios);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("metrics.json"), &(serde_json::to_string_pretty(report)? + "\n"))?;
    write(&dir.join("timeline.csv"), &report.timeline_csv())?;
    write(&dir.join("summary.txt"), &report.summary_table())?;
    write(&dir.join("latency.json"), &(serde_json::to_string_pretty(&report.latency)? + "\n"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub calibrated: MetricsReport,
    pub uncalibrated: MetricsReport,
}

impl AblationReport {
    pub fn write(&self, dir: &Path) -> Result<()> {
        report_write(&self.calibrated, &dir.join("calibrated"))?;
        report_write(&self.uncalibrated, &dir.join("uncalibrated"))?;
        let mut s = String::from("t_s,calibrated_y_error_cm,uncalibrated_y_error_cm\n");
        for (c, u) in self.calibrated.y_error_timeline.iter().zip(&self.uncalibrated.y_error_timeline) {
            let _ = writeln!(s, "{},{},{}", c.t_s, c.y_error_cm, u.y_error_cm);
        }
        write(&dir.join("ablation.csv"), &s)
    }
}
