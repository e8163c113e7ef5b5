//! Metrics recomputed from event logs and truth traces alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::layout::DocumentLayout;
use crate::simulator::{GroundTruthTrace, TruthMode};
use crate::tracker::{EventRecord, RelocationReason, TrackerEvent};

/// Width of the Y-error timeline bins.
pub const TIMELINE_BIN_S: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
}

impl Distribution {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let rank = |q: f64| values[((q * n as f64).ceil() as usize).clamp(1, n) - 1];
        Self { count: n, mean: values.iter().sum::<f64>() / n as f64, p50: rank(0.5), p90: rank(0.9) }
    }
}

/// Candidate-count bucket of a relocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    #[serde(rename = "0")]
    None,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3+")]
    ThreePlus,
}

impl Bucket {
    pub fn of(candidates: usize) -> Self {
        match candidates {
            0 => Self::None,
            1 => Self::One,
            2 => Self::Two,
            _ => Self::ThreePlus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::None => "0",
            Self::One => "1",
            Self::Two => "2",
            Self::ThreePlus => "3+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += usize::from(ok);
    }

    pub fn merge(&mut self, other: Tally) {
        self.correct += other.correct;
        self.total += other.total;
    }

    /// `None` for an empty bucket.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpTable {
    pub buckets: BTreeMap<Bucket, Tally>,
    pub overall: Tally,
}

impl JumpTable {
    pub fn add(&mut self, bucket: Bucket, ok: bool) {
        self.buckets.entry(bucket).or_default().add(ok);
        self.overall.add(ok);
    }

    pub fn merge(&mut self, other: &JumpTable) {
        for (b, t) in &other.buckets {
            self.buckets.entry(*b).or_default().merge(*t);
        }
        self.overall.merge(other.overall);
    }

    pub fn bucket(&self, b: Bucket) -> Tally {
        self.buckets.get(&b).copied().unwrap_or_default()
    }
}

/// Sum and count of signed Y errors per timeline bin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct YErrorBins {
    pub bins: BTreeMap<usize, (f64, f64, usize)>,
}

impl YErrorBins {
    fn add(&mut self, t_ms: i64, err_cm: f64) {
        let bin = (t_ms as f64 / 1000.0 / TIMELINE_BIN_S).floor().max(0.0) as usize;
        let e = self.bins.entry(bin).or_insert((0.0, 0.0, 0));
        e.0 += err_cm;
        e.1 += err_cm.abs();
        e.2 += 1;
    }

    pub fn merge(&mut self, other: &YErrorBins) {
        for (b, (s, a, n)) in &other.bins {
            let e = self.bins.entry(*b).or_insert((0.0, 0.0, 0));
            e.0 += s;
            e.1 += a;
            e.2 += n;
        }
    }
}

/// Per-scenario metric contributions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioMetrics {
    pub linear_errors_cm: Vec<f64>,
    pub jumps: JumpTable,
    pub jumps_detected: usize,
    pub forced_relocations: usize,
    pub y_bins: YErrorBins,
}

/// Tracker state reconstructed from events.
#[derive(Debug, Clone, Copy)]
struct Replay {
    line: usize,
    upto: usize,
    k: f64,
    b: f64,
}

impl Replay {
    fn new(layout: &DocumentLayout<f64>) -> Self {
        Self { line: 0, upto: layout.lines[0].word_range.start, k: 1.0, b: 0.0 }
    }

    fn apply(&mut self, layout: &DocumentLayout<f64>, e: &TrackerEvent) {
        match e {
            TrackerEvent::HighlightUpdate { words } => {
                if let Some(last) = words.last() {
                    self.upto = last.index + 1;
                }
            }
            TrackerEvent::LineSwitch { to, .. } => {
                self.line = *to;
                self.upto = layout.lines[*to].word_range.start;
            }
            TrackerEvent::RelocationApplied { word, line, .. } => {
                self.line = *line;
                self.upto = *word;
            }
            TrackerEvent::LineFinished { calibration, .. } => {
                self.k = calibration[0];
                self.b = calibration[1];
            }
            TrackerEvent::JumpDetected { .. } => {}
        }
    }

    fn current_word(&self, layout: &DocumentLayout<f64>) -> usize {
        let r = layout.lines[self.line].word_range;
        self.upto.min(r.end - 1).max(r.start)
    }
}

/// Scores one scenario. `events` must be in emission order.
pub fn scenario_metrics(
    layout: &DocumentLayout<f64>,
    trace: &GroundTruthTrace<f64>,
    events: &[EventRecord],
) -> ScenarioMetrics {
    let ppcm = layout.config.pixels_per_cm;
    let mut m = ScenarioMetrics::default();
    let mut replay = Replay::new(layout);
    let mut next_event = 0;
    for (sample, truth) in trace.samples.iter().zip(&trace.truth) {
        // The calibration in force for this sample predates its own events.
        let (k, b) = (replay.k, replay.b);
        let mut relocations = Vec::new();
        while next_event < events.len() && events[next_event].t_ms <= sample.t_ms {
            let e = &events[next_event].event;
            replay.apply(layout, e);
            match e {
                TrackerEvent::JumpDetected { .. } => m.jumps_detected += 1,
                TrackerEvent::RelocationApplied { reason: RelocationReason::Forced, .. } => m.forced_relocations += 1,
                TrackerEvent::RelocationApplied { election, .. } => {
                    relocations.push(election.as_ref().map_or(0, |t| t.candidates.len()));
                }
                _ => {}
            }
            next_event += 1;
        }
        let truth_line = layout.words[truth.word].line_index;
        for n in relocations {
            m.jumps.add(Bucket::of(n), replay.line == truth_line);
        }
        if truth.mode != TruthMode::Linear {
            continue;
        }
        let tracked = replay.current_word(layout);
        let err = if tracked == truth.word {
            0.0
        } else {
            layout.words[tracked].center().distance(layout.words[truth.word].center()) / ppcm
        };
        m.linear_errors_cm.push(err);
        if sample.valid {
            let y_cal = k * sample.p.y + b;
            m.y_bins.add(sample.t_ms, (y_cal - layout.lines[truth_line].y_center_px) / ppcm);
        }
    }
    m
}
