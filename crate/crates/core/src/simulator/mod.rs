//! Synthetic gaze streams with ground truth.
//!
//! The true gaze path is a sequence of fixations hopping 7 to 9 characters
//! along each line, with durations set by the reading speed. Observed samples
//! add one Gaussian draw per sample plus a time-linear drift.

mod suite;
pub mod texts;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use suite::{linear_suite, scenario_suite, scenario_suite_default, SuiteParagraph, SUITE_PARAGRAPHS};

use crate::error::{Error, Result};
use crate::error_models::{DriftModel, ErrorVectorModel};
use crate::geometry::Point;
use crate::layout::{layout_document, DocumentLayout, LayoutConfig};
use crate::scalar::Scalar;
use crate::tracker::GazeSample;

pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 60.0;
/// 200 words in 138.9 s.
pub const DEFAULT_WPM: f64 = 200.0 / 138.9 * 60.0;
pub const JUMP_TRANSIT_S: f64 = 0.3;
pub const MIN_STRIDE_CHARS: u32 = 7;
pub const MAX_STRIDE_CHARS: u32 = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Action {
    ReadLinear { from_word: usize, to_word: usize, wpm: f64 },
    Jump { target_word: usize },
    LookAway { duration_s: f64 },
    Dwell { duration_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    pub document: String,
    pub actions: Vec<Action>,
    pub seed: u64,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    /// Layout to render `document` with; the default layout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutConfig<f64>>,
}

fn default_rate() -> f64 {
    DEFAULT_SAMPLE_RATE_HZ
}

impl ScenarioScript {
    pub fn jump_count(&self) -> usize {
        self.actions.iter().filter(|a| matches!(a, Action::Jump { .. })).count()
    }

    pub fn is_pure_linear(&self) -> bool {
        self.actions.iter().all(|a| matches!(a, Action::ReadLinear { .. }))
    }

    pub fn layout_config<T: Scalar>(&self) -> LayoutConfig<T> {
        match &self.layout {
            None => LayoutConfig::default(),
            Some(c) => LayoutConfig {
                screen_width_px: c.screen_width_px,
                screen_height_px: c.screen_height_px,
                pixels_per_cm: T::lit(c.pixels_per_cm),
                line_spacing_mm: T::lit(c.line_spacing_mm),
                font_height_mm: T::lit(c.font_height_mm),
                paragraph_rect: crate::geometry::Rect::new(
                    T::lit(c.paragraph_rect.x0),
                    T::lit(c.paragraph_rect.y0),
                    T::lit(c.paragraph_rect.x1),
                    T::lit(c.paragraph_rect.y1),
                ),
                mean_char_width_mm: T::lit(c.mean_char_width_mm),
            },
        }
    }

    pub fn build_layout<T: Scalar>(&self) -> Result<DocumentLayout<T>> {
        layout_document(&self.document, &self.layout_config())
    }

    pub fn validate<T: Scalar>(&self, layout: &DocumentLayout<T>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScript(format!("{}: {m}", self.name)));
        if self.actions.is_empty() {
            return bad("no actions".into());
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad("sample rate must be positive".into());
        }
        let n = layout.words.len();
        for (i, a) in self.actions.iter().enumerate() {
            match *a {
                Action::ReadLinear { from_word, to_word, wpm } => {
                    if from_word > to_word || to_word >= n {
                        return bad(format!("action {i}: word range {from_word}..={to_word} outside 0..{n}"));
                    }
                    if !(wpm.is_finite() && wpm > 0.0) {
                        return bad(format!("action {i}: wpm must be positive"));
                    }
                }
                Action::Jump { target_word } if target_word >= n => {
                    return bad(format!("action {i}: jump target {target_word} outside 0..{n}"));
                }
                Action::LookAway { duration_s } | Action::Dwell { duration_s }
                    if !(duration_s.is_finite() && duration_s > 0.0) =>
                {
                    return bad(format!("action {i}: duration must be positive"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthMode {
    Linear,
    Jumping,
    Away,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthPoint {
    pub t_ms: i64,
    /// Word currently being read.
    pub word: usize,
    pub mode: TruthMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthTrace<T> {
    pub samples: Vec<GazeSample<T>>,
    pub truth: Vec<TruthPoint>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    t_ms: i64,
    x_px: f64,
    y_px: f64,
    valid: bool,
    truth_word: usize,
    truth_mode: TruthMode,
}

impl<T: Scalar> GroundTruthTrace<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (s, t) in self.samples.iter().zip(&self.truth) {
            w.serialize(TraceRow {
                t_ms: s.t_ms,
                x_px: s.p.x.to_f64_lossy(),
                y_px: s.p.y.to_f64_lossy(),
                valid: s.valid,
                truth_word: t.word,
                truth_mode: t.mode,
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut samples = Vec::new();
        let mut truth = Vec::new();
        for row in r.deserialize() {
            let row: TraceRow = row?;
            samples.push(GazeSample { t_ms: row.t_ms, p: Point::new(T::lit(row.x_px), T::lit(row.y_px)), valid: row.valid });
            truth.push(TruthPoint { t_ms: row.t_ms, word: row.truth_word, mode: row.truth_mode });
        }
        Ok(Self { samples, truth })
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment<T> {
    Fixation { p: Point<T>, word: usize },
    Transit { from: Point<T>, to: Point<T>, word: usize },
    Away { word: usize },
}

#[derive(Debug, Clone, Copy)]
struct Timed<T> {
    start_s: f64,
    dur_s: f64,
    seg: Segment<T>,
}

/// Word a fixation at `x` is on. Inter-word gaps belong to the next word.
fn word_under<T: Scalar>(layout: &DocumentLayout<T>, line: usize, x: T, lo: usize, hi: usize) -> usize {
    let range = layout.lines[line].word_range;
    let (a, b) = (range.start.max(lo), (range.end - 1).min(hi));
    (a..=b).find(|&w| x < layout.words[w].bounding_box.x1).unwrap_or(b)
}

struct Kinematics<'a, T: Scalar> {
    layout: &'a DocumentLayout<T>,
    rng: ChaCha8Rng,
    t_s: f64,
    point: Point<T>,
    word: usize,
    timeline: Vec<Timed<T>>,
}

impl<T: Scalar> Kinematics<'_, T> {
    fn push(&mut self, dur_s: f64, seg: Segment<T>) {
        self.timeline.push(Timed { start_s: self.t_s, dur_s, seg });
        self.t_s += dur_s;
    }

    fn stride(&mut self) -> T {
        let chars = self.rng.random_range(MIN_STRIDE_CHARS..=MAX_STRIDE_CHARS);
        self.layout.config.char_width_px() * T::lit(f64::from(chars))
    }

    /// Landing point for reading that starts at `word`.
    fn entry_point(&self, word: usize) -> Point<T> {
        let w = &self.layout.words[word];
        let half = self.layout.config.char_width_px() * T::lit(f64::from(MIN_STRIDE_CHARS + MAX_STRIDE_CHARS) / 4.0);
        let x = (w.bounding_box.x0 + half).min(w.bounding_box.center().x);
        Point::new(x, self.layout.lines[w.line_index].y_center_px)
    }

    fn read_linear(&mut self, from: usize, to: usize, wpm: f64) {
        let first_line = self.layout.words[from].line_index;
        let last_line = self.layout.words[to].line_index;
        let mut fixations = Vec::new();
        for li in first_line..=last_line {
            let line = &self.layout.lines[li];
            let x_start = if li == first_line { self.layout.words[from].bounding_box.x0 } else { line.x_left_px };
            let x_end = if li == last_line { self.layout.words[to].bounding_box.x1 } else { line.x_right_px };
            // Fixations land inside a character, never on a glyph boundary.
            let quarter = self.layout.config.char_width_px() * T::lit(0.25);
            let mut x = x_start + self.stride() * T::half() + quarter;
            if x >= x_end {
                x = (x_start + x_end) * T::half();
            }
            while x < x_end {
                let p = Point::new(x, line.y_center_px);
                fixations.push((p, word_under(self.layout, li, x, from, to)));
                x = x + self.stride();
            }
        }
        let total_s = (to - from + 1) as f64 / wpm * 60.0;
        let each = total_s / fixations.len() as f64;
        for (p, word) in fixations {
            self.push(each, Segment::Fixation { p, word });
            self.point = p;
            self.word = word;
        }
    }

    fn jump(&mut self, target: usize) {
        let to = self.entry_point(target);
        self.push(JUMP_TRANSIT_S, Segment::Transit { from: self.point, to, word: target });
        self.point = to;
        self.word = target;
    }
}

/// Renders `script` into a noisy sample stream with per-sample truth.
pub fn simulate<T: Scalar>(
    script: &ScenarioScript,
    layout: &DocumentLayout<T>,
    vec_model: &ErrorVectorModel<T>,
    drift: &DriftModel<T>,
) -> Result<GroundTruthTrace<T>> {
    script.validate(layout)?;
    drift.validate()?;
    let mut kin = Kinematics {
        layout,
        rng: ChaCha8Rng::seed_from_u64(script.seed),
        t_s: 0.0,
        point: Point::default(),
        word: 0,
        timeline: Vec::new(),
    };
    kin.point = kin.entry_point(0);
    for a in &script.actions {
        match *a {
            Action::ReadLinear { from_word, to_word, wpm } => kin.read_linear(from_word, to_word, wpm),
            Action::Jump { target_word } => kin.jump(target_word),
            Action::LookAway { duration_s } => kin.push(duration_s, Segment::Away { word: kin.word }),
            Action::Dwell { duration_s } => kin.push(duration_s, Segment::Fixation { p: kin.point, word: kin.word }),
        }
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(script.seed);
    noise_rng.set_stream(1);
    let gen = vec_model.generator();
    let ppcm = layout.config.pixels_per_cm;
    let total_s = kin.t_s;
    let mut samples = Vec::new();
    let mut truth = Vec::new();
    let mut seg_idx = 0;
    for i in 0.. {
        let t_s = i as f64 / script.sample_rate_hz;
        if t_s >= total_s {
            break;
        }
        while seg_idx + 1 < kin.timeline.len() && t_s >= kin.timeline[seg_idx + 1].start_s {
            seg_idx += 1;
        }
        let timed = kin.timeline[seg_idx];
        let t_ms = (i as f64 * 1000.0 / script.sample_rate_hz).round() as i64;
        let (true_p, word, mode) = match timed.seg {
            Segment::Fixation { p, word } => (Some(p), word, TruthMode::Linear),
            Segment::Transit { from, to, word } => {
                let f = T::lit(((t_s - timed.start_s) / timed.dur_s).clamp(0.0, 1.0));
                (Some(Point::new(from.x + (to.x - from.x) * f, from.y + (to.y - from.y) * f)), word, TruthMode::Jumping)
            }
            Segment::Away { word } => (None, word, TruthMode::Away),
        };
        truth.push(TruthPoint { t_ms, word, mode });
        samples.push(match true_p {
            None => GazeSample::invalid(t_ms),
            Some(p) => {
                let (dx_cm, dy_cm) = drift.drift_offset(T::lit(t_s));
                let nx = T::standard_normal(&mut noise_rng) * gen.sigma_h_cm;
                let ny = T::standard_normal(&mut noise_rng) * gen.sigma_v_cm;
                GazeSample { t_ms, p: p.offset((nx + dx_cm) * ppcm, (ny + dy_cm) * ppcm), valid: true }
            }
        });
    }
    Ok(GroundTruthTrace { samples, truth })
}
