//! Reading-progress state machine.
//!
//! Samples are calibrated, then judged against the current line's vertical
//! error range. In-range samples drive horizontal progress (a running max of
//! the smoothed X) and the Z-cut line switch. Gaze that stays out of range
//! for the jump threshold of active gazing starts a jump: the trajectory is
//! recorded until the next Z-cut, when the captured punctuation anchors are
//! elected and tracking resumes behind the winner.
//!
//! Escape handling: one out-of-range sample opens an escape episode; the
//! episode closes only after `return_confirm_samples` consecutive in-range
//! samples. In-range samples seen during an episode are held back and
//! applied when it closes, or dropped if it ends in a jump.

mod events;
mod zcut;

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use events::{read_event_log, write_event_log, EventRecord, RelocationReason, TrackerEvent, WordCount};
pub use zcut::{detect_z_cut, detect_z_cut_between, ZcutState};

use crate::calibrator::{CalibrationModel, GazeLinePair};
use crate::election::{self, CandidateRecord, ElectionTrace, Trajectory};
use crate::error::{Error, Result};
use crate::error_models::{ErrorRangeModel, ErrorVectorModel};
use crate::geometry::Point;
use crate::layout::{DocumentLayout, WordSpan};
use crate::llm::{self, ContextChooser, ElectionQuery, MockChooser};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GazeSample<T> {
    pub t_ms: i64,
    pub p: Point<T>,
    pub valid: bool,
}

impl<T: Scalar> GazeSample<T> {
    pub fn valid(t_ms: i64, x: T, y: T) -> Self {
        Self { t_ms, p: Point::new(x, y), valid: true }
    }

    pub fn invalid(t_ms: i64) -> Self {
        Self { t_ms, p: Point::default(), valid: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Linear,
    /// Jump detected; trajectory is being recorded.
    JumpPending,
    /// Right border reached during a jump; waiting for the return sweep.
    AwaitZcut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrackerConfig<T> {
    pub zcut_border_fraction: T,
    pub jump_threshold_ms: i64,
    pub pixels_per_cm: T,
    pub calibration_enabled: bool,
    /// Consecutive in-range samples that end an escape episode.
    pub return_confirm_samples: usize,
    /// Moving-average length for horizontal progress.
    pub progress_smoothing_samples: usize,
    /// Moving-average length for the Z-cut detector.
    pub zcut_smoothing_samples: usize,
    /// Moving-average length for recorded trajectory points.
    pub trajectory_smoothing_samples: usize,
    /// Leading part of an escape episode left out of the trajectory
    /// (covers the jump saccade itself).
    pub trajectory_settle_ms: i64,
    pub max_scoring_points: usize,
    /// Completed sentences sent to the language model as history.
    pub history_sentences: usize,
    pub calibration_window: usize,
}

impl<T: Scalar> Default for TrackerConfig<T> {
    fn default() -> Self {
        Self {
            zcut_border_fraction: T::lit(0.2),
            jump_threshold_ms: 2500,
            pixels_per_cm: T::lit(crate::layout::pixels_per_cm_for_panel(1920, 1080, 15.6)),
            calibration_enabled: true,
            return_confirm_samples: 8,
            progress_smoothing_samples: 30,
            zcut_smoothing_samples: 3,
            trajectory_smoothing_samples: 30,
            trajectory_settle_ms: 500,
            max_scoring_points: election::DEFAULT_MAX_SCORING_POINTS,
            history_sentences: 3,
            calibration_window: crate::calibrator::DEFAULT_MAX_PAIRS,
        }
    }
}

impl<T: Scalar> TrackerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let f = self.zcut_border_fraction;
        if !(f > T::zero() && f < T::half()) {
            return Err(Error::Config("zcut_border_fraction must lie in (0, 0.5)".into()));
        }
        if self.jump_threshold_ms <= 0 {
            return Err(Error::Config("jump_threshold_ms must be positive".into()));
        }
        if !(self.pixels_per_cm.is_finite() && self.pixels_per_cm > T::zero()) {
            return Err(Error::Config("pixels_per_cm must be positive".into()));
        }
        if self.return_confirm_samples == 0
            || self.progress_smoothing_samples == 0
            || self.zcut_smoothing_samples == 0
            || self.trajectory_smoothing_samples == 0
        {
            return Err(Error::Config("smoothing and confirmation lengths must be positive".into()));
        }
        Ok(())
    }
}

/// Observable tracker state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState<T> {
    pub mode: Mode,
    pub current_line: usize,
    /// Running max of smoothed X on the current line.
    pub progress_x_px: T,
    pub zcut: ZcutState,
    pub escape_ms_accum: i64,
    pub trajectory: Trajectory<T>,
    pub read_counts: Vec<u32>,
    /// First word of the current line not yet highlighted in this pass.
    pub highlighted_upto: usize,
}

/// Wall time of the last election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ElectionTiming {
    pub total: Duration,
    pub llm: Duration,
}

impl ElectionTiming {
    pub fn non_llm(&self) -> Duration {
        self.total.saturating_sub(self.llm)
    }
}

#[derive(Debug, Clone)]
struct MovingAverage<T> {
    buf: VecDeque<Point<T>>,
    cap: usize,
}

impl<T: Scalar> MovingAverage<T> {
    fn new(cap: usize) -> Self {
        Self { buf: VecDeque::with_capacity(cap), cap }
    }

    fn push(&mut self, p: Point<T>) -> Point<T> {
        if self.buf.len() == self.cap {
            self.buf.pop_front();
        }
        self.buf.push_back(p);
        self.mean()
    }

    fn mean(&self) -> Point<T> {
        let n = T::lit(self.buf.len().max(1) as f64);
        let (sx, sy) = self
            .buf
            .iter()
            .fold((T::zero(), T::zero()), |(ax, ay), p| (ax + p.x, ay + p.y));
        Point::new(sx / n, sy / n)
    }

    fn is_full(&self) -> bool {
        self.buf.len() == self.cap
    }

    fn clear(&mut self) {
        self.buf.clear();
    }
}

#[derive(Debug, Clone, Copy)]
struct Held<T> {
    raw: Point<T>,
    cal: Point<T>,
}

#[derive(Debug, Clone)]
struct Escape<T> {
    consecutive_in_range: usize,
    held: Vec<Held<T>>,
    /// Raw Y sum and count of the out-of-range samples, credited to the
    /// line if the gaze comes back.
    escaped_y: (T, usize),
    points: Vec<(i64, Point<T>)>,
}

pub struct Tracker<T: Scalar> {
    config: TrackerConfig<T>,
    layout: Arc<DocumentLayout<T>>,
    range_model: Arc<ErrorRangeModel<T>>,
    vector_model: Arc<ErrorVectorModel<T>>,
    calibrator: CalibrationModel<T>,
    chooser: Box<dyn ContextChooser>,
    state: TrackerState<T>,

    last_t_ms: Option<i64>,
    escape: Option<Escape<T>>,
    progress_avg: MovingAverage<T>,
    zcut_avg: MovingAverage<T>,
    traj_avg: MovingAverage<T>,
    line_y_sum: T,
    line_y_count: usize,
    jump_origin_word: usize,
    last_calibrated: Option<Point<T>>,
    last_election: Option<ElectionTiming>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(
        config: TrackerConfig<T>,
        layout: Arc<DocumentLayout<T>>,
        range_model: Arc<ErrorRangeModel<T>>,
        vector_model: Arc<ErrorVectorModel<T>>,
        chooser: Box<dyn ContextChooser>,
    ) -> Result<Self> {
        config.validate()?;
        if layout.config.screen_width_px != range_model.screen_width_px
            || layout.config.screen_height_px != range_model.screen_height_px
        {
            return Err(Error::Config("layout and error range model disagree on screen size".into()));
        }
        let first = &layout.lines[0];
        let state = TrackerState {
            mode: Mode::Linear,
            current_line: 0,
            progress_x_px: first.x_left_px,
            zcut: ZcutState::Idle,
            escape_ms_accum: 0,
            trajectory: Trajectory::default(),
            read_counts: vec![0; layout.words.len()],
            highlighted_upto: first.word_range.start,
        };
        Ok(Self {
            progress_avg: MovingAverage::new(config.progress_smoothing_samples),
            zcut_avg: MovingAverage::new(config.zcut_smoothing_samples),
            traj_avg: MovingAverage::new(config.trajectory_smoothing_samples),
            calibrator: CalibrationModel::with_window(config.calibration_window),
            config,
            layout,
            range_model,
            vector_model,
            chooser,
            state,
            last_t_ms: None,
            escape: None,
            line_y_sum: T::zero(),
            line_y_count: 0,
            jump_origin_word: 0,
            last_calibrated: None,
            last_election: None,
        })
    }

    /// Tracker with the offline mock chooser.
    pub fn with_mock(
        config: TrackerConfig<T>,
        layout: Arc<DocumentLayout<T>>,
        range_model: Arc<ErrorRangeModel<T>>,
        vector_model: Arc<ErrorVectorModel<T>>,
    ) -> Result<Self> {
        Self::new(config, layout, range_model, vector_model, Box::new(MockChooser::default()))
    }

    pub fn state(&self) -> &TrackerState<T> {
        &self.state
    }

    pub fn config(&self) -> &TrackerConfig<T> {
        &self.config
    }

    pub fn layout(&self) -> &Arc<DocumentLayout<T>> {
        &self.layout
    }

    pub fn calibrator(&self) -> &CalibrationModel<T> {
        &self.calibrator
    }

    /// Calibrated position of the most recent valid sample.
    pub fn last_calibrated(&self) -> Option<Point<T>> {
        self.last_calibrated
    }

    pub fn take_election_timing(&mut self) -> Option<ElectionTiming> {
        self.last_election.take()
    }

    /// Word the tracker considers being read.
    pub fn current_word(&self) -> usize {
        let line = &self.layout.lines[self.state.current_line];
        self.state.highlighted_upto.min(line.word_range.end - 1).max(line.word_range.start)
    }

    /// Full highlight state as `(word, count)` for every read word.
    pub fn highlight_snapshot(&self) -> Vec<WordCount> {
        self.state
            .read_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(index, &count)| WordCount { index, count })
            .collect()
    }

    pub fn ingest(&mut self, sample: GazeSample<T>) -> Result<Vec<TrackerEvent>> {
        if let Some(last) = self.last_t_ms {
            if sample.t_ms < last {
                return Err(Error::OutOfOrderSample { t_ms: sample.t_ms, last_ms: last });
            }
        }
        let mut events = Vec::new();
        // Every sample owns the interval since its predecessor; invalid ones
        // take theirs out of the escape timer.
        let dt = self.last_t_ms.map_or(0, |last| sample.t_ms - last);
        self.last_t_ms = Some(sample.t_ms);
        if !sample.valid || !sample.p.is_finite() {
            return Ok(events);
        }

        let raw = sample.p;
        let cal = if self.config.calibration_enabled { self.calibrator.apply(raw) } else { raw };
        self.last_calibrated = Some(cal);

        match self.state.mode {
            Mode::Linear => self.ingest_linear(sample.t_ms, dt, raw, cal, &mut events),
            Mode::JumpPending | Mode::AwaitZcut => self.ingest_jump(sample.t_ms, cal, &mut events),
        }
        Ok(events)
    }

    fn in_line_range(&self, cal: Point<T>) -> bool {
        let line = &self.layout.lines[self.state.current_line];
        let (_, v) = self.range_model.range_at(cal, self.config.pixels_per_cm);
        (cal.y - line.y_center_px).abs() <= v
    }

    fn ingest_linear(&mut self, t_ms: i64, dt: i64, raw: Point<T>, cal: Point<T>, events: &mut Vec<TrackerEvent>) {
        let in_range = self.in_line_range(cal);
        let Some(mut esc) = self.escape.take() else {
            if in_range {
                self.apply_linear(raw, cal, events);
            } else {
                self.state.escape_ms_accum = dt.min(self.config.jump_threshold_ms);
                self.escape = Some(Escape {
                    consecutive_in_range: 0,
                    held: Vec::new(),
                    escaped_y: (raw.y, 1),
                    points: vec![(t_ms, cal)],
                });
                self.check_jump(t_ms, events);
            }
            return;
        };

        self.state.escape_ms_accum = (self.state.escape_ms_accum + dt).min(self.config.jump_threshold_ms);
        esc.points.push((t_ms, cal));
        if in_range {
            esc.consecutive_in_range += 1;
            esc.held.push(Held { raw, cal });
            if esc.consecutive_in_range >= self.config.return_confirm_samples {
                self.state.escape_ms_accum = 0;
                self.line_y_sum = self.line_y_sum + esc.escaped_y.0;
                self.line_y_count += esc.escaped_y.1;
                for h in esc.held {
                    self.apply_linear(h.raw, h.cal, events);
                }
                return;
            }
        } else {
            esc.consecutive_in_range = 0;
            esc.escaped_y = (esc.escaped_y.0 + raw.y, esc.escaped_y.1 + 1);
        }
        self.escape = Some(esc);
        self.check_jump(t_ms, events);
    }

    fn check_jump(&mut self, t_ms: i64, events: &mut Vec<TrackerEvent>) {
        if self.state.escape_ms_accum < self.config.jump_threshold_ms {
            return;
        }
        let esc = self.escape.take().expect("jump check only runs inside an escape episode");
        self.jump_origin_word = self.current_word();
        self.state.mode = Mode::JumpPending;
        self.state.zcut = ZcutState::Idle;
        self.state.escape_ms_accum = 0;
        self.state.trajectory.clear();
        self.zcut_avg.clear();
        self.traj_avg.clear();
        let departed = self.departure_ms(&esc.points);
        let settle = departed + self.config.trajectory_settle_ms;
        for (t, p) in esc.points.into_iter().filter(|&(t, _)| t >= settle) {
            self.extend_trajectory(t, p);
        }
        events.push(TrackerEvent::JumpDetected { t_ms });
    }

    /// Time the smoothed gaze last left the current line's range during an
    /// escape episode. Single noisy samples open episodes long before the
    /// gaze actually moves away.
    fn departure_ms(&self, points: &[(i64, Point<T>)]) -> i64 {
        let line_y = self.layout.lines[self.state.current_line].y_center_px;
        let mut avg = MovingAverage::new(self.config.trajectory_smoothing_samples);
        let mut departed = points.first().map_or(0, |p| p.0);
        for &(t, p) in points {
            let m = avg.push(p);
            let (_, v) = self.range_model.range_at(m, self.config.pixels_per_cm);
            if (m.y - line_y).abs() <= v {
                departed = t;
            }
        }
        departed
    }

    fn extend_trajectory(&mut self, t_ms: i64, cal: Point<T>) {
        let smoothed = self.traj_avg.push(cal);
        if self.traj_avg.is_full() {
            self.state.trajectory.push(t_ms, smoothed);
        }
    }

    fn text_extent(&self) -> (T, T) {
        let lines = &self.layout.lines;
        let left = lines.iter().map(|l| l.x_left_px).fold(T::infinity(), T::min);
        let right = lines.iter().map(|l| l.x_right_px).fold(T::neg_infinity(), T::max);
        (left, right)
    }

    fn ingest_jump(&mut self, t_ms: i64, cal: Point<T>, events: &mut Vec<TrackerEvent>) {
        if self.state.mode == Mode::JumpPending {
            self.extend_trajectory(t_ms, cal);
        }
        let zx = self.zcut_avg.push(cal).x;
        let (left, right) = self.text_extent();
        let (next, fired) =
            detect_z_cut_between(self.state.zcut, zx, left, right, self.config.zcut_border_fraction);
        self.state.zcut = next;
        if next == ZcutState::RightReached {
            self.state.mode = Mode::AwaitZcut;
        }
        if fired {
            self.relocate_after_jump(t_ms, cal, events);
        }
    }

    /// Applies one in-range sample to progress, highlighting and Z-cut.
    fn apply_linear(&mut self, raw: Point<T>, cal: Point<T>, events: &mut Vec<TrackerEvent>) {
        // A return sweep's landing sample already belongs to the next line.
        let zx = self.zcut_avg.push(cal).x;
        let line = &self.layout.lines[self.state.current_line];
        let (next, fired) = detect_z_cut(self.state.zcut, zx, line, self.config.zcut_border_fraction);
        self.state.zcut = next;
        if fired && self.state.current_line + 1 < self.layout.lines.len() {
            let from = self.state.current_line;
            self.highlight_rest_of_line(events);
            let stats = (self.line_y_sum, self.line_y_count);
            self.switch_line(from, from + 1, events);
            self.finish_line(from, stats, events);
        }

        self.line_y_sum = self.line_y_sum + raw.y;
        self.line_y_count += 1;
        let line = &self.layout.lines[self.state.current_line];
        let smoothed_x = self.progress_avg.push(cal).x;
        let progress = self.state.progress_x_px.max(smoothed_x).min(line.x_right_px).max(line.x_left_px);
        self.state.progress_x_px = progress;
        self.highlight_through(progress, events);
    }

    /// Highlights words on the current line whose right edge is at or left of `x`.
    fn highlight_through(&mut self, x: T, events: &mut Vec<TrackerEvent>) {
        let line = &self.layout.lines[self.state.current_line];
        let mut words = Vec::new();
        while self.state.highlighted_upto < line.word_range.end
            && self.layout.words[self.state.highlighted_upto].bounding_box.x1 <= x
        {
            let w = self.state.highlighted_upto;
            self.state.read_counts[w] += 1;
            words.push(WordCount { index: w, count: self.state.read_counts[w] });
            self.state.highlighted_upto += 1;
        }
        if !words.is_empty() {
            events.push(TrackerEvent::HighlightUpdate { words });
        }
    }

    fn highlight_rest_of_line(&mut self, events: &mut Vec<TrackerEvent>) {
        let right = self.layout.lines[self.state.current_line].x_right_px;
        self.highlight_through(right, events);
    }

    fn switch_line(&mut self, from: usize, to: usize, events: &mut Vec<TrackerEvent>) {
        events.push(TrackerEvent::LineSwitch { from, to });
        self.enter_line(to, self.layout.lines[to].word_range.start);
    }

    /// Resets per-line state to start a pass at `word` on `line`.
    fn enter_line(&mut self, line: usize, word: usize) {
        let l = &self.layout.lines[line];
        self.state.current_line = line;
        self.state.highlighted_upto = word;
        self.state.progress_x_px = if word == l.word_range.start {
            l.x_left_px
        } else {
            self.layout.words[word].bounding_box.x0
        };
        self.state.zcut = ZcutState::Idle;
        self.progress_avg.clear();
        self.zcut_avg.clear();
        self.line_y_sum = T::zero();
        self.line_y_count = 0;
    }

    /// Records the finished line's calibration pair.
    fn finish_line(&mut self, line: usize, (sum, count): (T, usize), events: &mut Vec<TrackerEvent>) {
        let mean = (count > 0).then(|| sum / T::lit(count as f64));
        if let (Some(m), true) = (mean, self.config.calibration_enabled) {
            self.calibrator.record_pair(GazeLinePair::new(m, self.layout.lines[line].y_center_px));
            if self.calibrator.window_len() >= 2 {
                if let Err(e) = self.calibrator.fit() {
                    tracing::debug!(error = %e, "calibration refit rejected");
                }
            }
        }
        let (k, b) = self.calibrator.params();
        events.push(TrackerEvent::LineFinished {
            line,
            mean_y_gaze: mean.map(Scalar::to_f64_lossy),
            calibration: [k.to_f64_lossy(), b.to_f64_lossy()],
        });
    }
}

impl<T: Scalar> Tracker<T> {
    /// Double-click relocation onto the word under `p`. Misses leave the
    /// state untouched and return no events.
    pub fn force_relocate(&mut self, p: Point<T>) -> Vec<TrackerEvent> {
        let Some(word) = self.layout.word_at(p) else {
            return Vec::new();
        };
        let line = self.layout.words[word].line_index;
        self.reset_jump_state();
        self.enter_line(line, word);
        // A manual fix means the fit is not trusted. Jump relocations keep it.
        self.calibrator.reset();
        vec![TrackerEvent::RelocationApplied {
            anchor: None,
            word,
            line,
            reason: RelocationReason::Forced,
            confirm: true,
            election: None,
        }]
    }

    fn reset_jump_state(&mut self) {
        self.state.mode = Mode::Linear;
        self.state.trajectory.clear();
        self.state.escape_ms_accum = 0;
        self.escape = None;
        self.traj_avg.clear();
    }

    /// Up to `history_sentences` sentences ending at the jump origin word.
    fn reading_history(&self) -> String {
        let sentences = self.layout.sentences();
        let origin = self.jump_origin_word.min(self.layout.words.len() - 1);
        let cur = self.layout.sentence_of_word(origin);
        let first = (cur + 1).saturating_sub(self.config.history_sentences.max(1));
        let span = WordSpan::new(sentences[first].start, origin + 1);
        let text = self.layout.span_text(span);
        if text.is_empty() {
            self.layout.span_text(sentences[0])
        } else {
            text
        }
    }

    fn option_text(&self, anchor: usize) -> String {
        let span = self.layout.anchors[anchor].following_sentence.word_range;
        if span.is_empty() {
            "(end of text)".to_owned()
        } else {
            self.layout.span_text(span)
        }
    }

    /// Closes a jump at its terminating Z-cut.
    fn relocate_after_jump(&mut self, t_ms: i64, cal: Point<T>, events: &mut Vec<TrackerEvent>) {
        let started = Instant::now();
        let mut llm_time = Duration::ZERO;
        let ppcm = self.config.pixels_per_cm;
        let traj = std::mem::take(&mut self.state.trajectory);
        let mut candidates = election::identify_candidates(&traj, &self.layout, &self.range_model, ppcm);
        election::score_candidates(
            &mut candidates,
            &traj,
            &self.vector_model,
            ppcm,
            self.config.max_scoring_points,
        );

        let mut llm_choice = None;
        if candidates.len() >= 2 {
            let shortlisted = election::shortlist(&candidates);
            let query = ElectionQuery {
                material: self.layout.source_text.clone(),
                recent_history: self.reading_history(),
                options: shortlisted.iter().map(|&i| self.option_text(candidates[i].anchor_index)).collect(),
            };
            let asked = Instant::now();
            llm_choice = llm::choose(self.chooser.as_mut(), &query).map(|i| shortlisted[i]);
            llm_time = asked.elapsed();
        }

        let (anchor, word, reason) = match election::elect(&mut candidates, llm_choice) {
            Ok(w) => {
                let a = &self.layout.anchors[candidates[w].anchor_index];
                let reason = if candidates.len() == 1 {
                    RelocationReason::SingleCandidate
                } else {
                    RelocationReason::Election
                };
                let word = (a.word_index + 1).min(self.layout.words.len() - 1);
                (Some(a.index), word, reason)
            }
            Err(_) => {
                let y = traj.last_point().unwrap_or(cal).y;
                let line = self.layout.nearest_line(y);
                (None, self.layout.lines[line].word_range.start, RelocationReason::Fallback)
            }
        };
        let trace = anchor.map(|winner| ElectionTrace {
            t_ms,
            candidates: candidates.iter().map(CandidateRecord::from).collect(),
            llm_choice: llm_choice.map(|i| candidates[i].anchor_index),
            winner,
        });

        let line = self.layout.words[word].line_index;
        self.reset_jump_state();
        self.enter_line(line, word);
        events.push(TrackerEvent::RelocationApplied {
            anchor,
            word,
            line,
            reason,
            confirm: false,
            election: trace,
        });
        // The terminating Z-cut is the sweep off the relocated line.
        self.highlight_rest_of_line(events);
        if line + 1 < self.layout.lines.len() {
            self.switch_line(line, line + 1, events);
        }
        self.last_election = Some(ElectionTiming { total: started.elapsed(), llm: llm_time });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_models::ErrorRangeModel;
    use crate::layout::{layout_document, LayoutConfig};

    const TEXT: &str = "The kettle began to hum on the stove. Outside the window a thin rain \
        drifted over the garden. Nobody in the house had noticed the time. A letter lay \
        unopened on the table by the door. Somewhere a dog barked twice and then fell quiet. \
        The clock in the hall struck four. Mara folded the newspaper and stood up slowly. \
        She had promised to call her brother before dinner. The phone was still in her coat.";

    fn tracker() -> Tracker<f64> {
        let cfg = LayoutConfig::default();
        let text = [TEXT, TEXT, TEXT].join(" ");
        let layout = Arc::new(layout_document(&text, &cfg).unwrap());
        let range = Arc::new(ErrorRangeModel::uniform(1, 1, 1.0, 1.0, (1920, 1080)).unwrap());
        let vecs = Arc::new(ErrorVectorModel::noiseless());
        let tc = TrackerConfig { pixels_per_cm: cfg.pixels_per_cm, ..TrackerConfig::default() };
        Tracker::with_mock(tc, layout, range, vecs).unwrap()
    }

    /// Feeds a left-to-right pass over `line` at 50 Hz starting at `t0`.
    fn read_line(tr: &mut Tracker<f64>, line: usize, t0: i64, out: &mut Vec<TrackerEvent>) -> i64 {
        let l = tr.layout().lines[line].clone();
        let mut t = t0;
        let steps = 60;
        for i in 0..=steps {
            let x = l.x_left_px + (l.x_right_px - l.x_left_px) * i as f64 / steps as f64;
            out.extend(tr.ingest(GazeSample::valid(t, x, l.y_center_px)).unwrap());
            t += 20;
        }
        t
    }

    #[test]
    fn linear_reading_switches_lines() {
        let mut tr = tracker();
        let mut ev = Vec::new();
        let t = read_line(&mut tr, 0, 0, &mut ev);
        read_line(&mut tr, 1, t, &mut ev);
        assert!(ev.contains(&TrackerEvent::LineSwitch { from: 0, to: 1 }));
        assert_eq!(tr.state().current_line, 1);
        let l0 = tr.layout().lines[0].word_range;
        assert!(l0.iter().all(|w| tr.state().read_counts[w] == 1));
        assert!(ev.iter().any(|e| matches!(e, TrackerEvent::LineFinished { line: 0, mean_y_gaze: Some(_), .. })));
    }

    #[test]
    fn progress_never_decreases_within_line() {
        let mut tr = tracker();
        let l = tr.layout().lines[0].clone();
        let mut last = tr.state().progress_x_px;
        for (i, x) in [400.0, 600.0, 500.0, 450.0, 700.0].into_iter().enumerate() {
            tr.ingest(GazeSample::valid(i as i64 * 20, x, l.y_center_px)).unwrap();
            assert!(tr.state().progress_x_px >= last);
            last = tr.state().progress_x_px;
        }
    }

    #[test]
    fn sustained_escape_detects_jump() {
        let mut tr = tracker();
        let l = tr.layout().lines[0].clone();
        let far = tr.layout().lines[8].y_center_px;
        let mut jumps = Vec::new();
        for i in 0..200 {
            let t = i * 20;
            for e in tr.ingest(GazeSample::valid(t, l.x_left_px + 200.0, far)).unwrap() {
                if let TrackerEvent::JumpDetected { t_ms } = e {
                    jumps.push(t_ms);
                }
            }
        }
        assert_eq!(jumps, vec![2500]);
        assert_eq!(tr.state().mode, Mode::JumpPending);
    }

    #[test]
    fn invalid_runs_do_not_advance_the_timer() {
        let far = 900.0;
        let mut a = tracker();
        let mut b = tracker();
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        let mut t_b = 0;
        for i in 0..200i64 {
            for e in a.ingest(GazeSample::valid(i * 20, 500.0, far)).unwrap() {
                if matches!(e, TrackerEvent::JumpDetected { .. }) {
                    ta.push(i);
                }
            }
            if i == 40 {
                for _ in 0..100 {
                    t_b += 20;
                    assert!(b.ingest(GazeSample::invalid(t_b)).unwrap().is_empty());
                }
            }
            t_b += 20;
            for e in b.ingest(GazeSample::valid(t_b, 500.0, far)).unwrap() {
                if matches!(e, TrackerEvent::JumpDetected { .. }) {
                    tb.push(i);
                }
            }
        }
        assert_eq!(ta, tb);
        assert_eq!(ta.len(), 1);
    }

    #[test]
    fn brief_glance_does_not_jump() {
        let mut tr = tracker();
        let l = tr.layout().lines[0].clone();
        let mut t = 0;
        for round in 0..20 {
            for i in 0..50 {
                let y = if i < 40 { 900.0 } else { l.y_center_px };
                let ev = tr.ingest(GazeSample::valid(t, 500.0 + round as f64, y)).unwrap();
                assert!(!ev.iter().any(|e| matches!(e, TrackerEvent::JumpDetected { .. })));
                t += 20;
            }
        }
    }

    #[test]
    fn out_of_order_rejected() {
        let mut tr = tracker();
        tr.ingest(GazeSample::valid(100, 300.0, 300.0)).unwrap();
        assert!(matches!(
            tr.ingest(GazeSample::valid(50, 300.0, 300.0)),
            Err(Error::OutOfOrderSample { t_ms: 50, last_ms: 100 })
        ));
    }

    #[test]
    fn forced_relocation() {
        let mut tr = tracker();
        let w = &tr.layout().words[17];
        let (c, line) = (w.center(), w.line_index);
        let ev = tr.force_relocate(c);
        assert_eq!(tr.state().mode, Mode::Linear);
        assert_eq!(tr.state().current_line, line);
        assert_eq!(tr.current_word(), 17);
        assert!(matches!(
            ev.as_slice(),
            [TrackerEvent::RelocationApplied { word: 17, reason: RelocationReason::Forced, confirm: true, .. }]
        ));
        let before = tr.state().clone();
        assert!(tr.force_relocate(Point::new(5.0, 5.0)).is_empty());
        assert_eq!(tr.state(), &before);
    }

    #[test]
    fn forced_relocation_resets_calibration() {
        let mut tr = tracker();
        // Gaze sits 15 px high on every line, so the fit moves off identity.
        let mut t = 0;
        for line in 0..4 {
            let l = tr.layout().lines[line].clone();
            for i in 0..=60 {
                let x = l.x_left_px + (l.x_right_px - l.x_left_px) * i as f64 / 60.0;
                tr.ingest(GazeSample::valid(t, x, l.y_center_px - 15.0)).unwrap();
                t += 20;
            }
        }
        assert!(tr.calibrator().window_len() >= 2);
        let (k, b) = tr.calibrator().params();
        assert!((k - 1.0).abs() < 0.01 && b > 10.0, "{k} {b}");
        let c = tr.layout().words[3].center();
        tr.force_relocate(c);
        assert_eq!(tr.calibrator().params(), (1.0, 0.0));
        assert_eq!(tr.calibrator().window_len(), 0);
    }

    #[test]
    fn forced_relocation_discards_pending_jump() {
        let mut tr = tracker();
        for i in 0..200 {
            tr.ingest(GazeSample::valid(i * 20, 500.0, 900.0)).unwrap();
        }
        assert_eq!(tr.state().mode, Mode::JumpPending);
        let c = tr.layout().words[3].center();
        assert_eq!(tr.force_relocate(c).len(), 1);
        assert_eq!(tr.state().mode, Mode::Linear);
        assert!(tr.state().trajectory.is_empty());
        assert_eq!(tr.state().escape_ms_accum, 0);
    }

    #[test]
    fn jump_then_zcut_relocates_into_target_line() {
        let mut tr = tracker();
        let mut ev = Vec::new();
        let mut t = read_line(&mut tr, 0, 0, &mut ev);
        // Look at line 6 and read it through, then sweep back.
        let target = tr.layout().lines[6].clone();
        for i in 0..200 {
            let x = target.x_left_px + (target.x_right_px - target.x_left_px) * (i as f64 / 200.0);
            ev.extend(tr.ingest(GazeSample::valid(t, x, target.y_center_px)).unwrap());
            t += 20;
        }
        for _ in 0..5 {
            ev.extend(tr.ingest(GazeSample::valid(t, target.x_left_px, target.y_center_px + tr.layout().pitch_px())).unwrap());
            t += 20;
        }
        assert!(ev.iter().any(|e| matches!(e, TrackerEvent::JumpDetected { .. })));
        let reloc = ev.iter().find_map(|e| match e {
            TrackerEvent::RelocationApplied { line, .. } => Some(*line),
            _ => None,
        });
        assert_eq!(reloc, Some(6));
        assert_eq!(tr.state().current_line, 7);
        assert!(tr.take_election_timing().is_some());
    }
}
