//! Relocation candidate capture, scoring and election.
//!
//! Candidates are the punctuation anchors inside the error-range rectangles
//! around each trajectory point. Each is scored by its match ratio: the
//! mean, over trajectory points, of the share of the error-vector cloud
//! that lands on the sentence following the anchor. The language model's
//! pick among the top three receives [`LLM_BONUS`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_models::{ErrorRangeModel, ErrorVectorModel};
use crate::geometry::{Point, Rect};
use crate::layout::{DocumentLayout, SentenceSpan};
use crate::scalar::Scalar;

pub const LLM_BONUS: f64 = 0.1;
pub const SHORTLIST_SIZE: usize = 3;
pub const DEFAULT_MAX_SCORING_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<T> {
    pub points: Vec<(i64, Point<T>)>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(points: Vec<(i64, Point<T>)>) -> Self {
        Self { points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn push(&mut self, t_ms: i64, p: Point<T>) {
        self.points.push((t_ms, p));
    }

    pub fn clear(&mut self) {
        self.points.clear();
    }

    pub fn last_point(&self) -> Option<Point<T>> {
        self.points.last().map(|&(_, p)| p)
    }

    /// At most `max` points spread uniformly over the trajectory's time span.
    pub fn subsample(&self, max: usize) -> Vec<Point<T>> {
        let n = self.points.len();
        if n <= max || max == 0 {
            return self.points.iter().map(|&(_, p)| p).collect();
        }
        if max == 1 {
            return vec![self.points[0].1];
        }
        let t0 = self.points[0].0 as f64;
        let t1 = self.points[n - 1].0 as f64;
        let mut out = Vec::with_capacity(max);
        let mut last = usize::MAX;
        for i in 0..max {
            let target = t0 + (t1 - t0) * i as f64 / (max - 1) as f64;
            let idx = self
                .points
                .partition_point(|&(t, _)| (t as f64) < target)
                .min(n - 1);
            if idx != last {
                out.push(self.points[idx].1);
                last = idx;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub anchor_index: usize,
    pub sentence: SentenceSpan<T>,
    pub match_ratio: T,
    pub llm_bonus: T,
    pub total: T,
}

impl<T: Scalar> Candidate<T> {
    pub fn new(anchor_index: usize, sentence: SentenceSpan<T>) -> Self {
        Self {
            anchor_index,
            sentence,
            match_ratio: T::zero(),
            llm_bonus: T::zero(),
            total: T::zero(),
        }
    }

    pub fn set_ratio(&mut self, ratio: T) {
        self.match_ratio = ratio;
        self.total = self.match_ratio + self.llm_bonus;
    }
}

/// Error-range rectangles around every trajectory point.
pub fn trajectory_region<T: Scalar>(
    points: impl IntoIterator<Item = Point<T>>,
    range_model: &ErrorRangeModel<T>,
    pixels_per_cm: T,
) -> Vec<Rect<T>> {
    points
        .into_iter()
        .map(|p| {
            let (h, v) = range_model.range_at(p, pixels_per_cm);
            Rect::centered(p, h, v)
        })
        .collect()
}

/// Anchors captured by the trajectory's error range, document order, ratios unset.
pub fn identify_candidates<T: Scalar>(
    traj: &Trajectory<T>,
    layout: &DocumentLayout<T>,
    range_model: &ErrorRangeModel<T>,
    pixels_per_cm: T,
) -> Vec<Candidate<T>> {
    let region = trajectory_region(traj.points.iter().map(|&(_, p)| p), range_model, pixels_per_cm);
    layout
        .anchors_in_region(&region)
        .into_iter()
        .map(|a| Candidate::new(a, layout.anchors[a].following_sentence.clone()))
        .collect()
}

/// Mean cloud overlap of `boxes` over the scoring points.
pub fn match_ratio<T: Scalar>(
    boxes: &[Rect<T>],
    points: &[Point<T>],
    vec_model: &ErrorVectorModel<T>,
    pixels_per_cm: T,
) -> T {
    if points.is_empty() {
        return T::zero();
    }
    let sum: T = points
        .iter()
        .map(|&p| vec_model.overlap_fraction(p, boxes, pixels_per_cm))
        .sum();
    sum / T::lit(points.len() as f64)
}

/// Scores every candidate against the (subsampled) trajectory.
pub fn score_candidates<T: Scalar>(
    candidates: &mut [Candidate<T>],
    traj: &Trajectory<T>,
    vec_model: &ErrorVectorModel<T>,
    pixels_per_cm: T,
    max_points: usize,
) {
    let points = traj.subsample(max_points);
    for c in candidates.iter_mut() {
        let r = match_ratio(&c.sentence.boxes, &points, vec_model, pixels_per_cm);
        c.set_ratio(r);
    }
}

/// Indices of up to three candidates with the highest ratios; among equal
/// ratios, earlier anchors first.
pub fn shortlist<T: Scalar>(candidates: &[Candidate<T>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..candidates.len()).collect();
    idx.sort_by(|&a, &b| {
        candidates[b]
            .match_ratio
            .partial_cmp(&candidates[a].match_ratio)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(candidates[a].anchor_index.cmp(&candidates[b].anchor_index))
    });
    idx.truncate(SHORTLIST_SIZE);
    idx
}

/// Winner index into `candidates`. `llm_choice` indexes `candidates` too.
pub fn elect<T: Scalar>(candidates: &mut [Candidate<T>], llm_choice: Option<usize>) -> Result<usize> {
    match candidates.len() {
        0 => return Err(Error::NoCandidates),
        1 => return Ok(0),
        _ => {}
    }
    for (i, c) in candidates.iter_mut().enumerate() {
        c.llm_bonus = if Some(i) == llm_choice { T::lit(LLM_BONUS) } else { T::zero() };
        c.total = c.match_ratio + c.llm_bonus;
    }
    let mut best = 0;
    for i in 1..candidates.len() {
        let (ci, cb) = (&candidates[i], &candidates[best]);
        if ci.total > cb.total || (ci.total == cb.total && ci.anchor_index < cb.anchor_index) {
            best = i;
        }
    }
    Ok(best)
}

/// Debug record of one election, written to the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionTrace {
    pub t_ms: i64,
    pub candidates: Vec<CandidateRecord>,
    /// Anchor index the language model picked, if it answered.
    pub llm_choice: Option<usize>,
    pub winner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub anchor: usize,
    pub ratio: f64,
    pub bonus: f64,
    pub total: f64,
}

impl<T: Scalar> From<&Candidate<T>> for CandidateRecord {
    fn from(c: &Candidate<T>) -> Self {
        Self {
            anchor: c.anchor_index,
            ratio: c.match_ratio.to_f64_lossy(),
            bonus: c.llm_bonus.to_f64_lossy(),
            total: c.total.to_f64_lossy(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::WordSpan;

    fn cand(anchor: usize, ratio: f64) -> Candidate<f64> {
        let mut c = Candidate::new(anchor, SentenceSpan { word_range: WordSpan::default(), boxes: vec![] });
        c.set_ratio(ratio);
        c
    }

    #[test]
    fn bonus_flips_close_election() {
        let mut cs = vec![cand(0, 0.31), cand(1, 0.25)];
        let w = elect(&mut cs, Some(1)).unwrap();
        assert_eq!(w, 1);
        assert!((cs[1].total - 0.35).abs() < 1e-12);
        assert_eq!(cs[0].total, 0.31);
    }

    #[test]
    fn bonus_does_not_flip_wide_margin() {
        let mut cs = vec![cand(0, 0.31), cand(1, 0.15)];
        assert_eq!(elect(&mut cs, Some(1)).unwrap(), 0);
        assert!((cs[1].total - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_and_empty() {
        let mut one = vec![cand(4, 0.01)];
        assert_eq!(elect(&mut one, None).unwrap(), 0);
        let mut none: Vec<Candidate<f64>> = vec![];
        assert!(matches!(elect(&mut none, None), Err(Error::NoCandidates)));
    }

    #[test]
    fn ties_go_to_document_order() {
        let mut cs = vec![cand(2, 0.2), cand(5, 0.2), cand(7, 0.1)];
        assert_eq!(elect(&mut cs, None).unwrap(), 0);
    }

    #[test]
    fn shortlist_top_three() {
        let cs = vec![cand(0, 0.1), cand(1, 0.5), cand(2, 0.3), cand(3, 0.05), cand(4, 0.4)];
        assert_eq!(shortlist(&cs), vec![1, 4, 2]);
        assert_eq!(shortlist(&cs[..2]), vec![1, 0]);
        let eq = vec![cand(0, 0.2), cand(1, 0.2), cand(2, 0.2), cand(3, 0.2)];
        assert_eq!(shortlist(&eq), vec![0, 1, 2]);
    }

    #[test]
    fn two_point_mean() {
        // First point: cloud fully inside; second: half inside.
        let cloud = ErrorVectorModel::new(vec![
            crate::error_models::Offset { dx_cm: -1.0, dy_cm: 0.0 },
            crate::error_models::Offset { dx_cm: 1.0, dy_cm: 0.0 },
        ])
        .unwrap();
        let boxes = [Rect::new(0.0, 0.0, 100.0, 100.0)];
        let pts = [Point::new(50.0, 50.0), Point::new(95.0, 50.0)];
        assert_eq!(match_ratio(&boxes, &pts, &cloud, 10.0), 0.75);
        let screen = [Rect::new(-1e9, -1e9, 1e9, 1e9)];
        assert_eq!(match_ratio(&screen, &pts, &cloud, 10.0), 1.0);
    }

    #[test]
    fn subsample_caps_points() {
        let t = Trajectory::new((0..500).map(|i| (i * 17, Point::new(i as f64, 0.0))).collect());
        let s = t.subsample(50);
        assert_eq!(s.len(), 50);
        assert_eq!(s[0].x, 0.0);
        assert_eq!(s[49].x, 499.0);
        assert!(s.windows(2).all(|w| w[1].x > w[0].x));
        let short = Trajectory::new(vec![(0, Point::new(1.0, 1.0))]);
        assert_eq!(short.subsample(50).len(), 1);
    }
}
