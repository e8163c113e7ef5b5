//! Vertical gaze calibration from line-gaze alignment.
//!
//! Each finished line yields a pair (mean raw gaze Y, line centre Y). A
//! least-squares line `Y_line ≈ k·Y_gaze + b` fitted over a sliding window
//! of recent pairs is then applied to every raw sample; X is never touched.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

pub const DEFAULT_MAX_PAIRS: usize = 8;
pub const MIN_GAIN: f64 = 0.5;
pub const MAX_GAIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GazeLinePair<T> {
    pub y_gaze_px: T,
    pub y_line_px: T,
}

impl<T: Scalar> GazeLinePair<T> {
    pub fn new(y_gaze_px: T, y_line_px: T) -> Self {
        Self { y_gaze_px, y_line_px }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel<T> {
    k: T,
    b: T,
    window: VecDeque<GazeLinePair<T>>,
    max_pairs: usize,
}

impl<T: Scalar> Default for CalibrationModel<T> {
    fn default() -> Self {
        Self::with_window(DEFAULT_MAX_PAIRS)
    }
}

impl<T: Scalar> CalibrationModel<T> {
    pub fn with_window(max_pairs: usize) -> Self {
        let max_pairs = max_pairs.max(1);
        Self {
            k: T::one(),
            b: T::zero(),
            window: VecDeque::with_capacity(max_pairs + 1),
            max_pairs,
        }
    }

    pub fn gain(&self) -> T {
        self.k
    }

    pub fn bias(&self) -> T {
        self.b
    }

    pub fn params(&self) -> (T, T) {
        (self.k, self.b)
    }

    pub fn window(&self) -> impl ExactSizeIterator<Item = &GazeLinePair<T>> {
        self.window.iter()
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn max_pairs(&self) -> usize {
        self.max_pairs
    }

    /// Appends a pair, evicting the oldest once the window is full.
    /// Non-finite pairs are ignored.
    pub fn record_pair(&mut self, pair: GazeLinePair<T>) {
        if !(pair.y_gaze_px.is_finite() && pair.y_line_px.is_finite()) {
            return;
        }
        self.window.push_back(pair);
        while self.window.len() > self.max_pairs {
            self.window.pop_front();
        }
    }

    /// Refits `(k, b)` over the window and installs the result.
    ///
    /// One pair, or no spread in gaze Y, gives an offset-only fit. A
    /// non-positive gain leaves the previous parameters in place.
    pub fn fit(&mut self) -> Result<(T, T)> {
        let n = self.window.len();
        if n == 0 {
            return Err(Error::NoCalibrationData);
        }
        let nf = T::lit(n as f64);
        let mean_g = self.window.iter().map(|p| p.y_gaze_px).sum::<T>() / nf;
        let mean_l = self.window.iter().map(|p| p.y_line_px).sum::<T>() / nf;
        let sxx: T = self.window.iter().map(|p| (p.y_gaze_px - mean_g).powi(2)).sum();
        let sxy: T = self
            .window
            .iter()
            .map(|p| (p.y_gaze_px - mean_g) * (p.y_line_px - mean_l))
            .sum();

        let scale = mean_g.abs().max(T::one());
        let degenerate_spread = sxx <= nf * (scale * T::epsilon().sqrt()).powi(2);
        let (k, b) = if n == 1 || degenerate_spread {
            (T::one(), mean_l - mean_g)
        } else {
            let k = sxy / sxx;
            // NaN falls through to the error too.
            if k.is_nan() || k <= T::zero() {
                return Err(Error::DegenerateFit { gain: k.to_f64_lossy() });
            }
            let k = k.max(T::lit(MIN_GAIN)).min(T::lit(MAX_GAIN));
            (k, mean_l - k * mean_g)
        };
        self.k = k;
        self.b = b;
        Ok((k, b))
    }

    /// `(X, k·Y + b)`.
    pub fn apply(&self, raw: Point<T>) -> Point<T> {
        Point::new(raw.x, self.k * raw.y + self.b)
    }

    /// Back to identity with an empty window.
    pub fn reset(&mut self) {
        self.k = T::one();
        self.b = T::zero();
        self.window.clear();
    }

    /// Sum of squared residuals of `(k, b)` over the window.
    pub fn sse(&self, k: T, b: T) -> T {
        self.window
            .iter()
            .map(|p| (p.y_line_px - (k * p.y_gaze_px + b)).powi(2))
            .sum()
    }
}
