//! Statistical gaze-error models.
//!
//! * [`ErrorRangeModel`]: a screen grid of plausible error extents, used to
//!   decide whether gaze has left the current line and to capture
//!   relocation candidates around a trajectory.
//! * [`ErrorVectorModel`]: a cloud of (estimated − true) offset vectors,
//!   used to score how much of the plausible gaze mass lands on a sentence.
//! * [`DriftModel`]: linear growth of a systematic offset over a session.
//!
//! The published figures give only summary statistics, so the defaults are
//! synthesised from them: an axis-aligned Gaussian cloud and a grid with
//! inflated border and bottom cells.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{union_contains, Point, Rect};
use crate::scalar::Scalar;

/// Mean gaze error over all participants of the reference study, cm.
pub const MEAN_GAZE_ERROR_CM: f64 = 1.9455;
/// Horizontal standard deviation of the error-vector cloud, cm.
pub const SIGMA_H_CM: f64 = 1.8471;
/// Vertical standard deviation of the error-vector cloud, cm.
pub const SIGMA_V_CM: f64 = 1.2289;
/// Size of the stored error-vector cloud.
pub const DEFAULT_CLOUD_SIZE: usize = 500;
/// Error magnitude at session start in the drift fit, cm.
pub const DRIFT_START_CM: f64 = 1.9244;
/// Error magnitude after [`DRIFT_SPAN_S`] in the drift fit, cm.
pub const DRIFT_END_CM: f64 = 2.2015;
pub const DRIFT_SPAN_S: f64 = 330.0;

/// Samples in the synthetic population the stored cloud is drawn from
/// (16 participants × 4,000 samples).
const POPULATION_SIZE: usize = 16 * 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CellRange<T> {
    pub h_cm: T,
    pub v_cm: T,
}

/// Screen-partitioned error extents. `cells[row][col]`, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRangeModel<T> {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Vec<CellRange<T>>>,
    pub screen_width_px: u32,
    pub screen_height_px: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSynthConfig {
    pub rows: usize,
    pub cols: usize,
    pub base_cm: f64,
    pub border_multiplier: f64,
    pub bottom_multiplier: f64,
    pub screen_width_px: u32,
    pub screen_height_px: u32,
}

impl Default for RangeSynthConfig {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 6,
            base_cm: MEAN_GAZE_ERROR_CM,
            border_multiplier: 1.5,
            bottom_multiplier: 1.3,
            screen_width_px: 1920,
            screen_height_px: 1080,
        }
    }
}

impl<T: Scalar> ErrorRangeModel<T> {
    pub fn uniform(rows: usize, cols: usize, h_cm: T, v_cm: T, screen: (u32, u32)) -> Result<Self> {
        Self::new(vec![vec![CellRange { h_cm, v_cm }; cols]; rows], screen)
    }

    pub fn new(cells: Vec<Vec<CellRange<T>>>, screen: (u32, u32)) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || cells.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("error range grid must be a non-empty rectangle".into()));
        }
        let ok = |v: T| v.is_finite() && v > T::zero();
        if cells.iter().flatten().any(|c| !ok(c.h_cm) || !ok(c.v_cm)) {
            return Err(Error::Config("error ranges must be positive".into()));
        }
        if screen.0 == 0 || screen.1 == 0 {
            return Err(Error::Config("screen dimensions must be positive".into()));
        }
        Ok(Self {
            rows,
            cols,
            cells,
            screen_width_px: screen.0,
            screen_height_px: screen.1,
        })
    }

    /// Grid with `base_cm` everywhere, inflated on edge cells and again on
    /// the bottom row.
    pub fn synthesize(cfg: &RangeSynthConfig) -> Result<Self> {
        let mut cells = Vec::with_capacity(cfg.rows);
        for r in 0..cfg.rows {
            let mut row = Vec::with_capacity(cfg.cols);
            for c in 0..cfg.cols {
                let edge = r == 0 || c == 0 || r + 1 == cfg.rows || c + 1 == cfg.cols;
                let mut v = cfg.base_cm;
                if edge {
                    v *= cfg.border_multiplier;
                }
                if r + 1 == cfg.rows {
                    v *= cfg.bottom_multiplier;
                }
                row.push(CellRange { h_cm: T::lit(v), v_cm: T::lit(v) });
            }
            cells.push(row);
        }
        Self::new(cells, (cfg.screen_width_px, cfg.screen_height_px))
    }

    /// Grid cell holding `p`, after clamping `p` onto the screen.
    pub fn cell_index(&self, p: Point<T>) -> (usize, usize) {
        let w = T::lit(f64::from(self.screen_width_px));
        let h = T::lit(f64::from(self.screen_height_px));
        let cell = |v: T, extent: T, n: usize| -> usize {
            let v = if v.is_nan() { T::zero() } else { v.max(T::zero()).min(extent) };
            let i = (v / extent * T::lit(n as f64)).floor().to_usize().unwrap_or(0);
            i.min(n - 1)
        };
        (cell(p.y, h, self.rows), cell(p.x, w, self.cols))
    }

    /// Horizontal and vertical error extents at `p`, in pixels.
    pub fn range_at(&self, p: Point<T>, pixels_per_cm: T) -> (T, T) {
        let (r, c) = self.cell_index(p);
        let cell = self.cells[r][c];
        (cell.h_cm * pixels_per_cm, cell.v_cm * pixels_per_cm)
    }

    pub fn to_file_format(&self) -> RangeFile<T> {
        RangeFile {
            rows: self.rows,
            cols: self.cols,
            screen: ScreenDims { w: self.screen_width_px, h: self.screen_height_px },
            cells: self.cells.clone(),
        }
    }

    pub fn from_file_format(f: RangeFile<T>) -> Result<Self> {
        if f.cells.len() != f.rows || f.cells.iter().any(|r| r.len() != f.cols) {
            return Err(Error::Config("error range grid does not match rows/cols".into()));
        }
        Self::new(f.cells, (f.screen.w, f.screen.h))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &self.to_file_format())?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_file_format(serde_json::from_reader(BufReader::new(file))?)
    }
}

/// On-disk layout of the error-range model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RangeFile<T> {
    pub rows: usize,
    pub cols: usize,
    pub screen: ScreenDims,
    pub cells: Vec<Vec<CellRange<T>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenDims {
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Offset<T> {
    pub dx_cm: T,
    pub dy_cm: T,
}

/// Axis-aligned zero-mean Gaussian the cloud was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GaussianCloud<T> {
    pub sigma_h_cm: T,
    pub sigma_v_cm: T,
}

impl<T: Scalar> Default for GaussianCloud<T> {
    fn default() -> Self {
        Self { sigma_h_cm: T::lit(SIGMA_H_CM), sigma_v_cm: T::lit(SIGMA_V_CM) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVectorModel<T> {
    samples: Vec<Offset<T>>,
    generator: Option<GaussianCloud<T>>,
}

impl<T: Scalar> ErrorVectorModel<T> {
    pub fn new(samples: Vec<Offset<T>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("error vector model needs at least one sample".into()));
        }
        if samples.iter().any(|s| !s.dx_cm.is_finite() || !s.dy_cm.is_finite()) {
            return Err(Error::Config("error vector samples must be finite".into()));
        }
        Ok(Self { samples, generator: None })
    }

    /// Draws a population from `gen` and keeps `count` of its samples,
    /// chosen uniformly without replacement.
    pub fn synthesize(gen: GaussianCloud<T>, count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let population: Vec<Offset<T>> = (0..POPULATION_SIZE.max(count))
            .map(|_| Offset {
                dx_cm: T::standard_normal(&mut rng) * gen.sigma_h_cm,
                dy_cm: T::standard_normal(&mut rng) * gen.sigma_v_cm,
            })
            .collect();
        let mut picked = index::sample(&mut rng, population.len(), count).into_vec();
        picked.sort_unstable();
        let samples = picked.into_iter().map(|i| population[i]).collect();
        let mut model = Self::new(samples)?;
        model.generator = Some(gen);
        Ok(model)
    }

    /// A single zero offset: scoring degenerates to point containment and
    /// the simulator adds no noise.
    pub fn noiseless() -> Self {
        Self {
            samples: vec![Offset::default()],
            generator: Some(GaussianCloud { sigma_h_cm: T::zero(), sigma_v_cm: T::zero() }),
        }
    }

    pub fn samples(&self) -> &[Offset<T>] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// The generating Gaussian if known, else per-axis sample standard
    /// deviations of the cloud.
    pub fn generator(&self) -> GaussianCloud<T> {
        if let Some(g) = self.generator {
            return g;
        }
        let (sh, sv) = self.sample_std();
        GaussianCloud { sigma_h_cm: sh, sigma_v_cm: sv }
    }

    pub fn sample_mean(&self) -> (T, T) {
        let n = T::lit(self.samples.len() as f64);
        let mx = self.samples.iter().map(|s| s.dx_cm).sum::<T>() / n;
        let my = self.samples.iter().map(|s| s.dy_cm).sum::<T>() / n;
        (mx, my)
    }

    pub fn sample_std(&self) -> (T, T) {
        let (mx, my) = self.sample_mean();
        let n = self.samples.len();
        if n < 2 {
            return (T::zero(), T::zero());
        }
        let d = T::lit((n - 1) as f64);
        let vx = self.samples.iter().map(|s| (s.dx_cm - mx).powi(2)).sum::<T>() / d;
        let vy = self.samples.iter().map(|s| (s.dy_cm - my).powi(2)).sum::<T>() / d;
        (vx.sqrt(), vy.sqrt())
    }

    /// Fraction of the cloud, anchored at `gaze`, that lands inside `region`.
    pub fn overlap_fraction(&self, gaze: Point<T>, region: &[Rect<T>], pixels_per_cm: T) -> T {
        if region.is_empty() {
            return T::zero();
        }
        let hits = self
            .samples
            .iter()
            .filter(|s| {
                union_contains(
                    region,
                    gaze.offset(s.dx_cm * pixels_per_cm, s.dy_cm * pixels_per_cm),
                )
            })
            .count();
        T::lit(hits as f64) / T::lit(self.samples.len() as f64)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["dx_cm", "dy_cm"])?;
        for s in &self.samples {
            w.write_record([s.dx_cm.to_string(), s.dy_cm.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let samples = r.deserialize().collect::<std::result::Result<Vec<Offset<T>>, _>>()?;
        Self::new(samples)
    }
}

/// Time-linear systematic gaze offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DriftModel<T> {
    pub initial_error_cm: T,
    pub rate_cm_per_s: T,
    /// Unit vector, screen coordinates (y grows downward).
    pub direction: (T, T),
}

impl<T: Scalar> Default for DriftModel<T> {
    fn default() -> Self {
        Self {
            initial_error_cm: T::lit(DRIFT_START_CM),
            rate_cm_per_s: T::lit((DRIFT_END_CM - DRIFT_START_CM) / DRIFT_SPAN_S),
            direction: (T::zero(), T::one()),
        }
    }
}

impl<T: Scalar> DriftModel<T> {
    pub fn none() -> Self {
        Self { rate_cm_per_s: T::zero(), ..Self::default() }
    }

    pub fn with_rate(rate_cm_per_s: T) -> Self {
        Self { rate_cm_per_s, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let (dx, dy) = self.direction;
        let norm = dx.hypot(dy);
        if !(self.initial_error_cm >= T::zero() && self.rate_cm_per_s >= T::zero()) {
            return Err(Error::Config("drift magnitudes must be non-negative".into()));
        }
        if (norm - T::one()).abs() > T::lit(1e-3) {
            return Err(Error::Config("drift direction must be a unit vector".into()));
        }
        Ok(())
    }

    /// Systematic offset at `t_s` seconds into the session, cm.
    pub fn drift_offset(&self, t_s: T) -> (T, T) {
        let m = self.rate_cm_per_s * t_s.max(T::zero());
        (self.direction.0 * m, self.direction.1 * m)
    }
}

/// Default range and vector models for `seed`.
pub fn synth_default_models<T: Scalar>(seed: u64) -> (ErrorRangeModel<T>, ErrorVectorModel<T>) {
    let range = ErrorRangeModel::synthesize(&RangeSynthConfig::default())
        .expect("default range synthesis parameters are valid");
    let vector = ErrorVectorModel::synthesize(GaussianCloud::default(), DEFAULT_CLOUD_SIZE, seed)
        .expect("default cloud parameters are valid");
    (range, vector)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesis_is_deterministic() {
        let (r1, v1) = synth_default_models::<f64>(7);
        let (r2, v2) = synth_default_models::<f64>(7);
        assert_eq!(r1, r2);
        assert_eq!(v1.samples(), v2.samples());
        let (_, v3) = synth_default_models::<f64>(8);
        assert_ne!(v1.samples(), v3.samples());
    }

    #[test]
    fn cloud_statistics_match_generator() {
        let (_, v) = synth_default_models::<f64>(11);
        assert_eq!(v.count(), DEFAULT_CLOUD_SIZE);
        let (mx, my) = v.sample_mean();
        let n = DEFAULT_CLOUD_SIZE as f64;
        assert!(mx.abs() < 3.0 * SIGMA_H_CM / n.sqrt(), "{mx}");
        assert!(my.abs() < 3.0 * SIGMA_V_CM / n.sqrt(), "{my}");
        let (sh, sv) = v.sample_std();
        assert!((sh / SIGMA_H_CM - 1.0).abs() < 0.15, "{sh}");
        assert!((sv / SIGMA_V_CM - 1.0).abs() < 0.15, "{sv}");
    }

    #[test]
    fn uniform_grid_range() {
        let m = ErrorRangeModel::uniform(1, 1, 1.0, 1.0, (1920, 1080)).unwrap();
        assert_eq!(m.range_at(Point::new(5.0, 5.0), 50.0), (50.0, 50.0));
        assert_eq!(m.range_at(Point::new(1900.0, 1000.0), 50.0), (50.0, 50.0));
    }

    #[test]
    fn out_of_screen_points_clamp() {
        let m = ErrorRangeModel::<f64>::synthesize(&RangeSynthConfig::default()).unwrap();
        assert_eq!(
            m.range_at(Point::new(-50.0, 500.0), 55.6),
            m.range_at(Point::new(0.0, 500.0), 55.6)
        );
        assert_eq!(
            m.range_at(Point::new(5000.0, 5000.0), 55.6),
            m.range_at(Point::new(1919.9, 1079.9), 55.6)
        );
        assert_eq!(m.cell_index(Point::new(1920.0, 1080.0)), (3, 5));
        assert_eq!(m.cell_index(Point::new(f64::NAN, 0.0)), (0, 0));
    }

    #[test]
    fn bottom_left_exceeds_center() {
        let m = ErrorRangeModel::<f64>::synthesize(&RangeSynthConfig::default()).unwrap();
        let (_, v_corner) = m.range_at(Point::new(10.0, 1070.0), 55.6);
        let (h_center, v_center) = m.range_at(Point::new(960.0, 540.0), 55.6);
        assert!(v_corner > v_center);
        assert!((h_center - MEAN_GAZE_ERROR_CM * 55.6).abs() < 1e-9);
        // Bottom row gets both multipliers.
        let bottom = m.cells[3][0].v_cm;
        assert!((bottom - MEAN_GAZE_ERROR_CM * 1.5 * 1.3).abs() < 1e-12);
        // Interior cells hold the base value.
        assert_eq!(m.cells[1][2].v_cm, MEAN_GAZE_ERROR_CM);
    }

    #[test]
    fn hand_counted_overlap() {
        let cloud = ErrorVectorModel::new(vec![
            Offset { dx_cm: 0.2, dy_cm: 0.0 },
            Offset { dx_cm: -0.2, dy_cm: 0.0 },
            Offset { dx_cm: 0.0, dy_cm: 0.1 },
            Offset { dx_cm: 0.0, dy_cm: -0.1 },
        ])
        .unwrap();
        let region = [Rect::new(100.0, 90.0, 120.0, 110.0)];
        assert_eq!(cloud.overlap_fraction(Point::new(100.0, 100.0), &region, 50.0), 0.75);
        let screen = [Rect::new(-1e6, -1e6, 1e6, 1e6)];
        assert_eq!(cloud.overlap_fraction(Point::new(100.0, 100.0), &screen, 50.0), 1.0);
        assert_eq!(cloud.overlap_fraction(Point::new(100.0, 100.0), &[], 50.0), 0.0);
    }

    #[test]
    fn drift_is_linear() {
        let d = DriftModel::<f64>::default();
        assert_eq!(d.drift_offset(0.0), (0.0, 0.0));
        let (dx, dy) = d.drift_offset(330.0);
        assert_eq!(dx, 0.0);
        assert!((dy - 0.2771).abs() < 1e-12, "{dy}");
        let (_, half) = d.drift_offset(165.0);
        assert!((half * 2.0 - dy).abs() < 1e-15);
        assert!((d.rate_cm_per_s - 0.00084).abs() < 1e-5);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn model_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (r, v) = synth_default_models::<f64>(3);
        r.write_json(&dir.path().join("range.json")).unwrap();
        v.write_csv(&dir.path().join("vectors.csv")).unwrap();
        let r2 = ErrorRangeModel::<f64>::read_json(&dir.path().join("range.json")).unwrap();
        let v2 = ErrorVectorModel::<f64>::read_csv(&dir.path().join("vectors.csv")).unwrap();
        assert_eq!(r, r2);
        assert_eq!(v.samples(), v2.samples());
        let text = std::fs::read_to_string(dir.path().join("vectors.csv")).unwrap();
        assert!(text.starts_with("dx_cm,dy_cm\n"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("range.json")).unwrap())
                .unwrap();
        assert_eq!(json["screen"]["w"], 1920);
        assert!(json["cells"][0][0]["h_cm"].is_number());
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(ErrorVectorModel::<f64>::new(vec![]).is_err());
        assert!(ErrorRangeModel::<f64>::uniform(0, 3, 1.0, 1.0, (10, 10)).is_err());
        assert!(ErrorRangeModel::<f64>::uniform(2, 3, 0.0, 1.0, (10, 10)).is_err());
    }
}
