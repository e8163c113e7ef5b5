//! Gaze-driven reading progress tracking.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

pub mod calibrator;
pub mod election;
pub mod error;
pub mod error_models;
pub mod geometry;
pub mod harness;
pub mod layout;
pub mod llm;
pub mod scalar;
pub mod simulator;
pub mod tracker;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Rect = geometry::Rect<f64>;
pub type LayoutConfig = layout::LayoutConfig<f64>;
pub type DocumentLayout = layout::DocumentLayout<f64>;
pub type ErrorRangeModel = error_models::ErrorRangeModel<f64>;
pub type ErrorVectorModel = error_models::ErrorVectorModel<f64>;
pub type DriftModel = error_models::DriftModel<f64>;
pub type CalibrationModel = calibrator::CalibrationModel<f64>;
pub type Tracker = tracker::Tracker<f64>;
pub type TrackerConfig = tracker::TrackerConfig<f64>;
pub type GazeSample = tracker::GazeSample<f64>;
