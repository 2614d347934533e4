//! Labeled random-finite-set multi-object tracking for video detections.
//!
//! The filter core is generic over the scalar type ([`Scalar`], implemented
//! for `f32` and `f64`); the aliases below fix it for the common cases.

pub mod appearance;
pub mod assignment;
pub mod birth;
pub mod config;
pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod geometry;
pub mod glmb;
pub mod metrics;
pub mod mot_io;
pub mod pipeline;
pub mod reappearance;
pub mod scalar;
pub mod synthetic;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use glmb::TrackLabel;
pub use scalar::Scalar;

pub type BBox64 = geometry::BBox<f64>;
pub type GlmbDensity64 = glmb::GlmbDensity<f64>;
pub type Tracker64 = pipeline::Tracker<f64>;
pub type BBox32 = geometry::BBox<f32>;
pub type GlmbDensity32 = glmb::GlmbDensity<f32>;
pub type Tracker32 = pipeline::Tracker<f32>;
