//! Simulation and estimation of respondent noise in binned 1–10 survey scores.
//!
//! The crate models each respondent's answer as a clipped discrete-uniform
//! draw around their true score and measures what that noise does once the
//! scale is cut into category bins: how far the best possible classifier
//! falls ([`bounds`]), which bin layouts hold up ([`bindesign`]), and how
//! much noise a real survey carries ([`calibrate`]). [`stats`] covers the
//! descriptive and chi-square checks used on small respondent panels.

pub mod bindesign;
pub mod bounds;
pub mod calibrate;
pub mod dataset;
pub mod error;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod ols;
pub mod resample;
pub mod scale;
pub mod shares;
pub mod special;
pub mod stats;

pub use dataset::{Dataset, SurveyRecord};
pub use error::{Error, Result};
pub use noise::{NoiseModel, RngSpec};
pub use scale::{BinningScheme, Category, Score};
