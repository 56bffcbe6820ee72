//! Lévy measures, truncated Wasserstein-2 distances and a minimum-distance
//! estimator for the tail index of the jump measure.

pub mod coupling;
pub mod error;
pub mod estimator;
pub mod measures;
pub mod numeric;
pub mod simulate;
pub mod wasserstein;

pub use error::{LevyError, Result};
