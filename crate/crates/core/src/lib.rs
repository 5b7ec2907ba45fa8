//! Hyperfine-resolved optical-lattice potentials for alkali atoms under
//! arbitrary multi-beam configurations, plus analysis of the resulting 2D
//! periodic landscapes: minima, saddles, bond barriers, channel profiles,
//! and geometry classification.

pub mod angular;
pub mod atoms;
pub mod constants;
pub mod error;
pub mod fields;
pub mod lattice;
pub mod presets;
pub mod shift;

pub use error::{Error, Result};
