//! Near-field RF wireless power transfer simulation.
//!
//! The crate models energy transmitters (fully-digital arrays, RIS-based and
//! DMA-based transmitters) radiating towards a single energy receiver over
//! purely geometrical line-of-sight channels. On top of the channel model it
//! evaluates incident power density around the receiver, checks it against
//! ICNIRP general-public limits, estimates transmitter power consumption and
//! runs the two reference sweeps (density versus radius, consumption versus
//! frequency).
//!
//! ```
//! use nfwpt_core::{emf, wavelength};
//!
//! assert_eq!(emf::local_power_density_limit(4.0).unwrap(), 40.0);
//! assert!((wavelength(3e9) - 0.099931).abs() < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod architectures;
pub mod channel;
pub mod emf;
mod error;
pub mod experiments;
pub mod field;
pub mod geometry;
pub mod optimize;
pub mod output;
pub mod powermodel;
pub mod scenario;
mod sum;

pub use architectures::{DmaConfig, EtArchitecture, PhaseResolution};
pub use channel::ChannelVector;
pub use emf::{EmfLimit, ExposureReport, ExposureTier, Zone};
pub use error::{Error, Result};
pub use field::{DensityMap, SphereStats};
pub use geometry::{ArrayGeometry, Element, ElementPattern, PatternKind, Vec3};
pub use num_complex::Complex64;
pub use optimize::{PhaseDomain, PsoParams};
pub use output::{Cell, OutputFormat, ResultTable};
pub use powermodel::ConsumptionProfile;
pub use scenario::{ArchSpec, Experiment, ScenarioConfig};
pub use sum::NeumaierSum;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Free-space wavelength in meters for a frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Free-space wavelength in meters for a frequency in GHz.
pub fn wavelength_ghz(frequency_ghz: f64) -> f64 {
    wavelength(frequency_ghz * 1e9)
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
