//! Fixtures shared by the benchmarks.

use nfwpt_core::architectures::{build_dma_et, build_ris_et};
use nfwpt_core::{db_to_linear, wavelength_ghz, EtArchitecture, PhaseResolution, Vec3};

/// Receiver position used by every fixture.
pub const RECEIVER: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 3.0 };

/// RIS transmitter with the default gains, 0.5 m edge.
pub fn ris(f_ghz: f64, resolution: PhaseResolution) -> (EtArchitecture, f64) {
    let lambda = wavelength_ghz(f_ghz);
    let arch = build_ris_et(0.5, lambda, db_to_linear(3.0), db_to_linear(7.0))
        .expect("valid RIS fixture")
        .with_resolution(resolution);
    (arch, lambda)
}

/// DMA transmitter with the default gains, 0.5 m edge.
pub fn dma(f_ghz: f64, resolution: PhaseResolution) -> (EtArchitecture, f64) {
    let lambda = wavelength_ghz(f_ghz);
    let arch = build_dma_et(0.5, lambda, db_to_linear(13.0))
        .expect("valid DMA fixture")
        .with_resolution(resolution);
    (arch, lambda)
}
