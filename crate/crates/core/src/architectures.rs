//! Energy transmitter architectures and their beamforming configurations.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::channel::{
    self, array_to_point_channel, dma_element_coefficients, lorentzian_weight, ris_links,
    sum_complex, ChannelVector,
};
use crate::geometry::{make_planar_array, ArrayGeometry, Element, ElementPattern, Vec3};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Guards `⌊x⌋` against `x` landing a hair below an integer.
const FLOOR_SLACK: f64 = 1e-9;

fn floor_count(x: f64) -> usize {
    (x + FLOOR_SLACK).floor().max(0.0) as usize
}

/// Phase-shifter resolution of a tunable element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseResolution {
    Continuous,
    Bits(u32),
}

impl PhaseResolution {
    pub fn bits(self) -> Option<u32> {
        match self {
            PhaseResolution::Continuous => None,
            PhaseResolution::Bits(b) => Some(b),
        }
    }

    /// Maps a phase onto the resolution grid (identity for continuous).
    pub fn project(self, phase: f64) -> f64 {
        match self {
            PhaseResolution::Continuous => phase.rem_euclid(TAU),
            PhaseResolution::Bits(b) => quantize_phase(phase, b),
        }
    }
}

impl std::fmt::Display for PhaseResolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseResolution::Continuous => f.write_str("inf"),
            PhaseResolution::Bits(b) => write!(f, "{b}"),
        }
    }
}

/// Waveguide-fed dynamic metasurface antenna.
///
/// Elements are stored waveguide by waveguide; `guide_positions[n]` is the
/// distance of element `n` from the feed end of its waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct DmaConfig {
    pub waveguide_count: usize,
    pub elements_per_waveguide: usize,
    pub elements: Vec<Element>,
    pub guide_positions: Vec<f64>,
    /// In-guide wavenumber β, rad/m.
    pub guide_wavenumber: f64,
}

impl DmaConfig {
    /// Square DMA of edge `edge_length` facing `+z` at the origin:
    /// `⌊2L/λ⌋+1` waveguides at λ/2 pitch, each with `⌊5L/λ⌋+1` elements at
    /// λ/5 pitch. `effective_index` scales the in-guide wavenumber.
    pub fn square(
        edge_length: f64,
        wavelength: f64,
        pattern: ElementPattern,
        effective_index: f64,
    ) -> Result<Self> {
        check_positive("edge_length", edge_length)?;
        check_positive("wavelength", wavelength)?;
        check_positive("effective_index", effective_index)?;
        let m = floor_count(2.0 * edge_length / wavelength) + 1;
        let ne = floor_count(5.0 * edge_length / wavelength) + 1;
        let guide_pitch = wavelength / 2.0;
        let element_pitch = wavelength / 5.0;

        let mut elements = Vec::with_capacity(m * ne);
        let mut guide_positions = Vec::with_capacity(m * ne);
        for g in 0..m {
            let y = (g as f64 - (m - 1) as f64 / 2.0) * guide_pitch;
            for l in 0..ne {
                let x = (l as f64 - (ne - 1) as f64 / 2.0) * element_pitch;
                elements.push(Element {
                    position: Vec3::new(x, y, 0.0),
                    normal: Vec3::Z,
                    pattern,
                });
                guide_positions.push(l as f64 * element_pitch);
            }
        }
        Ok(Self {
            waveguide_count: m,
            elements_per_waveguide: ne,
            elements,
            guide_positions,
            guide_wavenumber: effective_index * TAU / wavelength,
        })
    }

    /// Arbitrary layout; `elements.len()` must equal `M·N_e`.
    pub fn from_parts(
        waveguide_count: usize,
        elements_per_waveguide: usize,
        elements: Vec<Element>,
        guide_positions: Vec<f64>,
        guide_wavenumber: f64,
    ) -> Result<Self> {
        if waveguide_count == 0 || elements_per_waveguide == 0 {
            return Err(Error::invalid("waveguide_count", "DMA needs at least one element"));
        }
        let n = waveguide_count * elements_per_waveguide;
        for len in [elements.len(), guide_positions.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        Ok(Self {
            waveguide_count,
            elements_per_waveguide,
            elements,
            guide_positions,
            guide_wavenumber,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn amplitude_scale(&self) -> f64 {
        1.0 / (self.len() as f64).sqrt()
    }

    /// Complex feed weight of each element, `q(φ)·e^{−jβρ}/√(M·N_e)`.
    pub fn feed_weights(&self, phases: &[f64]) -> Vec<Complex64> {
        let s = self.amplitude_scale();
        self.guide_positions
            .iter()
            .zip(phases)
            .map(|(&rho, &p)| lorentzian_weight(p) * Complex64::cis(-self.guide_wavenumber * rho) * s)
            .collect()
    }
}

/// A radiating element with its complex excitation amplitude; `|x|²` is
/// in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radiator {
    pub element: Element,
    pub amplitude: Complex64,
}

/// The three transmitter architectures with their tunable state.
#[derive(Debug, Clone, PartialEq)]
pub enum EtArchitecture {
    /// One RF chain per antenna; `precoder` has unit norm.
    FullyDigital {
        array: ArrayGeometry,
        precoder: Vec<Complex64>,
    },
    /// Single feeder illuminating a passive reflecting surface.
    RisBased {
        feeder: Element,
        ris: ArrayGeometry,
        resolution: PhaseResolution,
        phases: Vec<f64>,
    },
    /// Single RF chain split over the waveguides of a metasurface antenna.
    DmaBased {
        dma: DmaConfig,
        resolution: PhaseResolution,
        phases: Vec<f64>,
    },
}

impl EtArchitecture {
    pub fn fully_digital(array: ArrayGeometry) -> Self {
        let n = array.len();
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        EtArchitecture::FullyDigital {
            array,
            precoder: vec![amp; n],
        }
    }

    /// Short architecture tag used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            EtArchitecture::FullyDigital { .. } => "fd",
            EtArchitecture::RisBased { .. } => "ris",
            EtArchitecture::DmaBased { .. } => "dma",
        }
    }

    pub fn resolution(&self) -> PhaseResolution {
        match self {
            EtArchitecture::FullyDigital { .. } => PhaseResolution::Continuous,
            EtArchitecture::RisBased { resolution, .. }
            | EtArchitecture::DmaBased { resolution, .. } => *resolution,
        }
    }

    /// Number of antenna, RIS or metamaterial elements.
    pub fn element_count(&self) -> usize {
        match self {
            EtArchitecture::FullyDigital { array, .. } => array.len(),
            EtArchitecture::RisBased { ris, .. } => ris.len(),
            EtArchitecture::DmaBased { dma, .. } => dma.len(),
        }
    }

    /// Returns a copy with the given resolution; phases are re-projected.
    pub fn with_resolution(mut self, new: PhaseResolution) -> Self {
        if let EtArchitecture::RisBased {
            resolution, phases, ..
        }
        | EtArchitecture::DmaBased {
            resolution, phases, ..
        } = &mut self
        {
            *resolution = new;
            for p in phases.iter_mut() {
                *p = new.project(*p);
            }
        }
        self
    }

    /// Replaces the tunable phases, projecting onto the resolution grid.
    /// A fully-digital architecture has no phases and is returned unchanged.
    pub fn with_phases(mut self, new_phases: &[f64]) -> Result<Self> {
        if let EtArchitecture::RisBased {
            resolution, phases, ..
        }
        | EtArchitecture::DmaBased {
            resolution, phases, ..
        } = &mut self
        {
            if new_phases.len() != phases.len() {
                return Err(Error::LengthMismatch {
                    expected: phases.len(),
                    actual: new_phases.len(),
                });
            }
            *phases = new_phases.iter().map(|&p| resolution.project(p)).collect();
        }
        Ok(self)
    }

    /// Effective channel to `point` per unit transmit amplitude, so the
    /// delivered power is `P_t·|h|²`.
    pub fn effective_channel(&self, point: Vec3, rx_gain: f64, wavelength: f64) -> Result<Complex64> {
        match self {
            EtArchitecture::FullyDigital { array, precoder } => {
                let h = array_to_point_channel(array, point, rx_gain, wavelength)?;
                Ok(sum_complex(h.coefficients.iter().zip(precoder).map(|(h, w)| h * w)))
            }
            EtArchitecture::RisBased {
                feeder,
                ris,
                phases,
                ..
            } => channel::cascaded_ris_channel(feeder, ris, phases, point, rx_gain, wavelength),
            EtArchitecture::DmaBased { dma, phases, .. } => {
                channel::dma_effective_channel(dma, phases, point, rx_gain, wavelength)
            }
        }
    }

    /// Elements that radiate towards the receiver side, with the complex
    /// amplitudes they carry under `transmit_power`. RIS elements re-radiate
    /// the feeder field they capture.
    pub fn radiators(&self, transmit_power: f64, wavelength: f64) -> Result<Vec<Radiator>> {
        let s = transmit_power.sqrt();
        match self {
            EtArchitecture::FullyDigital { array, precoder } => Ok(array
                .elements
                .iter()
                .zip(precoder)
                .map(|(e, w)| Radiator {
                    element: *e,
                    amplitude: w * s,
                })
                .collect()),
            EtArchitecture::RisBased {
                feeder, ris, phases, ..
            } => ris
                .elements
                .iter()
                .zip(phases)
                .map(|(e, &theta)| {
                    let f = channel::element_link(feeder, e, wavelength)?;
                    Ok(Radiator {
                        element: *e,
                        amplitude: f * Complex64::cis(theta) * s,
                    })
                })
                .collect(),
            EtArchitecture::DmaBased { dma, phases, .. } => Ok(dma
                .elements
                .iter()
                .zip(dma.feed_weights(phases))
                .map(|(e, w)| Radiator {
                    element: *e,
                    amplitude: w * s,
                })
                .collect()),
        }
    }

    /// Positions of every physical radiating or feeding structure.
    pub fn structure_points(&self) -> Vec<Vec3> {
        match self {
            EtArchitecture::FullyDigital { array, .. } => {
                array.elements.iter().map(|e| e.position).collect()
            }
            EtArchitecture::RisBased { feeder, ris, .. } => std::iter::once(feeder.position)
                .chain(ris.elements.iter().map(|e| e.position))
                .collect(),
            EtArchitecture::DmaBased { dma, .. } => {
                dma.elements.iter().map(|e| e.position).collect()
            }
        }
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be positive")))
    }
}

/// Distance between the RIS center and its feeder, `4L/√π`.
pub fn ris_feeder_distance(edge_length: f64) -> f64 {
    4.0 * edge_length / PI.sqrt()
}

/// RIS-based transmitter: `(⌊5L/λ⌋+1)²` elements at λ/5 pitch in the
/// `z = 0` plane facing `+z`, illuminated by a feeder on the boresight axis
/// at `4L/√π` pointing back at the surface. Gains are linear.
pub fn build_ris_et(
    edge_length: f64,
    wavelength: f64,
    feeder_gain: f64,
    ris_element_gain: f64,
) -> Result<EtArchitecture> {
    check_positive("edge_length", edge_length)?;
    check_positive("wavelength", wavelength)?;
    let n = floor_count(5.0 * edge_length / wavelength) + 1;
    let pitch = wavelength / 5.0;
    let ris = make_planar_array(
        n,
        n,
        (n - 1) as f64 * pitch,
        Vec3::ZERO,
        Vec3::Z,
        ElementPattern::cosine_power(ris_element_gain)?,
    )?;
    let feeder = Element::new(
        Vec3::new(0.0, 0.0, ris_feeder_distance(edge_length)),
        -Vec3::Z,
        ElementPattern::cosine_power(feeder_gain)?,
    )?;
    let phases = vec![0.0; ris.len()];
    Ok(EtArchitecture::RisBased {
        feeder,
        ris,
        resolution: PhaseResolution::Continuous,
        phases,
    })
}

/// DMA-based transmitter with a lossless guide (`β = 2π/λ`).
pub fn build_dma_et(edge_length: f64, wavelength: f64, element_gain: f64) -> Result<EtArchitecture> {
    build_dma_et_with_index(edge_length, wavelength, element_gain, 1.0)
}

pub fn build_dma_et_with_index(
    edge_length: f64,
    wavelength: f64,
    element_gain: f64,
    effective_index: f64,
) -> Result<EtArchitecture> {
    let dma = DmaConfig::square(
        edge_length,
        wavelength,
        ElementPattern::cosine_power(element_gain)?,
        effective_index,
    )?;
    // φ = π/2 gives |q| = 1 on every element.
    let phases = vec![PI / 2.0; dma.len()];
    Ok(EtArchitecture::DmaBased {
        dma,
        resolution: PhaseResolution::Continuous,
        phases,
    })
}

/// Maximum-ratio transmission `w = conj(h)/‖h‖`, so that `Σ h_n w_n = ‖h‖`.
pub fn mrt_precoder(h: &ChannelVector) -> Result<Vec<Complex64>> {
    let norm = h.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroChannel);
    }
    Ok(h.coefficients.iter().map(|c| c.conj() / norm).collect())
}

/// Conjugate phase shifts `θ_n = −(arg f_n + arg g_n) mod 2π`, which align
/// every cascaded path.
pub fn conjugate_ris_phases(f: &[Complex64], g: &[Complex64]) -> Result<Vec<f64>> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            actual: g.len(),
        });
    }
    Ok(f.iter()
        .zip(g)
        .map(|(f, g)| (-(f.arg() + g.arg())).rem_euclid(TAU))
        .collect())
}

/// Nearest point of the grid `{2πk/2^bits}`; exact ties go to the lower
/// grid index.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let grid = PhaseGrid::new(bits);
    let wrapped = if (0.0..TAU).contains(&phase) {
        phase
    } else {
        phase.rem_euclid(TAU)
    };
    grid.phase(grid.index(wrapped))
}

/// Uniform `2^bits`-level phase grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseGrid {
    mask: u64,
    scale: f64,
    step: f64,
}

impl PhaseGrid {
    pub(crate) fn new(bits: u32) -> Self {
        let levels = 1u64 << bits.clamp(1, 52);
        Self {
            mask: levels - 1,
            scale: levels as f64 / TAU,
            step: TAU / levels as f64,
        }
    }

    /// Nearest grid index for a phase in `[0, 2π)`, ties to the lower one.
    #[inline]
    pub(crate) fn index(&self, wrapped: f64) -> u64 {
        let y = wrapped * self.scale;
        let k = y as u64;
        (k + u64::from(y - k as f64 > 0.5)) & self.mask
    }

    #[inline]
    pub(crate) fn phase(&self, index: u64) -> f64 {
        index as f64 * self.step
    }
}

pub fn quantize_phases(phases: &[f64], bits: u32) -> Vec<f64> {
    phases.iter().map(|&p| quantize_phase(p, bits)).collect()
}

/// `P_t·|h|²`.
pub fn delivered_power(h_eff: Complex64, transmit_power: f64) -> f64 {
    transmit_power * h_eff.norm_sqr()
}

/// Transmit power delivering `target` watts through `h_eff`.
pub fn required_transmit_power(h_eff: Complex64, target: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    let g = h_eff.norm_sqr();
    if !(g > 0.0) {
        return Err(Error::UnreachableTarget);
    }
    Ok(target / g)
}

/// Upper bound `Σ|f_n||g_n|` on the cascaded RIS channel magnitude.
pub fn coherent_bound(f: &[Complex64], g: &[Complex64]) -> f64 {
    f.iter()
        .zip(g)
        .map(|(f, g)| f.norm() * g.norm())
        .collect::<NeumaierSum>()
        .total()
}

/// RIS link coefficients for an architecture, or `None` for other kinds.
pub fn ris_coefficients(
    arch: &EtArchitecture,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Option<Result<(Vec<Complex64>, Vec<Complex64>)>> {
    match arch {
        EtArchitecture::RisBased { feeder, ris, .. } => {
            Some(ris_links(feeder, ris, point, rx_gain, wavelength))
        }
        _ => None,
    }
}

/// DMA per-element coefficients, or `None` for other kinds.
pub fn dma_coefficients(
    arch: &EtArchitecture,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Option<Result<Vec<Complex64>>> {
    match arch {
        EtArchitecture::DmaBased { dma, .. } => {
            Some(dma_element_coefficients(dma, point, rx_gain, wavelength))
        }
        _ => None,
    }
}
