//! Line-of-sight near-field channels.
//!
//! Every coefficient uses the exact element-to-point distance, so focusing
//! inside the radiating near field comes out of the model without any
//! plane-wave approximation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::architectures::DmaConfig;
use crate::geometry::{ArrayGeometry, Element, Vec3};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Complex channel from every transmit element to one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coefficients: Vec<Complex64>,
    /// Carrier frequency, Hz.
    pub frequency: f64,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<NeumaierSum>()
            .total()
            .sqrt()
    }
}

/// Free-space spherical-wave term `e^{−j2πd/λ}/d` together with `d`.
pub(crate) fn spherical_wave(from: Vec3, to: Vec3, wavelength: f64) -> Result<(Complex64, f64)> {
    let d = from.distance(to);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::SingularGeometry(format!(
            "coincident points at ({}, {}, {})",
            to.x, to.y, to.z
        )));
    }
    let phase = -2.0 * PI * d / wavelength;
    Ok((Complex64::from_polar(1.0 / d, phase), d))
}

/// Friis line-of-sight coefficient from a transmit element to a receiver
/// with linear gain `rx_gain`:
/// `√(G_t(θ)·G_r) · λ/(4πd) · e^{−j2πd/λ}`.
pub fn los_coefficient(
    tx: &Element,
    rx_position: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<Complex64> {
    let (wave, _) = spherical_wave(tx.position, rx_position, wavelength)?;
    let amplitude = (tx.gain_towards(rx_position) * rx_gain).sqrt() * wavelength / (4.0 * PI);
    Ok(wave * amplitude)
}

/// Coefficient between two directive elements; the receive gain follows the
/// receiving element's pattern at the angle of arrival.
pub fn element_link(tx: &Element, rx: &Element, wavelength: f64) -> Result<Complex64> {
    los_coefficient(tx, rx.position, rx.gain_towards(tx.position), wavelength)
}

/// Channel from every array element to `point`.
pub fn array_to_point_channel(
    array: &ArrayGeometry,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<ChannelVector> {
    let coefficients = array
        .elements
        .iter()
        .map(|e| los_coefficient(e, point, rx_gain, wavelength))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector {
        coefficients,
        frequency: crate::SPEED_OF_LIGHT / wavelength,
    })
}

/// Feeder→RIS (`f`) and RIS→point (`g`) coefficients. The RIS element
/// pattern weights both the incidence and the reflection direction.
pub fn ris_links(
    feeder: &Element,
    ris: &ArrayGeometry,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut f = Vec::with_capacity(ris.len());
    let mut g = Vec::with_capacity(ris.len());
    for e in &ris.elements {
        f.push(element_link(feeder, e, wavelength)?);
        g.push(los_coefficient(e, point, rx_gain, wavelength)?);
    }
    Ok((f, g))
}

/// `Σ_n f_n·e^{jθ_n}·g_n`.
pub fn cascade(f: &[Complex64], g: &[Complex64], phases: &[f64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            actual: g.len(),
        });
    }
    if phases.len() != f.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            actual: phases.len(),
        });
    }
    Ok(sum_complex(
        f.iter()
            .zip(g)
            .zip(phases)
            .map(|((f, g), &t)| f * g * Complex64::cis(t)),
    ))
}

/// Effective channel of a RIS-based transmitter with passive unit-modulus
/// reflection coefficients `e^{jθ_n}`.
pub fn cascaded_ris_channel(
    feeder: &Element,
    ris: &ArrayGeometry,
    phases: &[f64],
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<Complex64> {
    if phases.len() != ris.len() {
        return Err(Error::LengthMismatch {
            expected: ris.len(),
            actual: phases.len(),
        });
    }
    let (f, g) = ris_links(feeder, ris, point, rx_gain, wavelength)?;
    cascade(&f, &g, phases)
}

/// Lorentzian-constrained metamaterial weight `q(φ) = (j + e^{jφ})/2`.
///
/// All weights lie on the circle of radius 1/2 centered at `j/2`.
pub fn lorentzian_weight(phase: f64) -> Complex64 {
    (Complex64::i() + Complex64::cis(phase)) * 0.5
}

/// Per-element DMA coefficients `e^{−jβρ}·h/√(M·N_e)`; the effective channel
/// is `Σ_n q(φ_n)·b_n`.
pub fn dma_element_coefficients(
    dma: &DmaConfig,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<Vec<Complex64>> {
    let scale = 1.0 / ((dma.waveguide_count * dma.elements_per_waveguide) as f64).sqrt();
    dma.elements
        .iter()
        .zip(&dma.guide_positions)
        .map(|(e, &rho)| {
            let h = los_coefficient(e, point, rx_gain, wavelength)?;
            Ok(h * Complex64::cis(-dma.guide_wavenumber * rho) * scale)
        })
        .collect()
}

/// Effective channel of a DMA-based transmitter: an equal split over `M`
/// waveguides, each feeding `N_e` Lorentzian-constrained elements.
pub fn dma_effective_channel(
    dma: &DmaConfig,
    lorentzian_phases: &[f64],
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
) -> Result<Complex64> {
    if lorentzian_phases.len() != dma.len() {
        return Err(Error::LengthMismatch {
            expected: dma.len(),
            actual: lorentzian_phases.len(),
        });
    }
    let b = dma_element_coefficients(dma, point, rx_gain, wavelength)?;
    Ok(sum_complex(
        b.iter()
            .zip(lorentzian_phases)
            .map(|(b, &p)| b * lorentzian_weight(p)),
    ))
}

/// Compensated complex sum.
pub(crate) fn sum_complex(terms: impl Iterator<Item = Complex64>) -> Complex64 {
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for t in terms {
        re.add(t.re);
        im.add(t.im);
    }
    Complex64::new(re.total(), im.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_planar_array, ElementPattern};
    use approx::assert_relative_eq;

    fn iso_at(p: Vec3) -> Element {
        Element::new(p, Vec3::Z, ElementPattern::ISOTROPIC).unwrap()
    }

    #[test]
    fn friis_amplitude_at_one_wavelength() {
        let lambda = 0.1;
        let h = los_coefficient(&iso_at(Vec3::ZERO), Vec3::new(0.0, 0.0, lambda), 1.0, lambda)
            .unwrap();
        assert_relative_eq!(h.norm(), 1.0 / (4.0 * PI), max_relative = 1e-12);
        assert!(h.im.abs() < 1e-12 && h.re > 0.0);
    }

    #[test]
    fn phase_periodicity_and_inverse_distance() {
        let lambda = 0.05;
        let tx = iso_at(Vec3::ZERO);
        let d = 1.234;
        let a = los_coefficient(&tx, Vec3::new(0.0, 0.0, d), 1.0, lambda).unwrap();
        let b = los_coefficient(&tx, Vec3::new(0.0, 0.0, d + lambda), 1.0, lambda).unwrap();
        assert!((a.arg() - b.arg()).abs() < 1e-9);
        let one = los_coefficient(&tx, Vec3::new(lambda, 0.0, 0.0), 1.0, lambda).unwrap();
        let two = los_coefficient(&tx, Vec3::new(2.0 * lambda, 0.0, 0.0), 1.0, lambda).unwrap();
        assert_relative_eq!(two.norm(), one.norm() / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn coincident_points_are_singular() {
        let err = los_coefficient(&iso_at(Vec3::X), Vec3::X, 1.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::SingularGeometry(_)));
    }

    #[test]
    fn reciprocity_for_isotropic_elements() {
        let a = iso_at(Vec3::new(0.1, -0.3, 0.2));
        let b = iso_at(Vec3::new(2.0, 1.0, 4.0));
        let ab = element_link(&a, &b, 0.07).unwrap();
        let ba = element_link(&b, &a, 0.07).unwrap();
        assert_relative_eq!(ab.norm(), ba.norm(), max_relative = 1e-14);
    }

    #[test]
    fn boresight_channel_peaks_at_center() {
        let lambda = 0.0999;
        let pattern = ElementPattern::cosine_power_db(13.0).unwrap();
        let arr = make_planar_array(10, 10, 1.2243, Vec3::ZERO, Vec3::Z, pattern).unwrap();
        let h = array_to_point_channel(&arr, Vec3::new(0.0, 0.0, 8.0), 1.0, lambda).unwrap();
        assert_eq!(h.len(), 100);
        let center = [44, 45, 54, 55];
        let max_center = center.iter().map(|&i| h.coefficients[i].norm()).fold(0.0, f64::max);
        let max_all = h.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert_relative_eq!(max_center, max_all);
        // mirror-symmetric elements have equal magnitude
        for i in 0..100 {
            assert_relative_eq!(h.coefficients[i].norm(), h.coefficients[99 - i].norm(),
                max_relative = 1e-12);
        }
    }

    #[test]
    fn single_element_array_matches_los() {
        let arr = make_planar_array(1, 1, 0.0, Vec3::ZERO, Vec3::Z, ElementPattern::ISOTROPIC)
            .unwrap();
        let p = Vec3::new(0.3, 0.2, 2.0);
        let h = array_to_point_channel(&arr, p, 2.0, 0.1).unwrap();
        assert_eq!(h.coefficients, vec![los_coefficient(&arr.elements[0], p, 2.0, 0.1).unwrap()]);
    }

    #[test]
    fn hand_evaluated_two_element_cascade() {
        let f = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let g = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let h = cascade(&f, &g, &[0.0, PI]).unwrap();
        assert_relative_eq!(h.re, 2.0, epsilon = 1e-12);
        assert!(h.im.abs() < 1e-12);
        assert!(cascade(&f, &g, &[0.0]).is_err());
    }

    #[test]
    fn lorentzian_circle() {
        assert_relative_eq!(lorentzian_weight(PI / 2.0).norm(), 1.0, epsilon = 1e-15);
        assert!(lorentzian_weight(-PI / 2.0).norm() < 1e-15);
        for k in 0..360 {
            let q = lorentzian_weight(k as f64 * PI / 180.0);
            assert!(q.norm() <= 1.0 + 1e-15);
            assert_relative_eq!((q - Complex64::new(0.0, 0.5)).norm(), 0.5, epsilon = 1e-15);
        }
    }
}
