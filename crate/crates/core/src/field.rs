//! Incident power density produced by a configured transmitter.
//!
//! The field is a scalar superposition of spherical waves,
//! `S(p) = |Σ_n x_n·√G_n(θ_n)·e^{−j2πd_n/λ}/d_n|² / 4π`, which is consistent
//! with the channel model: `S(p)·G_rλ²/4π` equals the power delivered to a
//! receiver at `p`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::architectures::{EtArchitecture, Radiator};
use crate::geometry::{PatternKind, Vec3};
use crate::sum::{NeumaierSum, SUM_BLOCK};
use crate::{Error, Result};

/// Receive antenna gain of the energy receiver (isotropic).
pub const RX_GAIN: f64 = 1.0;

/// Default number of Fibonacci-lattice points on an evaluation sphere.
pub const DEFAULT_SPHERE_SAMPLES: usize = 10_000;

/// Minimum number of sphere samples accepted.
pub const MIN_SPHERE_SAMPLES: usize = 100;

/// Radiators prepared for repeated field evaluation.
#[derive(Debug, Clone)]
pub struct FieldSource {
    terms: Vec<Term>,
    inv_wavelength: f64,
    structure: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    position: Vec3,
    normal: Vec3,
    amplitude: Complex64,
    directive: bool,
    /// Half of the power-pattern exponent.
    half_exponent: f64,
}

impl FieldSource {
    pub fn new(arch: &EtArchitecture, transmit_power: f64, wavelength: f64) -> Result<Self> {
        if !(transmit_power >= 0.0) {
            return Err(Error::invalid("transmit_power", "must be >= 0"));
        }
        if !(wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        let radiators = arch.radiators(transmit_power, wavelength)?;
        Ok(Self::from_radiators(&radiators, wavelength, arch.structure_points()))
    }

    pub fn from_radiators(radiators: &[Radiator], wavelength: f64, structure: Vec<Vec3>) -> Self {
        let terms = radiators
            .iter()
            .filter(|r| r.amplitude != Complex64::new(0.0, 0.0))
            .map(|r| {
                let p = r.element.pattern;
                let directive = p.kind() == PatternKind::CosinePower;
                let gain_amp = if directive { p.boresight_gain().sqrt() } else { 1.0 };
                Term {
                    position: r.element.position,
                    normal: r.element.normal,
                    amplitude: r.amplitude * gain_amp,
                    directive,
                    half_exponent: p.exponent() / 2.0,
                }
            })
            .collect();
        Self {
            terms,
            inv_wavelength: 1.0 / wavelength,
            structure,
        }
    }

    /// Complex field sum `Σ x_n√G_n e^{−jkd}/d` at `point`.
    pub fn field_at(&self, point: Vec3) -> Result<Complex64> {
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        // Short blocks are summed directly, block totals are compensated.
        for block in self.terms.chunks(SUM_BLOCK) {
            let (mut bre, mut bim) = (0.0, 0.0);
            for t in block {
                let dv = point - t.position;
                let d2 = dv.dot(dv);
                if d2 == 0.0 {
                    return Err(Error::SingularGeometry(format!(
                        "field point ({}, {}, {}) coincides with a radiator",
                        point.x, point.y, point.z
                    )));
                }
                let d = d2.sqrt();
                let mut a = 1.0 / d;
                if t.directive {
                    let c = dv.dot(t.normal) * a;
                    if c <= 0.0 {
                        continue;
                    }
                    if t.half_exponent != 0.0 {
                        a *= (t.half_exponent * c.min(1.0).ln()).exp();
                    }
                }
                let (s, co) = sin_cos_turns(d * self.inv_wavelength);
                let (wr, wi) = (t.amplitude.re * a, t.amplitude.im * a);
                // e^{-jkd} = cos - j sin
                bre += wr * co + wi * s;
                bim += wi * co - wr * s;
            }
            re.add(bre);
            im.add(bim);
        }
        Ok(Complex64::new(re.total(), im.total()))
    }

    /// Incident power density at `point`, W/m².
    pub fn density_at(&self, point: Vec3) -> Result<f64> {
        Ok(self.field_at(point)?.norm_sqr() / (4.0 * PI))
    }

    /// Closest approach of any physical structure to `center`.
    pub fn min_structure_distance(&self, center: Vec3) -> f64 {
        self.structure
            .iter()
            .map(|p| p.distance(center))
            .fold(f64::INFINITY, f64::min)
    }

    /// Densities at every point; evaluation order does not affect results.
    pub fn densities(&self, points: &[Vec3]) -> Result<Vec<f64>> {
        points.par_iter().map(|&p| self.density_at(p)).collect()
    }

    /// Max and mean density over a Fibonacci lattice on the sphere.
    pub fn sphere_stats(&self, center: Vec3, radius: f64, n_samples: usize) -> Result<SphereStats> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("radius", format!("{radius} must be positive")));
        }
        if n_samples < MIN_SPHERE_SAMPLES {
            return Err(Error::invalid(
                "n_samples",
                format!("{n_samples} is below the minimum of {MIN_SPHERE_SAMPLES}"),
            ));
        }
        let nearest = self.min_structure_distance(center);
        if nearest <= radius {
            return Err(Error::RadiatorInsideSphere {
                distance: nearest,
                radius,
            });
        }
        let points: Vec<Vec3> = fibonacci_sphere(n_samples)
            .into_iter()
            .map(|u| center + u * radius)
            .collect();
        let values = self.densities(&points)?;
        let (argmax, max) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let mean = values.iter().copied().collect::<NeumaierSum>().total() / values.len() as f64;
        Ok(SphereStats {
            max,
            mean,
            argmax: points[argmax],
        })
    }
}

/// `(sin 2πt, cos 2πt)`. The argument is reduced in cycles, so the result
/// keeps full accuracy for paths of thousands of wavelengths.
#[inline]
fn sin_cos_turns(t: f64) -> (f64, f64) {
    let q = (4.0 * t).round();
    let r = TAU * (t - 0.25 * q);
    let r2 = r * r;
    // Taylor series, |r| <= π/4: truncation below 1e-16.
    let s = r * (1.0
        + r2 * (-1.0 / 6.0
            + r2 * (1.0 / 120.0
                + r2 * (-1.0 / 5040.0
                    + r2 * (1.0 / 362_880.0
                        + r2 * (-1.0 / 39_916_800.0
                            + r2 * (1.0 / 6_227_020_800.0 + r2 * (-1.0 / 1_307_674_368_000.0))))))));
    let c = 1.0
        + r2 * (-0.5
            + r2 * (1.0 / 24.0
                + r2 * (-1.0 / 720.0
                    + r2 * (1.0 / 40_320.0
                        + r2 * (-1.0 / 3_628_800.0
                            + r2 * (1.0 / 479_001_600.0
                                + r2 * (-1.0 / 87_178_291_200.0 + r2 / 20_922_789_888_000.0)))))));
    match (q as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Summary of the density over an evaluation sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereStats {
    /// W/m².
    pub max: f64,
    /// W/m².
    pub mean: f64,
    /// Sample point where the max occurs.
    pub argmax: Vec3,
}

/// Sampled incident power density for one architecture state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    pub samples: Vec<(Vec3, f64)>,
    pub architecture: &'static str,
    pub transmit_power: f64,
}

impl DensityMap {
    pub fn max(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Samples the density of `arch` at each of `points`.
pub fn density_map(
    arch: &EtArchitecture,
    transmit_power: f64,
    points: &[Vec3],
    wavelength: f64,
) -> Result<DensityMap> {
    if points.is_empty() {
        return Err(Error::invalid("points", "density map needs at least one point"));
    }
    let src = FieldSource::new(arch, transmit_power, wavelength)?;
    let values = src.densities(points)?;
    Ok(DensityMap {
        samples: points.iter().copied().zip(values).collect(),
        architecture: arch.label(),
        transmit_power,
    })
}

/// `n` near-uniform unit vectors on the sphere (Fibonacci lattice). Every
/// point represents an equal area `4π/n`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Incident power density at a single point.
pub fn power_density_at(
    arch: &EtArchitecture,
    transmit_power: f64,
    point: Vec3,
    wavelength: f64,
) -> Result<f64> {
    FieldSource::new(arch, transmit_power, wavelength)?.density_at(point)
}

pub fn sphere_density_stats(
    arch: &EtArchitecture,
    transmit_power: f64,
    center: Vec3,
    radius: f64,
    n_samples: usize,
    wavelength: f64,
) -> Result<SphereStats> {
    FieldSource::new(arch, transmit_power, wavelength)?.sphere_stats(center, radius, n_samples)
}

/// Sphere-max and sphere-mean density per watt delivered to an isotropic
/// receiver at `center`, 1/m².
pub fn normalized_density_stats(
    arch: &EtArchitecture,
    center: Vec3,
    radius: f64,
    n_samples: usize,
    wavelength: f64,
) -> Result<SphereStats> {
    let delivered = crate::architectures::delivered_power(
        arch.effective_channel(center, RX_GAIN, wavelength)?,
        1.0,
    );
    if !(delivered > 0.0) {
        return Err(Error::invalid("architecture", "delivers zero power to the receiver"));
    }
    let s = sphere_density_stats(arch, 1.0, center, radius, n_samples, wavelength)?;
    Ok(SphereStats {
        max: s.max / delivered,
        mean: s.mean / delivered,
        argmax: s.argmax,
    })
}

/// Sphere-max density divided by the delivered power, 1/m².
pub fn normalized_density(
    arch: &EtArchitecture,
    center: Vec3,
    radius: f64,
    n_samples: usize,
    wavelength: f64,
) -> Result<f64> {
    Ok(normalized_density_stats(arch, center, radius, n_samples, wavelength)?.max)
}

/// Power crossing a sphere, by equal-area quadrature over `n` samples.
pub fn radiated_power_through_sphere(
    src: &FieldSource,
    center: Vec3,
    radius: f64,
    n_samples: usize,
) -> Result<f64> {
    let points: Vec<Vec3> = fibonacci_sphere(n_samples)
        .into_iter()
        .map(|u| center + u * radius)
        .collect();
    let values = src.densities(&points)?;
    let area = 4.0 * PI * radius * radius / n_samples as f64;
    Ok(values.iter().copied().collect::<NeumaierSum>().total() * area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architectures::{mrt_precoder, EtArchitecture};
    use crate::channel::array_to_point_channel;
    use crate::geometry::{make_planar_array, ElementPattern};
    use approx::assert_relative_eq;

    fn single_iso() -> EtArchitecture {
        let a = make_planar_array(1, 1, 0.0, Vec3::ZERO, Vec3::Z, ElementPattern::ISOTROPIC)
            .unwrap();
        EtArchitecture::fully_digital(a)
    }

    #[test]
    fn turn_sin_cos_matches_std() {
        let mut worst: f64 = 0.0;
        for k in 0..200_000 {
            let t = -50.0 + k as f64 * 0.000_517_3 + (k as f64).sqrt() * 1e-3;
            let (s, c) = sin_cos_turns(t);
            let (es, ec) = (TAU * t).sin_cos();
            worst = worst.max((s - es).abs()).max((c - ec).abs());
        }
        // the std reference itself carries the rounding of 2πt
        assert!(worst < 1e-13, "{worst}");
        for t in [0.0, 0.125, 0.25, 0.5, 0.75, 1.0, -0.25, 1234.5] {
            let (s, c) = sin_cos_turns(t);
            assert!((s * s + c * c - 1.0).abs() < 1e-15);
        }
        assert!(sin_cos_turns(0.25).1.abs() < 1e-16);
    }

    #[test]
    fn isotropic_point_source() {
        let arch = single_iso();
        let s1 = power_density_at(&arch, 1.0, Vec3::new(0.0, 1.0, 0.0), 0.1).unwrap();
        assert_relative_eq!(s1, 1.0 / (4.0 * PI), max_relative = 1e-12);
        let s2 = power_density_at(&arch, 1.0, Vec3::new(0.0, 0.0, -2.0), 0.1).unwrap();
        assert_relative_eq!(s2, 1.0 / (16.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn sphere_stats_single_source() {
        let arch = single_iso();
        let d = 10.0;
        let r = 0.2;
        let s = sphere_density_stats(&arch, 1.0, Vec3::new(0.0, 0.0, d), r, 10_000, 0.1).unwrap();
        let expect_max = 1.0 / (4.0 * PI * (d - r).powi(2));
        assert_relative_eq!(s.max, expect_max, max_relative = 1e-3);
        // mean of 1/|p|² over a sphere of radius r at distance d is
        // (1/(2rd))·ln((d+r)/(d−r)) / 4π
        let expect_mean = ((d + r) / (d - r)).ln() / (2.0 * r * d) / (4.0 * PI);
        assert_relative_eq!(s.mean, expect_mean, max_relative = 1e-3);
        assert_relative_eq!(s.mean, 1.0 / (4.0 * PI * d * d), max_relative = 1e-2);
    }

    #[test]
    fn sphere_touching_radiator_is_rejected() {
        let arch = single_iso();
        let err = sphere_density_stats(&arch, 1.0, Vec3::new(0.0, 0.0, 1.0), 1.0, 200, 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::RadiatorInsideSphere { .. }));
        assert!(sphere_density_stats(&arch, 1.0, Vec3::new(0.0, 0.0, 1.0), 0.5, 10, 0.1).is_err());
    }

    #[test]
    fn fibonacci_points_are_unit_and_balanced() {
        let pts = fibonacci_sphere(5000);
        let mut c = Vec3::ZERO;
        for p in &pts {
            assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-12);
            c = c + *p;
        }
        assert!(c.norm() / 5000.0 < 1e-3);
    }

    #[test]
    fn single_isotropic_conserves_power() {
        let src = FieldSource::new(&single_iso(), 2.5, 0.1).unwrap();
        // |S| rather than the normal flux is integrated, so the source must sit
        // near the center relative to the radius.
        let p = radiated_power_through_sphere(&src, Vec3::new(0.3, 0.1, -0.2), 30.0, 100_000)
            .unwrap();
        assert_relative_eq!(p, 2.5, max_relative = 5e-3);
    }

    #[test]
    fn cosine_pattern_integrates_to_four_pi() {
        for gain_db in [3.0, 7.0, 13.0] {
            let p = ElementPattern::cosine_power_db(gain_db).unwrap();
            let n = 100_000;
            let total: f64 = fibonacci_sphere(n).iter().map(|u| p.gain(u.z)).sum::<f64>()
                * 4.0
                * PI
                / n as f64;
            assert_relative_eq!(total, 4.0 * PI, max_relative = 5e-3);
        }
    }

    #[test]
    fn focus_density_matches_delivered_power() {
        let lambda = 0.1;
        let pattern = ElementPattern::cosine_power_db(13.0).unwrap();
        let array = make_planar_array(10, 10, 1.2, Vec3::ZERO, Vec3::Z, pattern).unwrap();
        let focus = Vec3::new(0.0, 0.0, 8.0);
        let h = array_to_point_channel(&array, focus, RX_GAIN, lambda).unwrap();
        let precoder = mrt_precoder(&h).unwrap();
        let arch = EtArchitecture::FullyDigital { array, precoder };
        let p_t = 3.0;
        let s = power_density_at(&arch, p_t, focus, lambda).unwrap();
        let delivered = p_t * h.norm().powi(2);
        assert_relative_eq!(s * lambda * lambda / (4.0 * PI), delivered, max_relative = 1e-9);
    }

    #[test]
    fn normalized_density_is_scale_free() {
        let lambda = 0.05;
        let pattern = ElementPattern::cosine_power_db(13.0).unwrap();
        let array = make_planar_array(4, 4, 0.4, Vec3::ZERO, Vec3::Z, pattern).unwrap();
        let focus = Vec3::new(0.0, 0.0, 2.0);
        let h = array_to_point_channel(&array, focus, RX_GAIN, lambda).unwrap();
        let arch = EtArchitecture::FullyDigital {
            array,
            precoder: mrt_precoder(&h).unwrap(),
        };
        let a = sphere_density_stats(&arch, 1.0, focus, 0.05, 500, lambda).unwrap();
        let b = sphere_density_stats(&arch, 7.0, focus, 0.05, 500, lambda).unwrap();
        assert_relative_eq!(b.max / 7.0, a.max, max_relative = 1e-12);
        // small-radius limit approaches the inverse effective aperture
        let tiny = normalized_density(&arch, focus, 1e-5, 200, lambda).unwrap();
        assert_relative_eq!(tiny, 4.0 * PI / (lambda * lambda), max_relative = 1e-3);
    }
}
