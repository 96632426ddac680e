//! Phase configuration search: global-best particle swarm optimization,
//! exhaustive enumeration for small discrete instances, and the
//! architecture-level driver that turns a delivered-power target into a
//! configured transmitter.
//!
//! Particles live on the torus `[0, 2π)^n`. Discrete domains are handled by
//! projecting every particle onto the phase grid before evaluating it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::architectures::{
    conjugate_ris_phases, coherent_bound, mrt_precoder, quantize_phase, required_transmit_power,
    EtArchitecture, PhaseGrid, PhaseResolution,
};
use crate::channel::{array_to_point_channel, dma_element_coefficients, lorentzian_weight, ris_links};
use crate::geometry::Vec3;
use crate::sum::{ComplexSum, NeumaierSum};
use crate::{Error, Result};

/// Swarm settings. Defaults are the standard constriction values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 50,
            iterations: 200,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
            seed: 42,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 {
            return Err(Error::invalid("swarm_size", "needs at least 2 particles"));
        }
        if self.iterations < 1 {
            return Err(Error::invalid("iterations", "must be >= 1"));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be a finite value >= 0")));
            }
        }
        Ok(())
    }
}

const UNIT_32: f64 = 1.0 / 4_294_967_296.0;

/// Per-iteration velocity bound, radians.
pub const MAX_VELOCITY: f64 = PI;

/// Search space: `dimension` phases, continuous or on a `2^b` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseDomain {
    pub dimension: usize,
    pub resolution: PhaseResolution,
}

impl PhaseDomain {
    pub fn new(dimension: usize, resolution: PhaseResolution) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be >= 1"));
        }
        if resolution == PhaseResolution::Bits(0) {
            return Err(Error::invalid("bits", "must be >= 1"));
        }
        Ok(Self {
            dimension,
            resolution,
        })
    }

    /// Projects phases already wrapped into `[0, 2π)`.
    fn project_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.resolution {
            PhaseResolution::Continuous => out.extend_from_slice(x),
            PhaseResolution::Bits(b) => {
                let grid = PhaseGrid::new(b);
                out.extend(x.iter().map(|&p| grid.phase(grid.index(p))));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    /// Best phases found (on the grid for discrete domains).
    pub best: Vec<f64>,
    pub value: f64,
    /// Best value after initialization and after every iteration.
    pub trace: Vec<f64>,
}

/// Minimizes `objective` over the domain from a uniformly random swarm.
pub fn pso_minimize<F>(objective: F, domain: &PhaseDomain, params: &PsoParams) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pso_minimize_seeded(objective, domain, params, &[])
}

/// As [`pso_minimize`], with `seeds` placed as the first particles.
pub fn pso_minimize_seeded<F>(
    objective: F,
    domain: &PhaseDomain,
    params: &PsoParams,
    seeds: &[Vec<f64>],
) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    params.validate()?;
    let dim = domain.dimension;
    if let Some(bad) = seeds.iter().find(|s| s.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.swarm_size;

    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        match seeds.get(i) {
            Some(s) => positions.push(s.iter().map(|p| p.rem_euclid(TAU)).collect()),
            None => positions.push((0..dim).map(|_| rng.gen_range(0.0..TAU)).collect()),
        }
    }
    let mut velocities: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-0.5..0.5) * MAX_VELOCITY).collect())
        .collect();

    let evaluate = |positions: &[Vec<f64>]| -> Result<Vec<(Vec<f64>, f64)>> {
        positions
            .par_iter()
            .map_init(Vec::new, |buf, x| {
                domain.project_into(x, buf);
                let v = objective(buf);
                if v.is_finite() {
                    Ok((buf.clone(), v))
                } else {
                    Err(Error::NonFiniteObjective(v))
                }
            })
            .collect()
    };

    let init = evaluate(&positions)?;
    let mut personal_pos = positions.clone();
    let mut personal_val: Vec<f64> = init.iter().map(|e| e.1).collect();
    let (best_idx, _) = argmin(&personal_val);
    let mut global_pos = personal_pos[best_idx].clone();
    let mut global_best = init[best_idx].0.clone();
    let mut global_val = personal_val[best_idx];
    let mut trace = Vec::with_capacity(params.iterations + 1);
    trace.push(global_val);

    for _ in 0..params.iterations {
        for i in 0..n {
            let lanes = positions[i]
                .iter_mut()
                .zip(velocities[i].iter_mut())
                .zip(&personal_pos[i])
                .zip(&global_pos);
            for (((x, v), &pb), &gb) in lanes {
                // Two 32-bit uniforms from one draw.
                let bits: u64 = rng.gen();
                let r1 = (bits >> 32) as f64 * UNIT_32;
                let r2 = (bits & 0xffff_ffff) as f64 * UNIT_32;
                let vel = params.inertia * *v
                    + params.cognitive * r1 * angular_diff(pb, *x)
                    + params.social * r2 * angular_diff(gb, *x);
                *v = vel.clamp(-MAX_VELOCITY, MAX_VELOCITY);
                *x = wrap_step(*x + *v);
            }
        }
        let scores = evaluate(&positions)?;
        for (i, (projected, value)) in scores.into_iter().enumerate() {
            if value < personal_val[i] {
                personal_val[i] = value;
                personal_pos[i].clone_from(&positions[i]);
                if value < global_val {
                    global_val = value;
                    global_pos.clone_from(&positions[i]);
                    global_best = projected;
                }
            }
        }
        trace.push(global_val);
    }

    Ok(PsoOutcome {
        best: global_best,
        value: global_val,
        trace,
    })
}

/// Signed shortest angular difference `a − b` in `(−π, π]` for phases in
/// `[0, 2π)`.
#[inline]
fn angular_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    // Branch-free: the sign of the correction is unpredictable.
    d - TAU * f64::from(u8::from(d > PI)) + TAU * f64::from(u8::from(d <= -PI))
}

/// Wraps `x ∈ (−2π, 4π)` into `[0, 2π)`.
#[inline]
fn wrap_step(x: f64) -> f64 {
    let y = x + TAU * f64::from(u8::from(x < 0.0)) - TAU * f64::from(u8::from(x >= TAU));
    if y >= TAU {
        0.0
    } else {
        y
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
}

/// Exhaustive search over a discrete domain. Configurations are visited in
/// lexicographic order of grid indices (first phase most significant) and
/// the first minimum wins.
pub fn brute_force<F>(objective: F, domain: &PhaseDomain, max_configs: u64) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    let PhaseResolution::Bits(bits) = domain.resolution else {
        return Err(Error::invalid("resolution", "exhaustive search needs a discrete domain"));
    };
    let configs = 2f64.powf(bits as f64 * domain.dimension as f64);
    if configs > max_configs as f64 {
        return Err(Error::DomainTooLarge {
            configs,
            max: max_configs,
        });
    }
    let levels = 1usize << bits;
    let step = TAU / levels as f64;
    let mut idx = vec![0usize; domain.dimension];
    let mut phases = vec![0.0; domain.dimension];
    let mut best = (phases.clone(), f64::INFINITY);
    loop {
        for (p, &k) in phases.iter_mut().zip(&idx) {
            *p = k as f64 * step;
        }
        let v = objective(&phases);
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective(v));
        }
        if v < best.1 {
            best = (phases.clone(), v);
        }
        // odometer increment, last index fastest
        let mut d = domain.dimension;
        loop {
            if d == 0 {
                return Ok(best);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < levels {
                break;
            }
            idx[d] = 0;
        }
    }
}

type Objective<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

/// Configured transmitter together with the power it needs.
#[derive(Debug, Clone)]
pub struct OptimizedEt {
    pub arch: EtArchitecture,
    /// Effective channel at the receiver.
    pub channel: Complex64,
    /// Transmit power that delivers the target, W.
    pub transmit_power: f64,
    /// PSO best-value trace, when the swarm was used.
    pub trace: Option<Vec<f64>>,
}

/// Gain of `Σ c_n·w(θ_n)` for a discrete grid, using a lookup table of the
/// per-level weights.
struct GridGain<'a> {
    coefficients: &'a [Complex64],
    table: Vec<Complex64>,
    step: f64,
    scale: f64,
}

impl GridGain<'_> {
    fn gain(&self, phases: &[f64]) -> f64 {
        let mask = self.table.len() - 1;
        let inv_step = 1.0 / self.step;
        // Phases sit on the grid, so adding one half and truncating rounds.
        let total = self
            .coefficients
            .iter()
            .zip(phases)
            .map(|(c, &p)| c * self.table[(p * inv_step + 0.5) as usize & mask])
            .collect::<ComplexSum>()
            .total();
        total.norm_sqr() * self.scale
    }
}

fn continuous_gain(coefficients: &[Complex64], weight: fn(f64) -> Complex64, phases: &[f64], scale: f64) -> f64 {
    let total = coefficients
        .iter()
        .zip(phases)
        .map(|(c, &p)| c * weight(p))
        .collect::<ComplexSum>()
        .total();
    total.norm_sqr() * scale
}

/// Number of global reference phases scanned when building seed particles.
const REFERENCE_SCAN: usize = 64;

/// Best per-element choice for reference phase `alpha`: each element
/// independently maximizes `Re(e^{−jα}·c_n·w(θ))` over the allowed phases.
fn aligned_phases(
    coefficients: &[Complex64],
    alpha: f64,
    resolution: PhaseResolution,
    weight: fn(f64) -> Complex64,
    continuous_choice: fn(f64) -> f64,
) -> Vec<f64> {
    match resolution {
        PhaseResolution::Continuous => coefficients
            .iter()
            .map(|c| continuous_choice(alpha - c.arg()).rem_euclid(TAU))
            .collect(),
        PhaseResolution::Bits(b) => {
            let levels = 1usize << b;
            let step = TAU / levels as f64;
            let rot = Complex64::cis(-alpha);
            let table: Vec<Complex64> = (0..levels).map(|k| weight(k as f64 * step)).collect();
            coefficients
                .iter()
                .map(|c| {
                    let z = rot * c;
                    let (k, _) = table.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, w)| {
                        let v = (z * w).re;
                        if v > acc.1 {
                            (k, v)
                        } else {
                            acc
                        }
                    });
                    k as f64 * step
                })
                .collect()
        }
    }
}

fn unit_phase(p: f64) -> Complex64 {
    Complex64::cis(p)
}

fn identity_choice(x: f64) -> f64 {
    x
}

/// Phase tuning shared by RIS (`w = e^{jθ}`) and DMA (`w = q(φ)`) once the
/// per-element coefficients are known.
fn tune_phases(
    coefficients: &[Complex64],
    resolution: PhaseResolution,
    weight: fn(f64) -> Complex64,
    params: &PsoParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let bound: f64 = coefficients
        .iter()
        .map(|c| c.norm())
        .collect::<NeumaierSum>()
        .total();
    if !(bound > 0.0) {
        return Err(Error::UnreachableTarget);
    }
    let scale = 1.0 / (bound * bound);
    let domain = PhaseDomain::new(coefficients.len(), resolution)?;

    // Quantized conjugate alignment, then the best reference-phase scan.
    let conjugate: Vec<f64> = aligned_phases(
        coefficients,
        0.0,
        PhaseResolution::Continuous,
        weight,
        identity_choice,
    )
    .into_iter()
    .map(|p| resolution.project(p))
    .collect();

    let objective: Box<Objective<'_>> = match resolution {
        PhaseResolution::Bits(b) => {
            let levels = 1usize << b;
            let step = TAU / levels as f64;
            let grid = GridGain {
                coefficients,
                table: (0..levels).map(|k| weight(k as f64 * step)).collect(),
                step,
                scale,
            };
            Box::new(move |p: &[f64]| -grid.gain(p))
        }
        PhaseResolution::Continuous => {
            Box::new(move |p: &[f64]| -continuous_gain(coefficients, weight, p, scale))
        }
    };

    let mut best_scan = (conjugate.clone(), objective(&conjugate));
    for k in 0..REFERENCE_SCAN {
        let alpha = TAU * k as f64 / REFERENCE_SCAN as f64;
        let cand = aligned_phases(coefficients, alpha, resolution, weight, identity_choice);
        let v = objective(&cand);
        if v < best_scan.1 {
            best_scan = (cand, v);
        }
    }
    let seeds = vec![conjugate, best_scan.0];
    let out = pso_minimize_seeded(|p| objective(p), &domain, params, &seeds)?;
    Ok((out.best, out.trace))
}

/// Configures `arch` to maximize the power delivered to `point` and returns
/// the transmit power needed to deliver `target` watts.
///
/// Fully-digital arrays use MRT and continuous-phase RIS uses conjugate
/// phases (both optimal). Finite-resolution RIS and every DMA go through the
/// swarm, seeded with the quantized conjugate configuration so the result is
/// never worse than it.
pub fn optimize_architecture(
    arch: &EtArchitecture,
    target: f64,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
    params: &PsoParams,
) -> Result<OptimizedEt> {
    if !(target >= 0.0) {
        return Err(Error::invalid("target", "must be >= 0"));
    }
    let (configured, trace) = match arch {
        EtArchitecture::FullyDigital { array, .. } => {
            let h = array_to_point_channel(array, point, rx_gain, wavelength)?;
            let precoder = mrt_precoder(&h).map_err(|_| Error::UnreachableTarget)?;
            (
                EtArchitecture::FullyDigital {
                    array: array.clone(),
                    precoder,
                },
                None,
            )
        }
        EtArchitecture::RisBased {
            feeder,
            ris,
            resolution,
            ..
        } => {
            let (f, g) = ris_links(feeder, ris, point, rx_gain, wavelength)?;
            if !(coherent_bound(&f, &g) > 0.0) {
                return Err(Error::UnreachableTarget);
            }
            match resolution {
                PhaseResolution::Continuous => {
                    (arch.clone().with_phases(&conjugate_ris_phases(&f, &g)?)?, None)
                }
                PhaseResolution::Bits(_) => {
                    let c: Vec<Complex64> = f.iter().zip(&g).map(|(f, g)| f * g).collect();
                    let (phases, trace) = tune_phases(&c, *resolution, unit_phase, params)?;
                    (arch.clone().with_phases(&phases)?, Some(trace))
                }
            }
        }
        EtArchitecture::DmaBased {
            dma, resolution, ..
        } => {
            let b = dma_element_coefficients(dma, point, rx_gain, wavelength)?;
            let (phases, trace) = tune_phases(&b, *resolution, lorentzian_weight, params)?;
            (arch.clone().with_phases(&phases)?, Some(trace))
        }
    };
    let channel = configured.effective_channel(point, rx_gain, wavelength)?;
    let transmit_power = required_transmit_power(channel, target)?;
    Ok(OptimizedEt {
        arch: configured,
        channel,
        transmit_power,
        trace,
    })
}

/// Quantized conjugate RIS phases for an architecture's current geometry.
pub fn quantized_conjugate_phases(
    arch: &EtArchitecture,
    point: Vec3,
    rx_gain: f64,
    wavelength: f64,
    bits: u32,
) -> Result<Vec<f64>> {
    let EtArchitecture::RisBased { feeder, ris, .. } = arch else {
        return Err(Error::invalid("architecture", "not RIS-based"));
    };
    let (f, g) = ris_links(feeder, ris, point, rx_gain, wavelength)?;
    Ok(conjugate_ris_phases(&f, &g)?
        .into_iter()
        .map(|p| quantize_phase(p, bits))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_params() -> PsoParams {
        PsoParams {
            iterations: 60,
            ..PsoParams::default()
        }
    }

    #[test]
    fn quadratic_bowl() {
        let dom = PhaseDomain::new(8, PhaseResolution::Continuous).unwrap();
        let out = pso_minimize(
            |p| p.iter().map(|t| (t - 1.0).powi(2)).sum(),
            &dom,
            &PsoParams::default(),
        )
        .unwrap();
        assert!(out.value < 1e-3, "{}", out.value);
        assert_eq!(out.trace.len(), 201);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn two_point_domain() {
        let dom = PhaseDomain::new(1, PhaseResolution::Bits(1)).unwrap();
        let out = pso_minimize(|p| p[0].cos(), &dom, &small_params()).unwrap();
        assert_relative_eq!(out.best[0], PI);
        assert_relative_eq!(out.value, -1.0);
    }

    #[test]
    fn same_seed_same_result() {
        let dom = PhaseDomain::new(5, PhaseResolution::Bits(3)).unwrap();
        let f = |p: &[f64]| p.iter().enumerate().map(|(i, t)| (t * (i + 1) as f64).sin()).sum();
        let a = pso_minimize(f, &dom, &small_params()).unwrap();
        let b = pso_minimize(f, &dom, &small_params()).unwrap();
        assert_eq!(a, b);
        let c = pso_minimize(f, &dom, &PsoParams { seed: 7, ..small_params() }).unwrap();
        assert_eq!(c.trace.len(), a.trace.len());
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let dom = PhaseDomain::new(2, PhaseResolution::Continuous).unwrap();
        let err = pso_minimize(|_| f64::NAN, &dom, &small_params()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective(_)));
    }

    #[test]
    fn brute_force_cases() {
        let dom = PhaseDomain::new(2, PhaseResolution::Bits(1)).unwrap();
        let (best, v) = brute_force(|p| p[0] + p[1], &dom, 1 << 10).unwrap();
        assert_eq!(best, vec![0.0, 0.0]);
        assert_eq!(v, 0.0);
        let big = PhaseDomain::new(20, PhaseResolution::Bits(2)).unwrap();
        assert!(matches!(
            brute_force(|_| 0.0, &big, 1 << 20),
            Err(Error::DomainTooLarge { .. })
        ));
        let cont = PhaseDomain::new(2, PhaseResolution::Continuous).unwrap();
        assert!(brute_force(|_| 0.0, &cont, 100).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        let dom = PhaseDomain::new(2, PhaseResolution::Continuous).unwrap();
        for p in [
            PsoParams { swarm_size: 1, ..PsoParams::default() },
            PsoParams { iterations: 0, ..PsoParams::default() },
            PsoParams { social: -1.0, ..PsoParams::default() },
        ] {
            assert!(pso_minimize(|_| 0.0, &dom, &p).is_err());
        }
        assert!(PhaseDomain::new(0, PhaseResolution::Continuous).is_err());
    }

    #[test]
    fn angular_difference_wraps() {
        assert_relative_eq!(angular_diff(0.1, TAU - 0.1), 0.2, epsilon = 1e-12);
        assert_relative_eq!(angular_diff(TAU - 0.1, 0.1), -0.2, epsilon = 1e-12);
        assert_relative_eq!(angular_diff(3.0, 1.0), 2.0, epsilon = 1e-12);
        assert_relative_eq!(angular_diff(0.0, PI), PI, epsilon = 1e-12);
        assert_relative_eq!(wrap_step(-0.5), TAU - 0.5, epsilon = 1e-12);
        assert_relative_eq!(wrap_step(TAU + 0.5), 0.5, epsilon = 1e-12);
        assert_eq!(wrap_step(-1e-300), 0.0);
    }
}
