//! ICNIRP exposure limits (2–300 GHz) and compliance checks on power
//! density time series.
//!
//! Series are `(time s, density W/m²)` samples held constant until the next
//! sample (zero-order hold). The last sample closes the record. Exposure
//! outside the record is zero.

use crate::{Error, Result};

pub const MIN_FREQUENCY_GHZ: f64 = 2.0;
pub const MAX_FREQUENCY_GHZ: f64 = 300.0;
/// Upper edge of the low-frequency column of the limit table.
pub const BRANCH_FREQUENCY_GHZ: f64 = 6.0;
pub const LOCAL_AVERAGING_MINUTES: f64 = 6.0;
pub const WHOLE_BODY_AVERAGING_MINUTES: f64 = 30.0;
/// Relative slack applied when comparing a measurement to its limit.
pub const COMPARISON_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    WholeBody,
    Local,
}

impl Zone {
    pub fn averaging_minutes(self) -> f64 {
        match self {
            Zone::WholeBody => WHOLE_BODY_AVERAGING_MINUTES,
            Zone::Local => LOCAL_AVERAGING_MINUTES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zone::WholeBody => "whole_body",
            Zone::Local => "local",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// W/m².
    PowerDensity,
    /// kJ/m².
    EnergyDensity,
}

/// General public limits, or occupational limits which are five times
/// higher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureTier {
    #[default]
    GeneralPublic,
    Occupational,
}

impl ExposureTier {
    pub fn factor(self) -> f64 {
        match self {
            ExposureTier::GeneralPublic => 1.0,
            ExposureTier::Occupational => 5.0,
        }
    }
}

/// One row of the limit table evaluated at a frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmfLimit {
    pub zone: Zone,
    pub quantity: Quantity,
    pub frequency_ghz: f64,
    pub averaging_minutes: f64,
    pub value: f64,
}

fn check_frequency(f_ghz: f64) -> Result<()> {
    if (MIN_FREQUENCY_GHZ..=MAX_FREQUENCY_GHZ).contains(&f_ghz) {
        Ok(())
    } else {
        Err(Error::FrequencyOutOfRange(f_ghz))
    }
}

/// Local incident power density limit, W/m² (6-min average).
pub fn local_power_density_limit(f_ghz: f64) -> Result<f64> {
    check_frequency(f_ghz)?;
    Ok(if f_ghz <= BRANCH_FREQUENCY_GHZ {
        40.0
    } else {
        55.0 / f_ghz.powf(0.177)
    })
}

/// Whole-body incident power density limit, W/m² (30-min average).
pub fn whole_body_power_density_limit(f_ghz: f64) -> Result<f64> {
    check_frequency(f_ghz)?;
    Ok(10.0)
}

/// Local incident energy density limit for an exposure interval of
/// `t_minutes` (`0 < t < 6`), kJ/m².
pub fn local_energy_density_limit(f_ghz: f64, t_minutes: f64) -> Result<f64> {
    check_frequency(f_ghz)?;
    if !(t_minutes > 0.0 && t_minutes < LOCAL_AVERAGING_MINUTES) {
        return Err(Error::invalid(
            "t",
            format!("{t_minutes} min is outside (0, 6); use the power density limit"),
        ));
    }
    let shape = 0.05 + 0.95 * (t_minutes / 6.0).sqrt();
    Ok(if f_ghz <= BRANCH_FREQUENCY_GHZ {
        14.4 * shape
    } else {
        19.8 * shape / f_ghz.powf(0.177)
    })
}

/// Limits scaled for an exposure tier.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmfLimits {
    pub tier: ExposureTier,
}

impl EmfLimits {
    pub fn new(tier: ExposureTier) -> Self {
        Self { tier }
    }

    pub fn power_density(&self, f_ghz: f64, zone: Zone) -> Result<f64> {
        let base = match zone {
            Zone::WholeBody => whole_body_power_density_limit(f_ghz)?,
            Zone::Local => local_power_density_limit(f_ghz)?,
        };
        Ok(base * self.tier.factor())
    }

    pub fn local_energy_density(&self, f_ghz: f64, t_minutes: f64) -> Result<f64> {
        Ok(local_energy_density_limit(f_ghz, t_minutes)? * self.tier.factor())
    }

    /// Power density rows plus energy density rows at `energy_minutes`.
    pub fn table(&self, f_ghz: f64, energy_minutes: &[f64]) -> Result<Vec<EmfLimit>> {
        let mut rows = Vec::new();
        for zone in [Zone::WholeBody, Zone::Local] {
            rows.push(EmfLimit {
                zone,
                quantity: Quantity::PowerDensity,
                frequency_ghz: f_ghz,
                averaging_minutes: zone.averaging_minutes(),
                value: self.power_density(f_ghz, zone)?,
            });
        }
        for &t in energy_minutes {
            rows.push(EmfLimit {
                zone: Zone::Local,
                quantity: Quantity::EnergyDensity,
                frequency_ghz: f_ghz,
                averaging_minutes: t,
                value: self.local_energy_density(f_ghz, t)?,
            });
        }
        Ok(rows)
    }
}

/// Cumulative-energy view of a zero-order-hold series.
struct Record<'a> {
    series: &'a [(f64, f64)],
    /// `cumulative[i]` is the energy from the first sample to sample `i`.
    cumulative: Vec<f64>,
}

impl<'a> Record<'a> {
    fn new(series: &'a [(f64, f64)]) -> Result<Self> {
        for (i, w) in series.windows(2).enumerate() {
            if !(w[1].0 >= w[0].0) {
                return Err(Error::UnsortedSeries(i + 1));
            }
        }
        if let Some(i) = series.iter().position(|s| !(s.0.is_finite() && s.1.is_finite())) {
            return Err(Error::invalid("series", format!("non-finite sample at index {i}")));
        }
        let mut cumulative = Vec::with_capacity(series.len());
        let mut acc = crate::sum::NeumaierSum::new();
        for (i, s) in series.iter().enumerate() {
            if i > 0 {
                let prev = series[i - 1];
                acc.add(prev.1 * (s.0 - prev.0));
            }
            cumulative.push(acc.total());
        }
        Ok(Self { series, cumulative })
    }

    fn start(&self) -> f64 {
        self.series[0].0
    }

    fn end(&self) -> f64 {
        self.series[self.series.len() - 1].0
    }

    /// Energy delivered in `[start, t]`, J/m².
    fn energy_until(&self, t: f64) -> f64 {
        if t <= self.start() {
            return 0.0;
        }
        if t >= self.end() {
            return self.cumulative[self.cumulative.len() - 1];
        }
        // last sample with time <= t
        let i = self.series.partition_point(|s| s.0 <= t) - 1;
        self.cumulative[i] + self.series[i].1 * (t - self.series[i].0)
    }

    fn energy_between(&self, a: f64, b: f64) -> f64 {
        self.energy_until(b) - self.energy_until(a)
    }
}

/// Time-weighted mean over `(T − window, T]` at every sample time
/// `T ≥ t₀ + window`, where `t₀` is the first sample time.
pub fn sliding_window_average(series: &[(f64, f64)], window_s: f64) -> Result<Vec<(f64, f64)>> {
    if !(window_s > 0.0) {
        return Err(Error::invalid("window", "must be positive"));
    }
    if series.is_empty() {
        return Ok(Vec::new());
    }
    let rec = Record::new(series)?;
    let first = rec.start();
    let mut out = Vec::new();
    for &(t, _) in series {
        if t < first + window_s {
            continue;
        }
        out.push((t, rec.energy_between(t - window_s, t) / window_s));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Windowed mean of the incident power density.
    PowerDensityAverage,
    /// Energy over any sample-anchored interval shorter than 6 min.
    EnergyDensityBurst,
}

/// Outcome of a single limit-table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintVerdict {
    pub kind: ConstraintKind,
    pub zone: Zone,
    /// Limit applicable to the worst window (W/m² or kJ/m²).
    pub limit: f64,
    /// Worst measured value (same unit as `limit`).
    pub measured: f64,
    /// `(limit − measured)/limit`; negative when violated.
    pub margin: f64,
    /// Worst window, seconds.
    pub window: (f64, f64),
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureReport {
    pub frequency_ghz: f64,
    pub verdicts: Vec<ConstraintVerdict>,
    pub compliant: bool,
    /// Set when the record is shorter than the averaging window; the power
    /// average then treats the remainder of the window as unexposed.
    pub shorter_than_window: bool,
}

impl ExposureReport {
    pub fn verdict(&self, kind: ConstraintKind) -> Option<&ConstraintVerdict> {
        self.verdicts.iter().find(|v| v.kind == kind)
    }
}

fn verdict(
    kind: ConstraintKind,
    zone: Zone,
    limit: f64,
    measured: f64,
    window: (f64, f64),
) -> ConstraintVerdict {
    ConstraintVerdict {
        kind,
        zone,
        limit,
        measured,
        margin: (limit - measured) / limit,
        window,
        satisfied: measured <= limit * (1.0 + COMPARISON_TOLERANCE),
    }
}

/// Checks a density series against the general-public limits for `zone`.
pub fn check_compliance(series: &[(f64, f64)], f_ghz: f64, zone: Zone) -> Result<ExposureReport> {
    check_compliance_with(series, f_ghz, zone, EmfLimits::default())
}

pub fn check_compliance_with(
    series: &[(f64, f64)],
    f_ghz: f64,
    zone: Zone,
    limits: EmfLimits,
) -> Result<ExposureReport> {
    let power_limit = limits.power_density(f_ghz, zone)?;
    if series.is_empty() {
        return Err(Error::invalid("series", "needs at least one sample"));
    }
    let rec = Record::new(series)?;
    let window = zone.averaging_minutes() * 60.0;
    let duration = rec.end() - rec.start();
    let shorter = duration < window;

    // The windowed mean is piecewise linear in the window end, so its
    // maximum sits where either window edge meets a sample time.
    let mut ends: Vec<f64> = Vec::with_capacity(2 * series.len());
    for &(t, _) in series {
        ends.push(t);
        ends.push(t + window);
    }
    let lo = rec.start() + window.min(duration);
    let hi = rec.end() + window;
    let mut worst = (f64::NEG_INFINITY, (0.0, 0.0));
    for &t in ends.iter().filter(|&&t| t >= lo && t <= hi) {
        let avg = rec.energy_between(t - window, t) / window;
        if avg > worst.0 {
            worst = (avg, (t - window, t));
        }
    }
    if worst.0 == f64::NEG_INFINITY {
        worst = (rec.energy_between(rec.start(), rec.end()) / window, (rec.start(), rec.start() + window));
    }
    let mut verdicts = vec![verdict(
        ConstraintKind::PowerDensityAverage,
        zone,
        power_limit,
        worst.0,
        worst.1,
    )];

    if zone == Zone::Local {
        let mut worst_burst: Option<ConstraintVerdict> = None;
        for i in 0..series.len() {
            for j in i + 1..series.len() {
                let dt = series[j].0 - series[i].0;
                if dt >= window {
                    break;
                }
                if dt <= 0.0 {
                    continue;
                }
                let limit = limits.local_energy_density(f_ghz, dt / 60.0)?;
                let energy = rec.energy_between(series[i].0, series[j].0) / 1e3;
                let v = verdict(
                    ConstraintKind::EnergyDensityBurst,
                    zone,
                    limit,
                    energy,
                    (series[i].0, series[j].0),
                );
                if worst_burst.is_none_or(|w| v.margin < w.margin) {
                    worst_burst = Some(v);
                }
            }
        }
        if let Some(v) = worst_burst {
            verdicts.push(v);
        }
    }

    let compliant = verdicts.iter().all(|v| v.satisfied);
    Ok(ExposureReport {
        frequency_ghz: f_ghz,
        verdicts,
        compliant,
        shorter_than_window: shorter,
    })
}

/// Single-number check of a steady (uninterrupted) density against the
/// local limit, as used by the sweeps.
pub fn steady_local_compliance(density: f64, f_ghz: f64, limits: EmfLimits) -> Result<bool> {
    let limit = limits.power_density(f_ghz, Zone::Local)?;
    Ok(density <= limit * (1.0 + COMPARISON_TOLERANCE))
}
