//! The reference sweeps.
//!
//! Cells of a sweep are independent and run in parallel; rows are always
//! assembled in sweep order, and every swarm gets a seed derived from the
//! configured seed and the cell position, so output files are reproducible.

use rayon::prelude::*;

use crate::architectures::{build_dma_et_with_index, build_ris_et, EtArchitecture};
use crate::emf::{steady_local_compliance, EmfLimits, Zone};
use crate::field::{normalized_density_stats, FieldSource, RX_GAIN};
use crate::geometry::{make_planar_array, ElementPattern, Vec3};
use crate::optimize::{optimize_architecture, PsoParams};
use crate::output::{format_number, Cell, ResultTable};
use crate::powermodel::et_consumed_power;
use crate::scenario::{ArchKind, ArchSpec, Experiment, ScenarioConfig};
use crate::{db_to_linear, wavelength_ghz, Error, Result};

pub const FIG2_COLUMNS: [&str; 8] = [
    "f_ghz",
    "d_prime_m",
    "r_m",
    "s_max_norm_per_m2",
    "s_mean_norm_per_m2",
    "s_at_1w_w_per_m2",
    "local_limit_w_per_m2",
    "compliant",
];

pub const FIG4_COLUMNS: [&str; 9] = [
    "f_ghz",
    "arch",
    "bits",
    "n_elements",
    "p_tx_w",
    "p_consumed_w",
    "s_15cm_w_per_m2",
    "local_limit_w_per_m2",
    "compliant",
];

pub const CUSTOM_COLUMNS: [&str; 11] = [
    "f_ghz",
    "arch",
    "bits",
    "n_elements",
    "p_tx_w",
    "p_consumed_w",
    "r_m",
    "s_max_w_per_m2",
    "s_mean_w_per_m2",
    "local_limit_w_per_m2",
    "compliant",
];

/// Called once per finished sweep cell with `(done, total)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// Runs the experiment selected by `cfg`.
pub fn run(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_with_progress(cfg, &|_, _| {})
}

pub fn run_with_progress(cfg: &ScenarioConfig, progress: Progress) -> Result<ResultTable> {
    match cfg.experiment {
        Experiment::Fig2 => run_fig2_with_progress(cfg, progress),
        Experiment::Fig4 => run_fig4_with_progress(cfg, progress),
        Experiment::Custom => run_custom_with_progress(cfg, progress),
    }
}

/// Density around the receiver versus sphere radius, for a 10×10 (by
/// default) fully-digital array whose edge is `√(d′λ)`, so that `d′` is its
/// near/far threshold. Densities are per watt delivered.
pub fn run_fig2(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_fig2_with_progress(cfg, &|_, _| {})
}

pub fn run_fig2_with_progress(cfg: &ScenarioConfig, progress: Progress) -> Result<ResultTable> {
    expect_experiment(cfg, Experiment::Fig2)?;
    cfg.validate()?;
    let cells: Vec<(f64, f64)> = cfg
        .frequencies_ghz
        .iter()
        .flat_map(|&f| cfg.d_prime_m.iter().map(move |&d| (f, d)))
        .collect();
    let limits = EmfLimits::new(cfg.exposure);
    let counter = Counter::new(cells.len(), progress);
    let blocks: Vec<Vec<Vec<Cell>>> = cells
        .par_iter()
        .map(|&(f, d_prime)| {
            let rows = fig2_cell(cfg, f, d_prime, limits);
            counter.tick();
            rows
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new(&FIG2_COLUMNS);
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}

fn fig2_cell(cfg: &ScenarioConfig, f: f64, d_prime: f64, limits: EmfLimits) -> Result<Vec<Vec<Cell>>> {
    let lambda = wavelength_ghz(f);
    let edge = (d_prime * lambda).sqrt();
    let array = make_planar_array(
        cfg.array_rows,
        cfg.array_cols,
        edge,
        Vec3::ZERO,
        Vec3::Z,
        ElementPattern::cosine_power_db(cfg.element_gain_db)?,
    )?;
    let er = Vec3::new(0.0, 0.0, cfg.er_distance_m);
    let arch = EtArchitecture::fully_digital(array);
    let tuned = optimize_architecture(&arch, 1.0, er, RX_GAIN, lambda, &cfg.pso)?;
    let limit = limits.power_density(f, Zone::Local)?;
    cfg.radii_m
        .iter()
        .map(|&r| {
            let stats = normalized_density_stats(&tuned.arch, er, r, cfg.sphere_samples, lambda)?;
            let at_1w = emitted(stats.max);
            Ok(vec![
                f.into(),
                d_prime.into(),
                r.into(),
                stats.max.into(),
                stats.mean.into(),
                at_1w.into(),
                limit.into(),
                steady_local_compliance(at_1w, f, limits)?.into(),
            ])
        })
        .collect()
}

/// Consumed power and sphere-max density versus frequency for a transmitter
/// of edge `L`, delivering the target power at distance `d`.
pub fn run_fig4(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_fig4_with_progress(cfg, &|_, _| {})
}

pub fn run_fig4_with_progress(cfg: &ScenarioConfig, progress: Progress) -> Result<ResultTable> {
    expect_experiment(cfg, Experiment::Fig4)?;
    cfg.validate()?;
    if cfg.radii_m.len() != 1 {
        return Err(Error::invalid("radii_m", "fig4 takes exactly one sphere radius"));
    }
    let radius = cfg.radii_m[0];
    let blocks = sweep_architectures(cfg, progress)?;
    let mut table = ResultTable::new(&FIG4_COLUMNS);
    for cell in blocks {
        let stats = &cell.spheres[0];
        let s = emitted(stats.0);
        debug_assert_eq!(stats.2, radius);
        table.push(vec![
            cell.f.into(),
            cell.arch.clone().into(),
            cell.bits.clone().into(),
            cell.n_elements.into(),
            cell.p_tx.into(),
            cell.p_consumed.into(),
            s.into(),
            cell.limit.into(),
            steady_local_compliance(s, cell.f, EmfLimits::new(cfg.exposure))?.into(),
        ]);
    }
    Ok(table)
}

/// As fig4 but with any architecture list (including `fd`) and every radius
/// in `radii_m`; reports sphere max and mean.
pub fn run_custom(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_custom_with_progress(cfg, &|_, _| {})
}

pub fn run_custom_with_progress(cfg: &ScenarioConfig, progress: Progress) -> Result<ResultTable> {
    expect_experiment(cfg, Experiment::Custom)?;
    cfg.validate()?;
    let blocks = sweep_architectures(cfg, progress)?;
    let mut table = ResultTable::new(&CUSTOM_COLUMNS);
    for cell in blocks {
        for &(max, mean, r) in &cell.spheres {
            let s = emitted(max);
            table.push(vec![
                cell.f.into(),
                cell.arch.clone().into(),
                cell.bits.clone().into(),
                cell.n_elements.into(),
                cell.p_tx.into(),
                cell.p_consumed.into(),
                r.into(),
                s.into(),
                mean.into(),
                cell.limit.into(),
                steady_local_compliance(s, cell.f, EmfLimits::new(cfg.exposure))?.into(),
            ]);
        }
    }
    Ok(table)
}

struct ArchCell {
    f: f64,
    arch: String,
    bits: String,
    n_elements: usize,
    p_tx: f64,
    p_consumed: f64,
    limit: f64,
    /// `(max, mean, radius)` per configured radius.
    spheres: Vec<(f64, f64, f64)>,
}

fn sweep_architectures(cfg: &ScenarioConfig, progress: Progress) -> Result<Vec<ArchCell>> {
    let cells: Vec<(usize, f64, ArchSpec)> = cfg
        .frequencies_ghz
        .iter()
        .flat_map(|&f| cfg.architectures.iter().map(move |&a| (f, a)))
        .enumerate()
        .map(|(i, (f, a))| (i, f, a))
        .collect();
    let counter = Counter::new(cells.len(), progress);
    cells
        .par_iter()
        .map(|&(index, f, spec)| {
            let cell = arch_cell(cfg, index, f, spec);
            counter.tick();
            cell
        })
        .collect()
}

fn arch_cell(cfg: &ScenarioConfig, index: usize, f: f64, spec: ArchSpec) -> Result<ArchCell> {
    let lambda = wavelength_ghz(f);
    let arch = build_architecture(cfg, spec, lambda)?;
    let params = PsoParams {
        seed: cell_seed(cfg.pso.seed, index as u64),
        ..cfg.pso
    };
    let er = Vec3::new(0.0, 0.0, cfg.er_distance_m);
    let tuned = optimize_architecture(&arch, cfg.target_power_w, er, RX_GAIN, lambda, &params)?;
    let n_elements = arch.element_count();
    let p_consumed = et_consumed_power(tuned.transmit_power, n_elements, cfg.profile(spec.kind))?;
    let src = FieldSource::new(&tuned.arch, tuned.transmit_power, lambda)?;
    let spheres = cfg
        .radii_m
        .iter()
        .map(|&r| {
            let s = src.sphere_stats(er, r, cfg.sphere_samples)?;
            Ok((s.max, s.mean, r))
        })
        .collect::<Result<_>>()?;
    Ok(ArchCell {
        f,
        arch: tuned.arch.label().to_owned(),
        bits: spec.resolution.to_string(),
        n_elements,
        p_tx: tuned.transmit_power,
        p_consumed,
        limit: EmfLimits::new(cfg.exposure).power_density(f, Zone::Local)?,
        spheres,
    })
}

/// Builds the transmitter named by `spec` with the scenario's geometry.
pub fn build_architecture(cfg: &ScenarioConfig, spec: ArchSpec, wavelength: f64) -> Result<EtArchitecture> {
    let arch = match spec.kind {
        ArchKind::FullyDigital => EtArchitecture::fully_digital(make_planar_array(
            cfg.array_rows,
            cfg.array_cols,
            cfg.edge_length_m,
            Vec3::ZERO,
            Vec3::Z,
            ElementPattern::cosine_power_db(cfg.element_gain_db)?,
        )?),
        ArchKind::Ris => build_ris_et(
            cfg.edge_length_m,
            wavelength,
            db_to_linear(cfg.feeder_gain_db),
            db_to_linear(cfg.ris_element_gain_db),
        )?,
        ArchKind::Dma => build_dma_et_with_index(
            cfg.edge_length_m,
            wavelength,
            db_to_linear(cfg.dma_element_gain_db),
            cfg.dma_effective_index,
        )?,
    };
    Ok(arch.with_resolution(spec.resolution))
}

/// Seed of the swarm for sweep cell `index`.
pub fn cell_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d4_9bb1_33a1_11eb);
    z ^ (z >> 31)
}

/// The value as it will appear in the output file, so compliance flags can
/// be re-derived from the file itself.
fn emitted(v: f64) -> f64 {
    format_number(v).parse().unwrap_or(v)
}

fn expect_experiment(cfg: &ScenarioConfig, want: Experiment) -> Result<()> {
    if cfg.experiment == want {
        Ok(())
    } else {
        Err(Error::invalid(
            "experiment",
            format!("expected `{want}`, got `{}`", cfg.experiment),
        ))
    }
}

struct Counter<'a> {
    done: std::sync::atomic::AtomicUsize,
    total: usize,
    progress: Progress<'a>,
}

impl<'a> Counter<'a> {
    fn new(total: usize, progress: Progress<'a>) -> Self {
        Self {
            done: Default::default(),
            total,
            progress,
        }
    }

    fn tick(&self) {
        let n = self.done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        (self.progress)(n, self.total);
    }
}
