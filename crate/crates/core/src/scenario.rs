//! Scenario configuration.
//!
//! A scenario is a flat list of `key = value` lines (TOML syntax, no
//! tables). Only `experiment` is required; every other key has a default
//! that depends on the experiment. Unknown keys are rejected.
//!
//! ```
//! use nfwpt_core::scenario::{parse_scenario, Experiment};
//!
//! let cfg = parse_scenario("experiment = \"fig2\"\nfrequencies_ghz = [30]\nd_prime_m = [15]\n").unwrap();
//! assert_eq!(cfg.experiment, Experiment::Fig2);
//! assert_eq!(cfg.er_distance_m, 8.0);
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::emf::{ExposureTier, MAX_FREQUENCY_GHZ, MIN_FREQUENCY_GHZ};
use crate::field::{DEFAULT_SPHERE_SAMPLES, MIN_SPHERE_SAMPLES};
use crate::optimize::PsoParams;
use crate::output::OutputFormat;
use crate::powermodel::ConsumptionProfile;
use crate::{Error, PhaseResolution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Density around the receiver versus sphere radius.
    Fig2,
    /// Consumed power and density versus frequency.
    Fig4,
    /// Consumption and density for arbitrary architectures and radii.
    Custom,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig2" => Ok(Experiment::Fig2),
            "fig4" => Ok(Experiment::Fig4),
            "custom" => Ok(Experiment::Custom),
            other => Err(Error::invalid(
                "experiment",
                format!("unknown experiment `{other}` (expected fig2, fig4 or custom)"),
            )),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig4 => "fig4",
            Experiment::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchKind {
    FullyDigital,
    Ris,
    Dma,
}

/// One transmitter in a sweep: `fd`, `ris:<bits|inf>` or `dma:<bits|inf>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchSpec {
    pub kind: ArchKind,
    pub resolution: PhaseResolution,
}

impl FromStr for ArchSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::invalid(
                "architectures",
                format!("`{s}` is not one of fd, ris:<bits|inf>, dma:<bits|inf>"),
            )
        };
        let lower = s.trim().to_ascii_lowercase();
        let (kind, res) = match lower.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (lower.as_str(), None),
        };
        let kind = match kind {
            "fd" => ArchKind::FullyDigital,
            "ris" => ArchKind::Ris,
            "dma" => ArchKind::Dma,
            _ => return Err(bad()),
        };
        let resolution = match (kind, res) {
            (ArchKind::FullyDigital, None) => PhaseResolution::Continuous,
            (ArchKind::FullyDigital, Some(_)) => return Err(bad()),
            (_, None | Some("inf")) => PhaseResolution::Continuous,
            (_, Some(bits)) => match bits.parse::<u32>() {
                Ok(b) if (1..=16).contains(&b) => PhaseResolution::Bits(b),
                _ => return Err(bad()),
            },
        };
        Ok(Self { kind, resolution })
    }
}

impl fmt::Display for ArchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ArchKind::FullyDigital => f.write_str("fd"),
            ArchKind::Ris => write!(f, "ris:{}", self.resolution),
            ArchKind::Dma => write!(f, "dma:{}", self.resolution),
        }
    }
}

/// Fully validated experiment description with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub frequencies_ghz: Vec<f64>,
    /// Near/far threshold distances; the array edge is `√(d′λ)` (fig2).
    pub d_prime_m: Vec<f64>,
    /// Transmitter edge length (fig4, custom).
    pub edge_length_m: f64,
    pub er_distance_m: f64,
    pub target_power_w: f64,
    pub radii_m: Vec<f64>,
    pub array_rows: usize,
    pub array_cols: usize,
    /// Fully-digital element gain.
    pub element_gain_db: f64,
    pub architectures: Vec<ArchSpec>,
    pub feeder_gain_db: f64,
    pub ris_element_gain_db: f64,
    pub dma_element_gain_db: f64,
    pub dma_effective_index: f64,
    pub ris_profile: ConsumptionProfile,
    pub dma_profile: ConsumptionProfile,
    pub fd_profile: ConsumptionProfile,
    pub pso: PsoParams,
    pub sphere_samples: usize,
    pub exposure: ExposureTier,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Consumption profile assumed for fully-digital transmitters: 35% HPA,
/// 1 W board, 1 W per RF chain.
pub const FD_DEFAULT_PROFILE: ConsumptionProfile = ConsumptionProfile {
    hpa_efficiency: 0.35,
    control_board: 1.0,
    per_element_drive: 1.0,
};

/// Sphere samples for the frequency sweeps. Their transmitters grow to
/// tens of thousands of elements at 30 GHz, so the lattice is coarser than
/// the radius sweep's.
pub const SWEEP_SPHERE_SAMPLES: usize = 2_000;

/// 2 to 30 GHz in 0.5 GHz steps.
pub fn fig4_default_frequencies() -> Vec<f64> {
    (0..=56).map(|k| 2.0 + 0.5 * k as f64).collect()
}

impl ScenarioConfig {
    /// Defaults for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let fig2 = experiment == Experiment::Fig2;
        Self {
            experiment,
            frequencies_ghz: if fig2 {
                vec![3.0, 10.0, 30.0]
            } else {
                fig4_default_frequencies()
            },
            d_prime_m: vec![2.0, 8.0, 15.0],
            edge_length_m: 0.5,
            er_distance_m: if fig2 { 8.0 } else { 3.0 },
            target_power_w: 1.0,
            radii_m: if fig2 {
                vec![0.005, 0.01, 0.018, 0.02, 0.04, 0.08, 0.16, 0.32]
            } else {
                vec![0.15]
            },
            array_rows: 10,
            array_cols: 10,
            element_gain_db: 13.0,
            architectures: if experiment == Experiment::Custom {
                vec![arch("fd"), arch("ris:inf"), arch("ris:2"), arch("dma:2")]
            } else {
                vec![arch("ris:inf"), arch("ris:2"), arch("dma:2")]
            },
            feeder_gain_db: 3.0,
            ris_element_gain_db: 7.0,
            dma_element_gain_db: 13.0,
            dma_effective_index: 1.0,
            ris_profile: ConsumptionProfile::RIS_DEFAULT,
            dma_profile: ConsumptionProfile::DMA_DEFAULT,
            fd_profile: FD_DEFAULT_PROFILE,
            pso: PsoParams::default(),
            sphere_samples: if fig2 {
                DEFAULT_SPHERE_SAMPLES
            } else {
                SWEEP_SPHERE_SAMPLES
            },
            exposure: ExposureTier::GeneralPublic,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn profile(&self, kind: ArchKind) -> &ConsumptionProfile {
        match kind {
            ArchKind::FullyDigital => &self.fd_profile,
            ArchKind::Ris => &self.ris_profile,
            ArchKind::Dma => &self.dma_profile,
        }
    }

    /// Checks every invariant; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        non_empty("frequencies_ghz", &self.frequencies_ghz)?;
        for &f in &self.frequencies_ghz {
            if !(MIN_FREQUENCY_GHZ..=MAX_FREQUENCY_GHZ).contains(&f) {
                return Err(Error::invalid(
                    "frequencies_ghz",
                    format!("{f} GHz is outside [{MIN_FREQUENCY_GHZ}, {MAX_FREQUENCY_GHZ}] GHz"),
                ));
            }
        }
        if self.experiment == Experiment::Fig2 {
            non_empty("d_prime_m", &self.d_prime_m)?;
            all_positive("d_prime_m", &self.d_prime_m)?;
        }
        positive("edge_length_m", self.edge_length_m)?;
        positive("er_distance_m", self.er_distance_m)?;
        positive("target_power_w", self.target_power_w)?;
        non_empty("radii_m", &self.radii_m)?;
        all_positive("radii_m", &self.radii_m)?;
        if self.array_rows == 0 {
            return Err(Error::invalid("array_rows", "must be >= 1"));
        }
        if self.array_cols == 0 {
            return Err(Error::invalid("array_cols", "must be >= 1"));
        }
        for (name, db) in [
            ("element_gain_db", self.element_gain_db),
            ("feeder_gain_db", self.feeder_gain_db),
            ("ris_element_gain_db", self.ris_element_gain_db),
            ("dma_element_gain_db", self.dma_element_gain_db),
        ] {
            if !(db.is_finite() && db >= 0.0) {
                return Err(Error::invalid(name, format!("{db} dB must be finite and >= 0")));
            }
        }
        positive("dma_effective_index", self.dma_effective_index)?;
        if self.experiment != Experiment::Fig2 && self.architectures.is_empty() {
            return Err(Error::invalid("architectures", "must not be empty"));
        }
        for (prefix, p) in [
            ("ris", &self.ris_profile),
            ("dma", &self.dma_profile),
            ("fd", &self.fd_profile),
        ] {
            p.validate().map_err(|e| match e {
                Error::InvalidParameter { name, reason } => {
                    Error::invalid(profile_key(prefix, &name), reason)
                }
                other => other,
            })?;
        }
        self.pso.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => Error::invalid(format!("pso_{name}"), reason),
            other => other,
        })?;
        if self.sphere_samples < MIN_SPHERE_SAMPLES {
            return Err(Error::invalid(
                "sphere_samples",
                format!("{} is below the minimum of {MIN_SPHERE_SAMPLES}", self.sphere_samples),
            ));
        }
        Ok(())
    }

    /// Every setting as `key = value` lines, in the configuration syntax.
    pub fn describe(&self) -> String {
        fn list(v: &[f64]) -> String {
            let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        }
        let archs: Vec<String> = self.architectures.iter().map(|a| format!("\"{a}\"")).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("experiment", format!("\"{}\"", self.experiment));
        line("frequencies_ghz", list(&self.frequencies_ghz));
        line("d_prime_m", list(&self.d_prime_m));
        line("edge_length_m", format!("{:?}", self.edge_length_m));
        line("er_distance_m", format!("{:?}", self.er_distance_m));
        line("target_power_w", format!("{:?}", self.target_power_w));
        line("radii_m", list(&self.radii_m));
        line("array_rows", self.array_rows.to_string());
        line("array_cols", self.array_cols.to_string());
        line("element_gain_db", format!("{:?}", self.element_gain_db));
        line("architectures", format!("[{}]", archs.join(", ")));
        line("feeder_gain_db", format!("{:?}", self.feeder_gain_db));
        line("ris_element_gain_db", format!("{:?}", self.ris_element_gain_db));
        line("dma_element_gain_db", format!("{:?}", self.dma_element_gain_db));
        line("dma_effective_index", format!("{:?}", self.dma_effective_index));
        for (prefix, p) in [
            ("ris", &self.ris_profile),
            ("dma", &self.dma_profile),
            ("fd", &self.fd_profile),
        ] {
            line(&format!("{prefix}_hpa_efficiency"), format!("{:?}", p.hpa_efficiency));
            line(&format!("{prefix}_control_board_w"), format!("{:?}", p.control_board));
            line(&format!("{prefix}_per_element_w"), format!("{:?}", p.per_element_drive));
        }
        line("pso_swarm_size", self.pso.swarm_size.to_string());
        line("pso_iterations", self.pso.iterations.to_string());
        line("pso_inertia", format!("{:?}", self.pso.inertia));
        line("pso_cognitive", format!("{:?}", self.pso.cognitive));
        line("pso_social", format!("{:?}", self.pso.social));
        line("seed", self.pso.seed.to_string());
        line("sphere_samples", self.sphere_samples.to_string());
        line(
            "exposure",
            match self.exposure {
                ExposureTier::GeneralPublic => "\"general_public\"".into(),
                ExposureTier::Occupational => "\"occupational\"".into(),
            },
        );
        if let Some(p) = &self.output {
            line("output", format!("{:?}", p.display().to_string()));
        }
        line(
            "format",
            match self.format {
                OutputFormat::Csv => "\"csv\"".into(),
                OutputFormat::Json => "\"json\"".into(),
            },
        );
        out
    }
}

fn arch(s: &str) -> ArchSpec {
    s.parse().expect("built-in architecture label")
}

fn profile_key(prefix: &str, field: &str) -> String {
    let suffix = match field {
        "control_board" => "control_board_w",
        "per_element_drive" => "per_element_w",
        other => other,
    };
    format!("{prefix}_{suffix}")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be positive")))
    }
}

fn all_positive(name: &str, values: &[f64]) -> Result<()> {
    values.iter().try_for_each(|&v| positive(name, v))
}

fn non_empty(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        Err(Error::invalid(name, "must not be empty"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    experiment: Option<String>,
    frequencies_ghz: Option<Vec<f64>>,
    d_prime_m: Option<Vec<f64>>,
    edge_length_m: Option<f64>,
    er_distance_m: Option<f64>,
    target_power_w: Option<f64>,
    radii_m: Option<Vec<f64>>,
    array_rows: Option<usize>,
    array_cols: Option<usize>,
    element_gain_db: Option<f64>,
    architectures: Option<Vec<String>>,
    feeder_gain_db: Option<f64>,
    ris_element_gain_db: Option<f64>,
    dma_element_gain_db: Option<f64>,
    dma_effective_index: Option<f64>,
    ris_hpa_efficiency: Option<f64>,
    ris_control_board_w: Option<f64>,
    ris_per_element_w: Option<f64>,
    dma_hpa_efficiency: Option<f64>,
    dma_control_board_w: Option<f64>,
    dma_per_element_w: Option<f64>,
    fd_hpa_efficiency: Option<f64>,
    fd_control_board_w: Option<f64>,
    fd_per_element_w: Option<f64>,
    pso_swarm_size: Option<usize>,
    pso_iterations: Option<usize>,
    pso_inertia: Option<f64>,
    pso_cognitive: Option<f64>,
    pso_social: Option<f64>,
    seed: Option<u64>,
    sphere_samples: Option<usize>,
    exposure: Option<String>,
    output: Option<PathBuf>,
    format: Option<String>,
}

fn override_profile(p: &mut ConsumptionProfile, eta: Option<f64>, board: Option<f64>, drive: Option<f64>) {
    if let Some(v) = eta {
        p.hpa_efficiency = v;
    }
    if let Some(v) = board {
        p.control_board = v;
    }
    if let Some(v) = drive {
        p.per_element_drive = v;
    }
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        Error::Syntax {
            line,
            message: e.message().to_owned(),
        }
    })?;
    let experiment: Experiment = raw
        .experiment
        .as_deref()
        .ok_or_else(|| Error::Config("missing experiment".into()))?
        .parse()?;
    let mut cfg = ScenarioConfig::defaults(experiment);

    macro_rules! take {
        ($($field:ident),*) => {
            $(if let Some(v) = raw.$field { cfg.$field = v; })*
        };
    }
    take!(
        frequencies_ghz,
        d_prime_m,
        edge_length_m,
        er_distance_m,
        target_power_w,
        radii_m,
        array_rows,
        array_cols,
        element_gain_db,
        feeder_gain_db,
        ris_element_gain_db,
        dma_element_gain_db,
        dma_effective_index,
        sphere_samples
    );
    if let Some(list) = raw.architectures {
        cfg.architectures = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    override_profile(
        &mut cfg.ris_profile,
        raw.ris_hpa_efficiency,
        raw.ris_control_board_w,
        raw.ris_per_element_w,
    );
    override_profile(
        &mut cfg.dma_profile,
        raw.dma_hpa_efficiency,
        raw.dma_control_board_w,
        raw.dma_per_element_w,
    );
    override_profile(
        &mut cfg.fd_profile,
        raw.fd_hpa_efficiency,
        raw.fd_control_board_w,
        raw.fd_per_element_w,
    );
    let pso = &mut cfg.pso;
    if let Some(v) = raw.pso_swarm_size {
        pso.swarm_size = v;
    }
    if let Some(v) = raw.pso_iterations {
        pso.iterations = v;
    }
    if let Some(v) = raw.pso_inertia {
        pso.inertia = v;
    }
    if let Some(v) = raw.pso_cognitive {
        pso.cognitive = v;
    }
    if let Some(v) = raw.pso_social {
        pso.social = v;
    }
    if let Some(v) = raw.seed {
        pso.seed = v;
    }
    if let Some(e) = raw.exposure {
        cfg.exposure = match e.to_ascii_lowercase().replace('-', "_").as_str() {
            "general_public" | "public" => ExposureTier::GeneralPublic,
            "occupational" => ExposureTier::Occupational,
            other => {
                return Err(Error::invalid(
                    "exposure",
                    format!("unknown tier `{other}` (expected general_public or occupational)"),
                ))
            }
        };
    }
    cfg.output = raw.output;
    if let Some(f) = raw.format {
        cfg.format = f.parse()?;
    }
    cfg.validate()?;
    Ok(cfg)
}
