use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nfwpt_core::emf::{self, EmfLimits, ExposureTier, Quantity};
use nfwpt_core::experiments;
use nfwpt_core::field::{DEFAULT_SPHERE_SAMPLES, RX_GAIN};
use nfwpt_core::optimize::MAX_VELOCITY;
use nfwpt_core::scenario::{parse_scenario, ScenarioConfig};
use nfwpt_core::{Experiment, OutputFormat, ResultTable, SPEED_OF_LIGHT};

/// Near-field RF wireless power transfer sweeps.
#[derive(Debug, Parser)]
#[command(name = "nfwpt", version, about)]
struct Cli {
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Base seed for the phase optimizer.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print constants and the resolved configuration, then exit.
    #[arg(long, global = true)]
    describe: bool,

    /// No progress on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized density around the receiver versus sphere radius.
    Fig2(SweepArgs),
    /// Consumed power and density at 15 cm versus frequency.
    Fig4(SweepArgs),
    /// Run a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Exposure limits at one frequency.
    Limits {
        /// GHz.
        #[arg(long)]
        freq: f64,
        /// Occupational instead of general-public limits.
        #[arg(long)]
        occupational: bool,
        /// Exposure intervals for the energy density rows, minutes.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        energy_minutes: Vec<f64>,
    },
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Frequencies, GHz (comma separated).
    #[arg(long, value_delimiter = ',')]
    freqs: Option<Vec<f64>>,
    /// Sphere lattice size.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let Some(command) = cli.command else {
        if cli.describe {
            print!("{}", describe(None));
            return Ok(());
        }
        return Err("no command given (try --help)".into());
    };
    let cfg = match command {
        Command::Limits {
            freq,
            occupational,
            energy_minutes,
        } => {
            let tier = if occupational {
                ExposureTier::Occupational
            } else {
                ExposureTier::GeneralPublic
            };
            if cli.describe {
                print!("{}", describe(None));
                return Ok(());
            }
            let table = limits_table(freq, tier, &energy_minutes)?;
            let format = cli.format.map(Into::into).unwrap_or_default();
            return emit(&table, cli.out.as_ref(), format);
        }
        Command::Fig2(args) => sweep_config(Experiment::Fig2, &args)?,
        Command::Fig4(args) => sweep_config(Experiment::Fig4, &args)?,
        Command::Run { scenario } => {
            let text = std::fs::read_to_string(&scenario)
                .map_err(|e| format!("cannot read {}: {e}", scenario.display()))?;
            parse_scenario(&text).map_err(|e| format!("{}: {e}", scenario.display()))?
        }
    };
    let mut cfg = cfg;
    if let Some(seed) = cli.seed {
        cfg.pso.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.format = f.into();
    }
    if let Some(out) = cli.out {
        cfg.output = Some(out);
    }
    cfg.validate()?;
    if cli.describe {
        print!("{}", describe(Some(&cfg)));
        return Ok(());
    }

    let quiet = cli.quiet;
    let progress = move |done: usize, total: usize| {
        if !quiet {
            eprintln!("[{done}/{total}] cells done");
        }
    };
    let table = experiments::run_with_progress(&cfg, &progress)?;
    emit(&table, cfg.output.as_ref(), cfg.format)
}

fn sweep_config(experiment: Experiment, args: &SweepArgs) -> nfwpt_core::Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::defaults(experiment);
    if let Some(f) = &args.freqs {
        cfg.frequencies_ghz = f.clone();
    }
    if let Some(n) = args.samples {
        cfg.sphere_samples = n;
    }
    Ok(cfg)
}

fn emit(
    table: &ResultTable,
    out: Option<&PathBuf>,
    format: OutputFormat,
) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(path) => nfwpt_core::output::emit_results(table, path, format)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match format {
                OutputFormat::Csv => table.write_csv(&mut lock)?,
                OutputFormat::Json => table.write_json(&mut lock)?,
            }
            lock.flush()?;
        }
    }
    Ok(())
}

fn limits_table(f: f64, tier: ExposureTier, minutes: &[f64]) -> nfwpt_core::Result<ResultTable> {
    let mut table = ResultTable::new(&["f_ghz", "zone", "quantity", "averaging_min", "limit", "unit"]);
    for row in EmfLimits::new(tier).table(f, minutes)? {
        let (quantity, unit) = match row.quantity {
            Quantity::PowerDensity => ("power_density", "W/m2"),
            Quantity::EnergyDensity => ("energy_density", "kJ/m2"),
        };
        table.push(vec![
            row.frequency_ghz.into(),
            row.zone.name().into(),
            quantity.into(),
            row.averaging_minutes.into(),
            row.value.into(),
            unit.into(),
        ]);
    }
    Ok(table)
}

fn describe(cfg: Option<&ScenarioConfig>) -> String {
    let mut s = String::new();
    s.push_str("# constants\n");
    s.push_str(&format!("# speed_of_light_m_per_s = {SPEED_OF_LIGHT}\n"));
    s.push_str(&format!("# receiver_gain = {RX_GAIN}\n"));
    s.push_str(&format!(
        "# frequency_range_ghz = [{}, {}]\n",
        emf::MIN_FREQUENCY_GHZ,
        emf::MAX_FREQUENCY_GHZ
    ));
    s.push_str(&format!("# limit_branch_ghz = {}\n", emf::BRANCH_FREQUENCY_GHZ));
    s.push_str("# local_power_density_w_per_m2 = 40 (f <= 6 GHz), 55 f^-0.177 (f > 6 GHz)\n");
    s.push_str("# whole_body_power_density_w_per_m2 = 10\n");
    s.push_str("# local_energy_density_kj_per_m2 = (14.4 | 19.8 f^-0.177) (0.05 + 0.95 sqrt(t/6))\n");
    s.push_str(&format!(
        "# averaging_minutes = local {}, whole body {}\n",
        emf::LOCAL_AVERAGING_MINUTES,
        emf::WHOLE_BODY_AVERAGING_MINUTES
    ));
    s.push_str("# occupational_factor = 5\n");
    s.push_str(&format!("# compliance_tolerance = {:e}\n", emf::COMPARISON_TOLERANCE));
    s.push_str(&format!("# pso_max_velocity_rad = {MAX_VELOCITY}\n"));
    s.push_str(&format!("# default_sphere_samples = {DEFAULT_SPHERE_SAMPLES}\n"));
    match cfg {
        Some(cfg) => {
            s.push_str("# configuration\n");
            s.push_str(&cfg.describe());
        }
        None => {
            for e in [Experiment::Fig2, Experiment::Fig4, Experiment::Custom] {
                s.push_str(&format!("# defaults: {e}\n"));
                s.push_str(&ScenarioConfig::defaults(e).describe());
            }
        }
    }
    s
}
