use nfwpt_core::emf::{steady_local_compliance, EmfLimits};
use nfwpt_core::experiments::{self, CUSTOM_COLUMNS, FIG2_COLUMNS, FIG4_COLUMNS};
use nfwpt_core::field::{sphere_density_stats, RX_GAIN};
use nfwpt_core::geometry::make_planar_array;
use nfwpt_core::optimize::optimize_architecture;
use nfwpt_core::output::{emit_results, OutputFormat};
use nfwpt_core::scenario::parse_scenario;
use nfwpt_core::{
    architectures, wavelength_ghz, ElementPattern, EtArchitecture, ExposureTier, PsoParams, ResultTable,
    Vec3,
};

fn small_fig4() -> ResultTable {
    let cfg = parse_scenario(
        "experiment = \"fig4\"\nfrequencies_ghz = [3, 8]\npso_iterations = 5\npso_swarm_size = 8\nsphere_samples = 200",
    )
    .unwrap();
    experiments::run(&cfg).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

#[test]
fn fig4_schema_and_element_counts() {
    let t = small_fig4();
    let (header, rows) = read_csv(&t.to_csv_string().unwrap());
    assert_eq!(header, FIG4_COLUMNS);
    assert_eq!(rows.len(), 6);
    let at3: Vec<(&str, &str, &str)> = rows
        .iter()
        .filter(|r| r[0] == "3")
        .map(|r| (r[1].as_str(), r[2].as_str(), r[3].as_str()))
        .collect();
    assert_eq!(at3, [("ris", "inf", "676"), ("ris", "2", "676"), ("dma", "2", "286")]);
}

#[test]
fn emitted_flags_match_emitted_densities() {
    let t = small_fig4();
    let (_, rows) = read_csv(&t.to_csv_string().unwrap());
    for r in rows {
        let f: f64 = r[0].parse().unwrap();
        let s: f64 = r[6].parse().unwrap();
        let flag: bool = r[8].parse().unwrap();
        assert_eq!(flag, steady_local_compliance(s, f, EmfLimits::default()).unwrap());
        let consumed: f64 = r[5].parse().unwrap();
        let tx: f64 = r[4].parse().unwrap();
        assert!(consumed > tx);
    }
}

#[test]
fn two_bit_rows_need_more_power() {
    let t = small_fig4();
    let tx = t.column("p_tx_w").unwrap();
    // rows per frequency: ris:inf, ris:2, dma:2
    for k in 0..2 {
        let inf = tx[3 * k].as_f64().unwrap();
        let two = tx[3 * k + 1].as_f64().unwrap();
        assert!(two >= inf * (1.0 - 1e-12), "{two} < {inf}");
    }
}

#[test]
fn fig4_is_reproducible() {
    let a = small_fig4().to_csv_string().unwrap();
    let b = small_fig4().to_csv_string().unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_changes_finite_resolution_rows_only() {
    let base = "experiment = \"fig4\"\nfrequencies_ghz = [3]\npso_iterations = 5\npso_swarm_size = 8\nsphere_samples = 200\n";
    let a = experiments::run(&parse_scenario(&format!("{base}seed = 1")).unwrap()).unwrap();
    let b = experiments::run(&parse_scenario(&format!("{base}seed = 2")).unwrap()).unwrap();
    // continuous RIS bypasses the swarm
    assert_eq!(a.rows[0], b.rows[0]);
}

#[test]
fn fig2_schema_and_normalization() {
    let cfg = parse_scenario(
        "experiment = \"fig2\"\nfrequencies_ghz = [10]\nd_prime_m = [8]\nradii_m = [0.02, 0.08]\nsphere_samples = 300",
    )
    .unwrap();
    let t = experiments::run(&cfg).unwrap();
    assert_eq!(t.columns, FIG2_COLUMNS);
    assert_eq!(t.rows.len(), 2);
    for row in &t.rows {
        let norm = row[3].as_f64().unwrap();
        let at1w = row[5].as_f64().unwrap();
        assert!((norm - at1w).abs() <= 1e-8 * norm);
        assert_eq!(row[6].as_f64().unwrap(), nfwpt_core::emf::local_power_density_limit(10.0).unwrap());
    }
}

#[test]
fn doubling_transmit_power_keeps_normalized_density() {
    let lambda = wavelength_ghz(10.0);
    let edge = (8.0 * lambda).sqrt();
    let array = make_planar_array(10, 10, edge, Vec3::ZERO, Vec3::Z, ElementPattern::cosine_power_db(13.0).unwrap())
        .unwrap();
    let er = Vec3::new(0.0, 0.0, 8.0);
    let tuned = optimize_architecture(
        &EtArchitecture::fully_digital(array),
        1.0,
        er,
        RX_GAIN,
        lambda,
        &PsoParams::default(),
    )
    .unwrap();
    let h = tuned.arch.effective_channel(er, RX_GAIN, lambda).unwrap();
    let norm = |p: f64| {
        let s = sphere_density_stats(&tuned.arch, p, er, 0.04, 500, lambda).unwrap();
        s.max / architectures::delivered_power(h, p)
    };
    let (a, b) = (norm(1.0), norm(2.0));
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}

#[test]
fn custom_sweep_reports_every_radius() {
    let cfg = parse_scenario(
        "experiment = \"custom\"\nfrequencies_ghz = [4]\narchitectures = [\"fd\", \"dma:1\"]\nradii_m = [0.05, 0.1, 0.2]\n\
         pso_iterations = 3\npso_swarm_size = 4\nsphere_samples = 150\nexposure = \"occupational\"",
    )
    .unwrap();
    let t = experiments::run(&cfg).unwrap();
    assert_eq!(t.columns, CUSTOM_COLUMNS);
    assert_eq!(t.rows.len(), 6);
    let limit = EmfLimits::new(ExposureTier::Occupational).power_density(4.0, nfwpt_core::Zone::Local).unwrap();
    for row in &t.rows {
        assert_eq!(row[9].as_f64(), Some(limit));
        assert!(row[7].as_f64().unwrap() >= row[8].as_f64().unwrap());
    }
    assert_eq!(t.rows[0][1].as_str(), Some("fd"));
    assert_eq!(t.rows[0][3].as_f64(), Some(100.0));
    assert_eq!(t.rows[3][2].as_str(), Some("1"));
}

#[test]
fn json_and_csv_files() {
    let t = small_fig4();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("fig4.csv");
    let json_path = dir.path().join("fig4.json");
    emit_results(&t, &csv_path, OutputFormat::Csv).unwrap();
    emit_results(&t, &json_path, OutputFormat::Json).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), t.rows.len());
    for row in rows {
        let keys: Vec<&String> = row.as_object().unwrap().keys().collect();
        assert_eq!(keys, FIG4_COLUMNS);
    }
    let (header, _) = read_csv(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(header, FIG4_COLUMNS);
}
