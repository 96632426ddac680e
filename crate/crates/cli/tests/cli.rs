use std::path::Path;
use std::process::{Command, Output};

fn nfwpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfwpt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn limits_table_as_csv() {
    let o = nfwpt(&["limits", "--freq", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("f_ghz,zone,quantity,averaging_min,limit,unit"));
    assert!(text.contains("30,local,power_density,6,30.1239715,W/m2"));
    assert!(text.contains("30,whole_body,power_density,30,10,W/m2"));
}

#[test]
fn limits_occupational_and_json() {
    let o = nfwpt(&["limits", "--freq", "4", "--occupational", "--format", "json", "--energy-minutes", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"limit\": 200"));
    assert_eq!(text.matches("\"energy_density\"").count(), 1);
}

#[test]
fn out_of_range_frequency_fails() {
    let o = nfwpt(&["limits", "--freq", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error"));
}

#[test]
fn describe_lists_constants_and_defaults() {
    let o = nfwpt(&["--describe"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in ["speed_of_light_m_per_s = 299792458", "pso_inertia = 0.7298", "# defaults: fig4", "er_distance_m = 3.0"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    let o = nfwpt(&["fig2", "--seed", "7", "--describe"]);
    let text = stdout(&o);
    assert!(text.contains("seed = 7"));
    assert!(text.contains("experiment = \"fig2\""));
}

#[test]
fn scenario_run_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &scenario,
        format!(
            "experiment = \"fig4\"\nfrequencies_ghz = [2.5]\npso_iterations = 3\npso_swarm_size = 4\nsphere_samples = 100\noutput = {:?}\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    let o = nfwpt(&["run", "--quiet", "--scenario", scenario.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["f_ghz", "arch", "bits", "n_elements", "p_tx_w", "p_consumed_w", "s_15cm_w_per_m2", "local_limit_w_per_m2", "compliant"]
    );
    assert_eq!(rdr.records().count(), 3);
}

#[test]
fn flags_override_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(&scenario, "experiment = \"fig2\"\nseed = 1\n").unwrap();
    let o = nfwpt(&["run", "--scenario", scenario.to_str().unwrap(), "--seed", "9", "--describe"]);
    assert!(stdout(&o).contains("seed = 9"));
}

#[test]
fn scenario_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"fig2\"\nfrequencies_ghz = [3,\n").unwrap();
    let o = nfwpt(&["run", "--scenario", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    std::fs::write(&bad, "experiment = \"fig2\"\nfrequencies_ghz = [-3]\n").unwrap();
    let o = nfwpt(&["run", "--scenario", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("frequencies_ghz"));

    let o = nfwpt(&["run", "--scenario", "/nonexistent/s.toml"]);
    assert!(!o.status.success());
}

#[test]
fn unwritable_output_fails() {
    let o = nfwpt(&["limits", "--freq", "10", "--out", "/nonexistent/dir/x.csv"]);
    assert!(!o.status.success());
    assert!(!Path::new("/nonexistent/dir/x.csv").exists());
}

#[test]
fn small_fig2_sweep() {
    let o = nfwpt(&["fig2", "--quiet", "--freqs", "10", "--samples", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(
        "f_ghz,d_prime_m,r_m,s_max_norm_per_m2,s_mean_norm_per_m2,s_at_1w_w_per_m2,local_limit_w_per_m2,compliant\n"
    ));
    // 3 thresholds x 8 radii
    assert_eq!(text.lines().count(), 1 + 24);
}

#[test]
fn no_command_is_an_error() {
    assert!(!nfwpt(&[]).status.success());
    assert!(!nfwpt(&["fig3"]).status.success());
}
