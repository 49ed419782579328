use std::path::Path;
use std::process::{Command, Output};

use spinchan_cli::{parse_header, RunConfig};

const PI: &str = "3.141592653589793";

fn spinchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinchan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = spinchan(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

/// First table after the header; stops at the next `#` line.
fn parse_csv(text: &str) -> Csv {
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    let columns = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .take_while(|l| !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|v| match v {
                    "true" => 1.0,
                    "false" => 0.0,
                    _ => v.parse().unwrap(),
                })
                .collect()
        })
        .collect();
    Csv { columns, rows }
}

#[test]
fn mirror_transfer_endpoints() {
    let text = stdout(&["transfer", "--family", "mirror", "--n", "4", "--omega", "1.0", "--t-max", PI, "--samples", "3"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.columns, ["N", "t", "abs_f", "F_free"]);
    let f = csv.col("F_free");
    assert_eq!(f.len(), 3);
    assert!((f[0] - 0.5).abs() < 1e-12);
    assert!(f[1] > 0.5 && f[1] < 1.0);
    assert!((f[2] - 1.0).abs() < 1e-10);
    assert!((csv.col("t")[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn common_environment_never_beats_free_transfer() {
    let text = stdout(&["transfer", "--family", "heisenberg", "--n", "10", "--theta", "0.02", "--t-max", "30", "--samples", "300"]);
    let csv = parse_csv(&text);
    for (free, common) in csv.col("F_free").iter().zip(csv.col("F_common")) {
        assert!(common <= *free + 1e-15);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let args = ["transfer", "--family", "heisenberg", "--n-range", "2:6", "--theta", "0.05", "--t-max", "12", "--samples", "97", "--out", p];
        assert!(spinchan(&args).status.success());
        std::fs::read(&path).unwrap()
    };
    let a = run("a.csv");
    let b = run("a.csv");
    assert_eq!(a, b);
}

#[test]
fn header_round_trips_and_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let args = [
        "common-env", "--family", "heisenberg", "--n-range", "3:4", "--field", "-0.25", "--theta", "0.03",
        "--t-max", "7.7", "--samples", "11", "--out", first.to_str().unwrap(),
    ];
    assert!(spinchan(&args).status.success());
    let text = std::fs::read_to_string(&first).unwrap();
    let (artifact, cfg) = parse_header(&text).unwrap();
    assert!(artifact.starts_with("spinchan "));
    assert_eq!(cfg.n_range.as_deref(), Some("3:4"));
    assert_eq!(cfg.field, Some(-0.25));
    assert_eq!(cfg.t_max, Some(7.7));

    // Feed the echoed config back in as a config file; only the output path changes.
    let second = dir.path().join("second.csv");
    let toml_body: String = text
        .lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("artifact") && !l.starts_with("out ="))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, toml_body).unwrap();
    let out = spinchan(&["common-env", "--config", cfg_path.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = std::fs::read_to_string(&second).unwrap();
    let (_, cfg2) = parse_header(&again).unwrap();
    assert_eq!(RunConfig { out: None, ..cfg2 }, RunConfig { out: None, ..cfg });
    let body = |t: &str| t.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&text), body(&again));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "family = \"mirror\"\nn = 3\nt-max = 1.0\nsamples = 50\n").unwrap();
    let text = stdout(&["transfer", "--config", cfg.to_str().unwrap(), "--samples", "4", "--n", "5"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.rows.len(), 4);
    assert!(csv.col("N").iter().all(|&n| n == 5.0));
}

#[test]
fn damping_probability_is_length_independent() {
    let text = stdout(&["lindblad", "--family", "mirror", "--n-range", "2:6", "--gamma", "0.1", "--channel", "damping"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.columns, ["N", "t_star", "P", "F_avg"]);
    let target = (-0.1 * std::f64::consts::PI).exp();
    for p in csv.col("P") {
        assert!((p - target).abs() < 1e-4);
    }
}

#[test]
fn dephasing_probability_decreases_with_length() {
    let text = stdout(&["lindblad", "--family", "mirror", "--n-range", "2:8", "--gamma", "0.1", "--channel", "dephasing"]);
    let p = parse_csv(&text).col("P");
    assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
}

#[test]
fn closed_mirror_chain_is_perfect() {
    let text = stdout(&["lindblad", "--family", "mirror", "--n-range", "1:7", "--gamma", "0", "--channel", "dephasing"]);
    let csv = parse_csv(&text);
    for (p, f) in csv.col("P").iter().zip(csv.col("F_avg")) {
        assert!((p - 1.0).abs() < 1e-8 && (f - 1.0).abs() < 1e-8, "{p} {f}");
    }
}

#[test]
fn heisenberg_lindblad_reports_optimal_times() {
    let text = stdout(&["lindblad", "--family", "heisenberg", "--n-range", "3:5", "--gamma", "0.1", "--channel", "damping", "--window", "20"]);
    let csv = parse_csv(&text);
    let p = csv.col("P");
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    assert!(csv.col("t_star").iter().all(|&t| t > 0.0 && t <= 20.0));
}

#[test]
fn critical_length_table_and_appendix() {
    let text = stdout(&["critical-length", "--theta", "0.005,0.02,0.05", "--window", "400"]);
    let main = parse_csv(&text);
    assert_eq!(main.columns, ["theta", "threshold", "n_c", "censored"]);
    assert!(main.col("threshold").iter().all(|&t| (t - 2.0 / 3.0).abs() < 1e-15));
    let nc = main.col("n_c");
    assert!(nc.windows(2).all(|w| w[1] <= w[0]), "{nc:?}");
    let appendix_text: String = text.split("# table = \"appendix\"\n").nth(1).unwrap().to_string();
    let appendix = parse_csv(&appendix_text);
    assert_eq!(appendix.columns, ["theta", "N", "t_star", "F_max"]);
    let first_theta = appendix.rows.iter().filter(|r| r[0] == 0.005).count();
    assert_eq!(first_theta as f64, nc[0] + 1.0);
}

#[test]
fn mirror_critical_length_is_censored() {
    let text = stdout(&["critical-length", "--family", "mirror", "--window", "4", "--n-limit", "12"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.col("censored"), [1.0]);
    assert_eq!(csv.col("n_c"), [12.0]);
}

#[test]
fn entangle_ratio_tracks_the_gaussian_factor() {
    let text = stdout(&["entangle", "--family", "heisenberg", "--n", "6", "--theta", "0.3", "--t-max", "4", "--samples", "41"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.columns, ["t", "xi0", "xi", "ratio", "factor"]);
    for ((t, r), f) in csv.col("t").iter().zip(csv.col("ratio")).zip(csv.col("factor")) {
        assert!((r - f).abs() < 1e-9);
        assert!((f - (-0.3 * t * t / 4.0).exp()).abs() < 1e-12);
    }
    assert_eq!(csv.col("xi")[0], csv.col("xi0")[0]);
}

#[test]
fn entangle_mirror_delivers_a_bell_pair() {
    let text = stdout(&["entangle", "--family", "mirror", "--n", "5", "--theta", "0", "--t-max", PI, "--samples", "2"]);
    let xi = parse_csv(&text).col("xi");
    assert!((xi[1] - 1.0).abs() < 1e-9);
}

#[test]
fn explicit_environment_file() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.txt");
    std::fs::write(&env, "# g p\n0.1 0.5\n0.2 0.5  # second spin\n\n0.05 0.3\n").unwrap();
    let text = stdout(&["common-env", "--family", "heisenberg", "--n", "3", "--env-file", env.to_str().unwrap(), "--t-max", "5", "--samples", "6"]);
    let csv = parse_csv(&text);
    assert_eq!(csv.columns, ["N", "t", "abs_f", "factor", "F_free", "F_common"]);
    assert_eq!(csv.col("factor")[0], 1.0);
    for (free, common) in csv.col("F_free").iter().zip(csv.col("F_common")) {
        assert!(common <= *free + 1e-15);
    }

    std::fs::write(&env, "0.1 0.5\n0.2\n").unwrap();
    let out = spinchan(&["common-env", "--family", "heisenberg", "--n", "3", "--env-file", env.to_str().unwrap(), "--t-max", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn json_uses_the_csv_column_names() {
    let args = ["transfer", "--family", "mirror", "--n", "3", "--t-max", "1", "--samples", "5", "--theta", "0.1"];
    let csv = parse_csv(&stdout(&args));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json_args)).unwrap();
    let cols: Vec<String> = serde_json::from_value(doc["columns"].clone()).unwrap();
    assert_eq!(cols, csv.columns);
    let rows: Vec<Vec<f64>> = serde_json::from_value(doc["rows"].clone()).unwrap();
    assert_eq!(rows, csv.rows);
    assert_eq!(doc["config"]["t-max"], 1.0);
}

fn config_error(args: &[&str]) -> String {
    let out = spinchan(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    assert!(out.stdout.is_empty());
    String::from_utf8(out.stderr).unwrap()
}

#[test]
fn configuration_errors_exit_with_status_two() {
    let msg = config_error(&["lindblad", "--family", "mirror", "--n", "3", "--channel", "damping"]);
    assert!(msg.contains("gamma"), "{msg}");
    let msg = config_error(&["transfer", "--family", "heisenberg", "--n", "3", "--t-max", "1", "--theta", "-1"]);
    assert!(msg.contains("theta"), "{msg}");
    let msg = config_error(&["transfer", "--family", "heisenberg", "--n", "3", "--t-max", "1", "--samples", "1"]);
    assert!(msg.contains("samples"), "{msg}");
    let msg = config_error(&["transfer", "--n", "3", "--t-max", "1"]);
    assert!(msg.contains("family"), "{msg}");
    config_error(&["transfer", "--family", "mirror", "--n", "3", "--t-max", "1", "--no-such-flag"]);
    config_error(&["transfer", "--family", "mirror", "--n-range", "4:2", "--t-max", "1"]);
    config_error(&["common-env", "--family", "mirror", "--n", "3", "--t-max", "1"]);
}

#[test]
fn malformed_config_file_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "family = \"mirror\"\nsampels = 3\n").unwrap();
    let msg = config_error(&["transfer", "--config", cfg.to_str().unwrap()]);
    assert!(msg.contains("sampels"), "{msg}");
    let missing = Path::new("/nonexistent/run.toml");
    let msg = config_error(&["transfer", "--config", missing.to_str().unwrap()]);
    assert!(msg.contains("config"), "{msg}");
}
