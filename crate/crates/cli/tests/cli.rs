mod common;

use common::*;
use oamqkd_cli::config::ConfigError;
use oamqkd_cli::load_config;

#[test]
fn shipped_configs_load_and_match_schema() {
    let schema = schema("config");
    for name in ["defaults", "reference_keys", "intercept_resend"] {
        let path = crate_path(&format!("configs/{name}.json"));
        load_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        validate(&read_json(&path), &schema).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let cfg = load_config(&crate_path("configs/defaults.json")).unwrap();
    let a = cfg.alphabet().unwrap();
    assert_eq!((a.n_symbols(), a.ell()), (3, 1));
    assert!((a.theta_a() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert_eq!(a.tau(), 1.0);
}

#[test]
fn single_symbol_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "n1.json", r#"{"alphabet": {"n_symbols": 1}}"#);
    let err = load_config(&path).unwrap_err();
    assert!(matches!(err, ConfigError::Invalid(_)));
    assert!(err.to_string().contains("n_symbols ≥ 2"), "{err}");

    let out = oamqkd(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_symbols ≥ 2"));
}

#[test]
fn off_grid_alice_angle_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "pi3.json", r#"{"alphabet": {"theta_a": "pi/3"}}"#);
    let cfg = load_config(&path).unwrap();
    assert!((cfg.alphabet().unwrap().theta_a() - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.json", "{\n  \"run\": {\"master_seed\": \"x\"}\n}");
    let err = load_config(&path).unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn reference_keys_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "run",
        "--config",
        crate_path("configs/reference_keys.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let decoded = csv_column(&dir.path().join("records.csv"), "decoded");
    assert_eq!(decoded, ["0", "1", "1", "2", "2", "1", "0", "2", "0", "1", "0", "2", "1"]);

    let summary = read_json(&dir.path().join("summary.json"));
    validate(&summary, &schema("summary")).unwrap();
    validate(&summary["config"], &schema("config")).unwrap();
    assert_eq!(summary["n_sent"], 13);
    assert_eq!(summary["error_count"], 0);
    let c_max = summary["c_max"].as_f64().unwrap();
    assert!((c_max - 561.0).abs() < 0.05 * 561.0, "{c_max}");
    assert_eq!(csv_column(&dir.path().join("trace.csv"), "reduced_time").len(), 13);
}

#[test]
fn empty_key_list_gives_empty_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "run",
        "--config",
        crate_path("configs/reference_keys.json").to_str().unwrap(),
        "--keys",
        "",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(text, "index,symbol_sent,counts_total,relative,decoded\n");
    assert_eq!(read_json(&dir.path().join("summary.json"))["n_sent"], 0);
}

#[test]
fn decode_errors_exit_two() {
    // a c_max far above the real maximum pushes every symbol 2 into symbol 1
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "skew.json",
        r#"{"run": {"keys": [2, 2, 2, 2], "c_max_override": 1100, "regions": "fixed"}}"#,
    );
    let out = oamqkd(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("records.csv").exists());
}

#[test]
fn output_root_from_environment() {
    let root = tempfile::tempdir().unwrap();
    let out = bin()
        .env("OAMQKD_OUTPUT_ROOT", root.path())
        .args(["run", "--config", crate_path("configs/reference_keys.json").to_str().unwrap(), "--out", "nested"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(root.path().join("nested/records.csv").exists());
}

#[test]
fn two_point_sweep_reports_visibility_then_fit_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "sweep",
        "--config",
        crate_path("configs/defaults.json").to_str().unwrap(),
        "--points",
        "2",
        "--attack",
        "none",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let vis = read_json(&dir.path().join("visibility.json"));
    validate(&vis, &schema("visibility")).unwrap();
    assert!(vis["visibility"].as_f64().unwrap() > 0.99, "{vis}");
    assert_eq!(vis["detected"], false);
    assert!(!dir.path().join("fit.json").exists());
    assert_eq!(csv_column(&dir.path().join("sweep.csv"), "theta_b").len(), 2);
}

#[test]
fn intercept_resend_sweep_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "sweep",
        "--config",
        crate_path("configs/defaults.json").to_str().unwrap(),
        "--points",
        "16",
        "--attack",
        "intercept-resend",
        "--intervals",
        "63",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let vis = read_json(&dir.path().join("visibility.json"));
    validate(&vis, &schema("visibility")).unwrap();
    let v = vis["visibility"].as_f64().unwrap();
    assert!((v - 0.5).abs() <= 0.05, "{v}");
    assert_eq!(vis["detected"], true);
    validate(&read_json(&dir.path().join("fit.json")), &schema("fit")).unwrap();
}

#[test]
fn sweep_flag_consistency() {
    let cfg = crate_path("configs/defaults.json");
    let cfg = cfg.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(oamqkd(&["sweep", "--config", cfg, "--points", "1", "--out", d]).status.code(), Some(1));
    let siphon_no_fraction = oamqkd(&["sweep", "--config", cfg, "--points", "8", "--attack", "photon-siphon", "--out", d]);
    assert_eq!(siphon_no_fraction.status.code(), Some(1));
    let phi_on_none = oamqkd(&["sweep", "--config", cfg, "--points", "8", "--attack", "none", "--phi", "pi/8", "--out", d]);
    assert_eq!(phi_on_none.status.code(), Some(1));
}

#[test]
fn calibration_writes_disjoint_regions() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "calibrate",
        "--config",
        crate_path("configs/defaults.json").to_str().unwrap(),
        "--samples-per-symbol",
        "1000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let regions = read_json(&dir.path().join("regions.json"));
    validate(&regions, &schema("regions")).unwrap();
    let r = regions["regions"].as_array().unwrap();
    assert_eq!(r.len(), 3);
    assert!(r[0]["hi"].as_f64().unwrap() <= 0.1);
    assert!(r[2]["lo"].as_f64().unwrap() >= 0.6);
    assert_eq!(csv_column(&dir.path().join("clusters.csv"), "symbol").len(), 3000);
    let freq = csv_column(&dir.path().join("histogram.csv"), "frequency");
    let total: f64 = freq.iter().map(|f| f.parse::<f64>().unwrap()).sum();
    assert!((total - 3.0).abs() < 1e-3, "{total}");
}

#[test]
fn heavy_noise_overlaps_and_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "noisy.json", r#"{"physics": {"intensity_noise_sigma": 0.2}}"#);
    let out = oamqkd(&[
        "calibrate",
        "--config",
        cfg.to_str().unwrap(),
        "--samples-per-symbol",
        "1000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
    assert!(dir.path().join("clusters.csv").exists());
    assert!(!dir.path().join("regions.json").exists());

    let run = oamqkd(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn one_sample_per_symbol_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = oamqkd(&[
        "calibrate",
        "--config",
        crate_path("configs/defaults.json").to_str().unwrap(),
        "--samples-per-symbol",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples-per-symbol"));
}

#[test]
fn keyrate_examples() {
    let cases = [
        ("0.2", "4", "5 symbols/s", "10 bps"),
        ("1.0", "3", "1 symbols/s", "1.585 bps"),
        ("1", "2", "1 symbols/s", "1 bps"),
    ];
    for (tau, n, sym, bps) in cases {
        let out = oamqkd(&["keyrate", "--tau", tau, "--alphabet", n]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(&lines[1..], [sym, bps], "{text}");
    }
    let bad = oamqkd(&["keyrate", "--tau", "0", "--alphabet", "4"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn keyrate_range_from_rate_bounds() {
    let out = oamqkd(&[
        "keyrate",
        "--tau",
        "0.2",
        "--alphabet",
        "4",
        "--rate-min",
        "100",
        "--rate-max",
        "10000",
        "--counts-per-symbol",
        "20",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("10 to 1000 bps"), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(oamqkd(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(oamqkd(&["keyrate", "--tau", "1"]).status.code(), Some(1));
    assert_eq!(oamqkd(&["--help"]).status.code(), Some(0));
}
