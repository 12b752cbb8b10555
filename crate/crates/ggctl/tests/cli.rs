use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ggctl::plot::parse_svg_points;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ggctl-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path
}

fn ggctl(scenario: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggctl"))
        .arg(scenario)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

const SMALL: &str = r#""grid": { "length": 3.0, "horizon": 0.5, "nx": 24, "nt": 48 }"#;

#[test]
fn configuration_errors_exit_with_code_1() {
    let dir = scratch("config-errors");
    let cases = [
        r#"{ "schema_version": 99 }"#,
        r#"{ "schema_version": 1, "params": { "b": -1.0 } }"#,
        r#"{ "schema_version": 1, "unknown_key": 3 }"#,
        r#"{ "schema_version": 1, "config_id": "C9" }"#,
        r#"{ "schema_version": 1, "#,
    ];
    for json in cases {
        let o = ggctl("simulate", &write_config(&dir, json), &dir.join("out"), &[]);
        assert_eq!(o.status.code(), Some(1), "{json}: {}", stderr(&o));
    }
    let o = ggctl("simulate", &dir.join("missing.json"), &dir.join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn critical_length_gate_exits_with_code_3_unless_forced() {
    let dir = scratch("gate");
    let json = r#"{ "schema_version": 1, "config_id": "C1",
        "grid": { "length": 5.441398092702653, "horizon": 0.5, "nx": 24, "nt": 96 },
        "target": { "kind": "sine", "eps": 0.01 }, "hum": { "maxit": 20 } }"#;
    let cfg = write_config(&dir, json);
    let o = ggctl("hum", &cfg, &dir.join("gated"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("F1(1)"), "{}", stderr(&o));
    let o = ggctl("hum", &cfg, &dir.join("forced"), &["--force"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.join("forced/controls.csv").exists());
}

#[test]
fn solver_failure_exits_with_code_2_and_names_the_error() {
    let dir = scratch("solver");
    let json = format!(
        r#"{{ "schema_version": 1, {SMALL}, "target": {{ "kind": "sine", "eps": 0.01 }},
            "hum": {{ "tol": 1e-14, "maxit": 1, "require_convergence": true }} }}"#
    );
    let o = ggctl("hum", &write_config(&dir, &json), &dir.join("out"), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let msg = stderr(&o);
    assert!(msg.contains("CgStagnation") || msg.contains("NonConvergence"), "{msg}");
}

#[test]
fn zero_data_simulation_writes_an_all_zero_trajectory() {
    let dir = scratch("zero");
    let cfg = write_config(&dir, &format!(r#"{{ "schema_version": 1, {SMALL} }}"#));
    let o = ggctl("simulate", &cfg, &dir.join("out"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.join("out/trajectory.csv"));
    assert_eq!(header, ["t", "x", "u", "v"]);
    assert!(!rows.is_empty());
    for row in rows {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn summary_echoes_the_resolved_config_and_seed_override() {
    let dir = scratch("summary");
    let cfg = write_config(
        &dir,
        &format!(r#"{{ "schema_version": 1, {SMALL}, "initial": {{ "kind": "random", "modes": 6, "scale": 0.1 }} }}"#),
    );
    let o = ggctl("simulate", &cfg, &dir.join("out"), &["--seed", "17"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap();
    let config = &summary["config"];
    assert_eq!(config["seed"], 17);
    assert_eq!(config["config_id"], "C3");
    assert_eq!(config["params"]["a"], 0.5);
    for k in ["a1", "a2", "b", "c", "r"] {
        assert_eq!(config["params"][k], 1.0, "{k}");
    }
    assert_eq!(config["grid"]["nx"], 24);
    let listed: Vec<&str> = summary["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for f in &listed {
        assert!(dir.join("out").join(f).exists(), "{f} listed but missing");
    }
}

#[test]
fn critical_list_starts_with_the_smallest_critical_length() {
    let dir = scratch("critical");
    let cfg = write_config(&dir, r#"{ "schema_version": 1, "critical": { "lmax": 12.0 } }"#);
    let o = ggctl("critical-list", &cfg, &dir.join("out"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.join("out/critical_lengths.csv"));
    assert_eq!(header[0], "length");
    let first: f64 = rows[0][0].parse().unwrap();
    assert!((first - 5.441398092702653).abs() < 1e-12, "{first}");
    assert_eq!(rows[0][3], "F1(1)");
    let lengths: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(lengths.windows(2).all(|w| w[0] <= w[1]) && lengths.iter().all(|&l| l <= 12.0));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        &format!(
            r#"{{ "schema_version": 1, {SMALL}, "initial": {{ "kind": "random", "modes": 6, "scale": 0.1 }}, "boundary": {{ "kind": "random", "scale": 0.1 }} }}"#
        ),
    );
    let runs: Vec<PathBuf> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.join(name);
            let o = ggctl("simulate", &cfg, &out, &["--seed", "5"]);
            assert!(o.status.success(), "{}", stderr(&o));
            out
        })
        .collect();
    let mut names: Vec<_> = fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        assert_eq!(fs::read(runs[0].join(&name)).unwrap(), fs::read(runs[1].join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn svg_data_points_reproduce_the_csv_values() {
    let dir = scratch("svg");
    let cfg = write_config(
        &dir,
        r#"{ "schema_version": 1, "grid": { "length": 5.0, "horizon": 0.5, "nx": 24, "nt": 48 }, "config_id": "C1",
            "scan": { "lengths": { "from": 4.5, "to": 6.0, "count": 4 }, "samples": 2, "modal_modes": 6 } }"#,
    );
    let o = ggctl("obs-scan", &cfg, &dir.join("out"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.join("out/obs_scan.csv"));
    let svg = fs::read_to_string(dir.join("out/obs_scan.svg")).unwrap();
    let curves = parse_svg_points(&svg);
    let col = header.iter().position(|h| h == "observability_ratio").unwrap();
    let expected: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[col].parse().unwrap())).collect();
    assert!(curves.contains(&expected), "curves {curves:?} do not include {expected:?}");
}
