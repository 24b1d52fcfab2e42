//! The `paracirc` binary: outputs, config runs and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn paracirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracirc"))
        .args(args)
        .env("PARACIRC_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_prints_the_design() {
    let out = paracirc(&[
        "synth",
        "--order",
        "2",
        "--ripple-db",
        "0.01",
        "--bw-hz",
        "250e6",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g: Vec<f64> = serde_json::from_value(json["prototype"]["g"].clone()).unwrap();
    assert!((g[1] - 0.44888).abs() < 1e-5 && (g[3] - 1.10075).abs() < 1e-5);
    assert!((json["gamma0_hz"].as_f64().unwrap() / 1e6 - 556.94).abs() < 0.01);
    assert_eq!(json["modes"].as_array().unwrap().len(), 6);
}

#[test]
fn single_point_sweep_has_nine_rows() {
    let out = paracirc(&[
        "cme-sweep",
        "--f-start-hz",
        "5e9",
        "--f-stop-hz",
        "5e9",
        "--points",
        "1",
        "--dtheta-deg",
        "-90",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = text(&out.stdout);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(
        lines[0],
        "f_in_hz,f_out_hz,in_port,in_harmonic,out_port,out_harmonic,dtheta_deg,s_re,s_im,s_db"
    );
}

#[test]
fn compare_exit_code_follows_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let (cme, ckt) = (dir.path().join("cme.csv"), dir.path().join("ckt.csv"));
    let grid = [
        "--f-start-hz",
        "4.9e9",
        "--f-stop-hz",
        "5.1e9",
        "--points",
        "11",
    ];
    let mut args = vec!["cme-sweep", "--out", path(&cme)];
    args.extend(grid);
    assert!(paracirc(&args).status.success());
    let mut args = vec![
        "circuit-sweep",
        "--out",
        path(&ckt),
        "--delta-m",
        "221.87e-12",
        "--dtheta-deg",
        "-74.73",
    ];
    args.extend(grid);
    let out = paracirc(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));

    let base = [
        "compare",
        "--a",
        path(&cme),
        "--b",
        path(&ckt),
        "--band",
        "4.9e9:5.1e9",
        "--threshold-db",
        "1",
    ];
    let pass = paracirc(&[&base[..], &["--entries", "BA,CB"]].concat());
    assert_eq!(pass.status.code(), Some(0), "{}", text(&pass.stderr));
    assert!(text(&pass.stdout).contains("PASS") || text(&pass.stderr).contains("PASS"));
    let fail = paracirc(&[&base[..], &["--entries", "AB"]].concat());
    assert_eq!(fail.status.code(), Some(1));
    assert!(text(&fail.stdout).contains("FAIL") || text(&fail.stderr).contains("FAIL"));
}

#[test]
fn config_file_runs_and_bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_csv = dir.path().join("sweep.csv");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"scenario": "cme-sweep", "freq": {{"start_hz": 4.9e9, "stop_hz": 5.1e9, "points": 5}}, "output": {:?}}}"#,
            path(&out_csv)
        ),
    )
    .unwrap();
    let ok = paracirc(&["run", "--config", path(&cfg)]);
    assert!(ok.status.success(), "{}", text(&ok.stderr));
    assert_eq!(
        std::fs::read_to_string(&out_csv).unwrap().lines().count(),
        1 + 5 * 9
    );

    std::fs::write(
        &cfg,
        r#"{"scenario": "cme-sweep", "freq": {"start_hz": 5e9, "stop_hz": 4e9, "points": 3}}"#,
    )
    .unwrap();
    assert_eq!(
        paracirc(&["run", "--config", path(&cfg)]).status.code(),
        Some(2)
    );
    std::fs::write(&cfg, r#"{"scenario": "cme-sweep", "unknown": true}"#).unwrap();
    assert_eq!(
        paracirc(&["run", "--config", path(&cfg)]).status.code(),
        Some(2)
    );
    assert_eq!(
        paracirc(&["run", "--config", path(&dir.path().join("missing.json"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        paracirc(&["cme-sweep", "--points", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn default_files_feed_back_into_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let (design, netlist) = (
        dir.path().join("design.json"),
        dir.path().join("netlist.json"),
    );
    assert!(paracirc(&["default-design", "--out", path(&design)])
        .status
        .success());
    assert!(paracirc(&["default-netlist", "--out", path(&netlist)])
        .status
        .success());

    let from_file = paracirc(&[
        "cme-sweep",
        "--design",
        path(&design),
        "--f-start-hz",
        "5e9",
        "--f-stop-hz",
        "5e9",
        "--points",
        "1",
    ]);
    let built_in = paracirc(&[
        "cme-sweep",
        "--f-start-hz",
        "5e9",
        "--f-stop-hz",
        "5e9",
        "--points",
        "1",
    ]);
    assert!(from_file.status.success(), "{}", text(&from_file.stderr));
    assert_eq!(from_file.stdout, built_in.stdout);

    let modes = paracirc(&["modes", "--netlist", path(&netlist)]);
    assert!(modes.status.success(), "{}", text(&modes.stderr));
    assert_eq!(modes.stdout, paracirc(&["modes"]).stdout);
}
