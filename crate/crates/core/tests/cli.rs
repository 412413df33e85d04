//! End-to-end checks of the command-line interface: spec sources,
//! overrides, exit codes, and artifact layout.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swion"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("swion-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const MINIMAL_CONFIG: &str = r#"
[params]
m = 80000.0
omega = 5e-4
delta = 0.005028
lambda = 0.05
k = 0.2
phi = 1.07249074

[initial]
kind = "gaussian"
x0 = 6.0
sigma = 0.047

[propagator]
dt_report = 50.0
t_end = 500.0
"#;

#[test]
fn presets_list_names_every_preset() {
    let out = bin().arg("presets-list").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for name in ["fig2a", "fig2b", "fig3-coherent", "fig3-squeezed", "fig4", "fig5"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_from_config_file_writes_the_manifest() {
    let dir = tmpdir("run");
    let cfg = dir.join("run.toml");
    fs::write(&cfg, MINIMAL_CONFIG).unwrap();
    let out_dir = dir.join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], serde_json::Value::Bool(false));
    assert!(out_dir.join("series.csv").is_file());
    assert!(out_dir.join("resolved.toml").is_file());
    assert!(stdout(&out).contains("final norm drift"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn curves_subcommand_writes_only_curve_tables() {
    let dir = tmpdir("curves");
    let out = bin()
        .args(["curves", "--preset", "fig2a", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["curves_bare.txt", "curves_diabatic.txt", "curves_adiabatic.txt"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    assert!(!dir.join("series.csv").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn overrides_reach_the_resolved_config() {
    let dir = tmpdir("override");
    let out = bin()
        .args([
            "curves",
            "--preset",
            "fig2a",
            "--override",
            "params.lambda=0.07",
            "--override",
            "initial.x0=1.5",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let echo = fs::read_to_string(dir.join("resolved.toml")).unwrap();
    assert!(echo.contains("lambda = 0.07"), "{echo}");
    assert!(echo.contains("x0 = 1.5"), "{echo}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_problems_exit_with_code_2() {
    let dir = tmpdir("badcfg");
    // unknown key in the file
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, MINIMAL_CONFIG.replace("phi =", "phy =")).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // no spec source at all
    let out = bin().arg("run").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown preset name
    let out = bin().args(["run", "--preset", "fig9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fig5"), "should list valid names");

    // malformed override
    let out = bin()
        .args(["curves", "--preset", "fig2a", "--override", "params.lambda"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn numerical_failure_exits_3_and_flags_the_manifest_partial() {
    let dir = tmpdir("numfail");
    // a single absurd step: the expansion order overflows its ceiling
    let out = bin()
        .args([
            "run",
            "--preset",
            "fig2a",
            "--override",
            "propagator.dt_report=1e9",
            "--override",
            "propagator.t_end=1e9",
            "--override",
            "outputs.series=true",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], serde_json::Value::Bool(true));
    assert!(manifest["error"].as_str().unwrap().len() > 0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn scan_outputs_are_thread_count_invariant() {
    let scan_args = [
        "--preset",
        "fig3-squeezed",
        "--override",
        "scan.target_p_sp=0.5",
        "--override",
        "scan.budget=2",
        "--override",
        "scan.lambda.start=0.0",
        "--override",
        "scan.lambda.stop=0.05",
        "--override",
        "scan.lambda.count=2",
    ];
    let d1 = tmpdir("scan1");
    let out = bin()
        .arg("scan")
        .args(scan_args)
        .arg("--out")
        .arg(&d1)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let d2 = tmpdir("scan2");
    let out = bin()
        .arg("scan")
        .args(scan_args)
        .args(["--threads", "2", "--out"])
        .arg(&d2)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let t1 = fs::read(d1.join("scan.txt")).unwrap();
    let t2 = fs::read(d2.join("scan.txt")).unwrap();
    assert_eq!(t1, t2, "scan result depends on thread count");

    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d1.join("scan.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    // the coupled point ranks first against the 0.5 target
    assert!((rows[0]["lambda"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    assert!((rows[0]["p_sp"].as_f64().unwrap() - 0.4983).abs() < 0.02);
    let _ = fs::remove_dir_all(&d1);
    let _ = fs::remove_dir_all(&d2);
}
