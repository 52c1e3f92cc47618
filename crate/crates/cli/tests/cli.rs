use std::path::Path;
use std::process::{Command, Output};

fn jcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcs-track"))
        .args(args)
        .output()
        .expect("spawn binary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().expect("utf-8 path")
}

#[test]
fn list_names_every_experiment() {
    let o = jcs(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in ["table2", "fig3", "table3", "sigma0", "fig4", "fig5"] {
        assert!(text.contains(id), "{text}");
    }
}

#[test]
fn unknown_experiment_lists_valid_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = jcs(&["run", "bogus", "--out", out_dir(dir.path())]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bogus") && err.contains("table2") && err.contains("fig5"), "{err}");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn validate_config_reports_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("room.cfg");
    std::fs::write(&path, "# no carrier\nP_TX = 10\n").unwrap();
    let o = jcs(&["validate-config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("f0") && text.contains("60 GHz"), "{text}");
}

#[test]
fn validate_config_rejects_malformed_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "f0 60e9\n").unwrap();
    let o = jcs(&["validate-config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("key = value"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    let o = jcs(&["run", "table2", "--config", missing.to_str().unwrap(), "--out", out_dir(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("absent.cfg"), "{}", stderr(&o));
}

#[test]
fn table2_prints_link_budget() {
    let dir = tempfile::tempdir().unwrap();
    let o = jcs(&["run", "table2", "--out", out_dir(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("AP1-HMD snr_db = 35.97"), "{text}");
    assert!(text.contains("AP1-RIS2-HMD snr_db = 28.36"), "{text}");
    assert!(dir.path().join("table2.csv").exists());
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("table2.json")).unwrap()).unwrap();
    assert_eq!(sidecar["seed"], 1);
}

#[test]
fn ris1_override_changes_reported_snr() {
    let dir = tempfile::tempdir().unwrap();
    let o = jcs(&["run", "table2", "--snr-override-ris1", "36", "--out", out_dir(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("AP1-RIS1-HMD snr_db = 36"), "{}", stdout(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = jcs(&["run", "fig3", "--trials", "3", "--seed", "7", "--out", out_dir(dir.path())]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fig3.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert!(String::from_utf8(read(&a)).unwrap().starts_with("series,x,y,y_err"));
}

#[test]
fn fig4_accepts_given_speed_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = jcs(&[
        "run", "fig4", "--profile", "P2", "--trials", "20", "--sigma-v", "0.0098,0.0098,0.0109", "--out",
        out_dir(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("P2 crossover_s = 0.6"), "{}", stdout(&o));
    assert!(dir.path().join("fig4_P2_S1.csv").exists());
}

#[test]
fn sigma_v_needs_three_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = jcs(&["run", "fig4", "--sigma-v", "0.01,0.01", "--out", out_dir(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("three"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_rejected() {
    let o = jcs(&["run", "table2", "--frobnicate"]);
    assert!(!o.status.success());
}
