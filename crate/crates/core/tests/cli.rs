use std::path::Path;
use std::process::Command;

fn zeromode(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zeromode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn cho2_csv_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = zeromode(&[
            "run", "cho2", "--omega-sq", "10", "--kappa", "100", "--t", "log:1e-1:1e4:200",
            "--output", dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = read(a.path(), "cho2.csv");
    assert_eq!(csv, read(b.path(), "cho2.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,S,xi,l_Xs,l_Xa,l_Ps,l_Pa"));
    assert_eq!(lines.count(), 200);
    let schema: serde_json::Value = serde_json::from_str(&read(a.path(), "cho2.schema.json")).unwrap();
    assert_eq!(schema["columns"].as_array().unwrap().len(), 7);
    let summary: serde_json::Value = serde_json::from_str(&read(a.path(), "cho2.summary.json")).unwrap();
    assert_eq!(summary["config"]["parameters"]["kappa"], 100.0);
    assert!(summary["wall_time_s"].as_f64().is_some());
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn rotor2_columns_and_thread_independence() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = zeromode(&[
            "run", "rotor2", "--omega-sq", "10", "--kappa", "100", "--M", "auto", "--t", "0:30:600",
            "--threads", threads, "--output", dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let csv = read(a.path(), "rotor2.csv");
    assert_eq!(csv, read(b.path(), "rotor2.csv"));
    assert!(csv.starts_with("t,S_CR,S_CHO_ref,cos_plus,cos_minus\n"));
    assert_eq!(csv.lines().count(), 601);
}

#[test]
fn fieldtheory_preset_reports_timescale() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeromode(&["run", "fieldtheory", "--preset", "paper-2024", "--mc-samples", "100", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "fieldtheory.summary.json")).unwrap();
    let tc = summary["results"]["t_c"].as_f64().unwrap();
    assert!((tc - 0.012).abs() < 0.0012, "{tc}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = zeromode(&["run", "cho2", "--kapa", "3", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--kapa"));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "scenario = \"cho2\"\n\n[parameters]\nkappa = \"many\"\n").unwrap();
    let out = zeromode(&["run", "cho2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml:4"));

    // the guard against cutoffs that never converge is a numerical failure
    let out = zeromode(&["run", "rotor2", "--omega-sq", "10", "--kappa", "100", "--max-m", "8", "--t", "0:1:2", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn presets_are_listed() {
    let out = zeromode(&["presets"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["fig2", "fig3", "fig4a", "fig4b", "fig4c", "fig5", "paper-2024"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
