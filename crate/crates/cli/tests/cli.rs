use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn qradar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qradar")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scenario(name: &str) -> String {
    repo().join("scenarios").join(name).to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

const ARTIFACTS: [&str; 6] = [
    "report.json",
    "correlogram.csv",
    "correlogram.bin",
    "depth_profile.csv",
    "reference.qtt",
    "received.qtt",
];

#[test]
fn simulate_twice_gives_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = qradar(&[
            "simulate",
            &scenario("stationary_10m.toml"),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ARTIFACTS {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs");
    }
    let report: serde_json::Value = serde_json::from_slice(&read(&a, "report.json")).unwrap();
    let r = report["range_m"].as_f64().unwrap();
    assert!((9.9..=10.1).contains(&r));
    let csv = String::from_utf8(read(&a, "correlogram.csv")).unwrap();
    assert!(csv.starts_with("gamma,doppler_offset,tau_ps,count\n"));
    let profile = String::from_utf8(read(&a, "depth_profile.csv")).unwrap();
    assert!(profile.starts_with("tau_ps,count\n"));
}

#[test]
fn bundled_tag_files_match_the_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let (sim, cor) = (tmp.path().join("sim"), tmp.path().join("cor"));
    let o = qradar(&[
        "simulate",
        &scenario("stationary_10m.toml"),
        "--out",
        sim.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    // the bundled files are the simulation's own output
    assert_eq!(
        read(&sim, "reference.qtt"),
        std::fs::read(scenario("data/stationary_10m.reference.qtt")).unwrap()
    );
    let o = qradar(&[
        "correlate",
        "--scenario",
        &scenario("stationary_10m.toml"),
        "--ref",
        &scenario("data/stationary_10m.reference.qtt"),
        "--recv",
        &scenario("data/stationary_10m.received.qtt"),
        "--out",
        cor.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&sim, "correlogram.bin"), read(&cor, "correlogram.bin"));
    let peak = |dir: &Path| {
        let v: serde_json::Value = serde_json::from_slice(&read(dir, "report.json")).unwrap();
        (v["delay_ps"].clone(), v["significance"].clone(), v["range_m"].clone())
    };
    assert_eq!(peak(&sim), peak(&cor));
}

#[test]
fn decoy_and_target_classifications() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, label) in [
        ("decoy_vs_target/decoy.toml", "Decoy"),
        ("decoy_vs_target/target.toml", "Target"),
    ] {
        let out = tmp.path().join(label);
        let o = qradar(&["simulate", &scenario(name), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&read(&out, "report.json")).unwrap();
        assert_eq!(v["classification"], label);
    }
}

#[test]
fn no_detection_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("stationary_10m.toml"))
        .unwrap()
        .replace("absorptivity = 0.87", "absorptivity = 1.0");
    let path = tmp.path().join("dark.toml");
    std::fs::write(&path, text).unwrap();
    let o = qradar(&[
        "simulate",
        path.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&read(&tmp.path().join("o"), "report.json")).unwrap();
    assert_eq!(v["detected"], false);
}

#[test]
fn schema_errors_exit_with_one_and_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("stationary_10m.toml"))
        .unwrap()
        .replace("tau_step_ps = 81\n", "tau_step_ps = -81\n");
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = qradar(&[
        "simulate",
        path.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid.tau_step_ps"), "{err}");
}

#[test]
fn relativity_at_mach_eight() {
    let o = qradar(&["relativity", "--v", "2722"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("gamma - 1     4.12"), "{s}");
    assert!(s.contains("0.0412 ns"), "{s}");
}

#[test]
fn jam_table_doubles_each_row() {
    let o = qradar(&["jam-table", "--m-max", "3"]);
    assert!(o.status.success());
    let rows: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows, vec![1.0, 2.0, 4.0, 8.0]);
}

#[test]
fn fit_range_recovers_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("x_mm,rate\n");
    for x in [1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0] {
        csv.push_str(&format!("{x},{}\n", 78.0 + 75.14 / (x * x)));
    }
    let path = tmp.path().join("rates.csv");
    std::fs::write(&path, csv).unwrap();
    let o = qradar(&[
        "fit-range",
        path.to_str().unwrap(),
        "--pair-rate",
        "4e6",
        "--reference-rate",
        "1e6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("a         75.140000"), "{s}");
    assert!(s.contains("b         78.000000"), "{s}");
    // sqrt(75.14 * 4) mm
    assert!(s.contains("max_range 17.3 mm"), "{s}");
}
