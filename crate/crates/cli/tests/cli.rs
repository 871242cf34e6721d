use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fuzzydep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzydep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn small_logistic(out: &Path) -> Output {
    fuzzydep(&[
        "--mode", "logistic", "--t", "300", "--k", "4", "--restarts", "1", "--realisations", "2", "--seed", "5",
        "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn identical_seeds_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(small_logistic(&a).status.success());
    assert!(small_logistic(&b).status.success());
    for file in ["m_schatten.csv", "m_rowvar.csv", "delta_schatten.csv", "delta_rowvar.csv"] {
        assert_eq!(fs::read_to_string(a.join(file)).unwrap(), fs::read_to_string(b.join(file)).unwrap(), "{file}");
    }
    // the reports differ only in the echoed output directory
    let without_dir = |dir: &Path| {
        let mut json: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap();
        json["summary"]["config"]["output_dir"].take();
        json
    };
    assert_eq!(without_dir(&a), without_dir(&b));
    // re-emission into the same directory overwrites with the same bytes
    let before = fs::read(a.join("report.json")).unwrap();
    assert!(small_logistic(&a).status.success());
    assert!(before == fs::read(a.join("report.json")).unwrap());
}

#[test]
fn report_json_is_versioned_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(small_logistic(dir.path()).status.success());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["summary"]["config"]["seed"], 5);
    assert_eq!(json["summary"]["config"]["mode"], "logistic");
    assert_eq!(json["report"]["variable_names"], serde_json::json!(["X", "Y"]));
    let header = fs::read_to_string(dir.path().join("delta_rowvar.csv")).unwrap();
    assert!(header.starts_with("from\\to,X,Y\n"));
}

#[test]
fn configuration_errors_exit_with_2() {
    for args in [
        vec!["--mode", "nonsense"],
        vec!["--mode", "logistic", "--k", "1"],
        vec!["--mode", "sde", "--realisations", "0"],
        vec!["--mode", "csv"],
        vec!["--mode", "logistic", "--unknown-flag"],
    ] {
        let out = fuzzydep(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn data_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "event,clock,player,px,py\n1,0.0,a1,not-a-number,0\n").unwrap();
    let schema = fixture("schema.json");
    let out = fuzzydep(&[
        "--mode", "csv", "--csv", bad.to_str().unwrap(), "--schema", schema.to_str().unwrap(),
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let missing = fuzzydep(&[
        "--mode", "csv", "--csv", dir.path().join("absent.csv").to_str().unwrap(), "--schema",
        schema.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn tracking_fixture_produces_antisymmetric_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = fuzzydep(&[
        "--mode", "csv", "--csv", fixture("tracking.csv").to_str().unwrap(), "--schema",
        fixture("schema.json").to_str().unwrap(), "--tau", "1,3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("delta_schatten.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["from\\to", "a1", "b1", "a2", "b2"]);
    for i in 1..5 {
        for j in 1..5 {
            let (a, b): (f64, f64) = (rows[i][j].parse().unwrap(), rows[j][i].parse().unwrap());
            assert_eq!(a, -b);
            assert!(a.abs() <= 1.0);
        }
    }
    // two attacking phases times two shifts
    assert_eq!(fs::read_dir(dir.path().join("scenarios")).unwrap().count(), 4);
}
