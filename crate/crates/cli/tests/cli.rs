use std::process::{Command, Output};

use noisecube::entcurve::binary_entropy;
use noisecube::harness::{make_family, FamilySpec, Scaled};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisecube")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data lines of a CSV artifact: skips the metadata comment and the header.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn curve_has_grid_plus_one_rows() {
    let out = run(&["curve", "--tau", "0.1", "--grid", "100"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# "));
    assert_eq!(text.lines().nth(1).unwrap(), "tau,p,alpha,beta");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 101);
    let beta0: f64 = rows[0][3].parse().unwrap();
    assert!((beta0 - binary_entropy(0.1).unwrap()).abs() < 1e-15);
    let last: Vec<f64> = rows[100].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(&last[1..], &[0.5, 1.0, 1.0]);
}

#[test]
fn default_curve_family_has_six_taus() {
    let rows = data_rows(&stdout(&run(&["curve", "--grid", "4"])));
    assert_eq!(rows.len(), 6 * 5);
}

#[test]
fn bounds_panel_ordering() {
    let out = run(&["bounds", "--tau", "0.02", "--beta-grid", "0.01"]);
    assert!(out.status.success());
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 99);
    let h = binary_entropy(0.02).unwrap();
    let mut compared = 0;
    for r in rows {
        let beta: f64 = r[1].parse().unwrap();
        if r[2].is_empty() {
            assert!(beta < h);
            continue;
        }
        let (opt, hyper, fourier): (f64, f64, f64) =
            (r[2].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap());
        if beta >= h + 0.01 && beta <= 0.99 + 1e-12 {
            assert!(opt <= hyper.min(fourier) + 1e-9, "beta {beta}");
            compared += 1;
        }
    }
    assert!(compared > 80);
}

#[test]
fn verify_tensor_passes() {
    let out = run(&["verify-tensor", "--n", "8", "--trials", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout(&out)).len(), 1000);
}

#[test]
fn identical_config_is_byte_identical() {
    for args in [
        &["verify-hyper", "--n", "6", "--trials", "50", "--seed", "3", "--random-rs"][..],
        &["verify-blowup", "--n", "10", "--trials", "40", "--seed", "9", "--format", "json"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
    let a = run(&["verify-tensor", "--n", "4", "--trials", "20", "--seed", "1"]);
    let b = run(&["verify-tensor", "--n", "4", "--trials", "20", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn json_envelope() {
    let out = run(&["curve", "--tau", "0.3", "--grid", "2", "--format", "json", "--seed", "11"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["seed"], 11);
    assert_eq!(doc["metadata"]["command"], "curve");
    assert_eq!(doc["metadata"]["config"]["grid"], 2);
    assert_eq!(doc["columns"], serde_json::json!(["tau", "p", "alpha", "beta"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);

    let out = run(&["worstcase", "--n", "2", "--theta", "1", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["rows"].as_array().unwrap().iter().any(|r| r[5].is_null()));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["curve", "--tau", "1.5"][..],
        &["verify-tensor", "--n", "40"][..],
        &["bounds", "--beta", "0.5", "--beta-grid", "0.1"][..],
        &["verify-tensor", "--tau", "0.1,0.2"][..],
        &["harness", "--family", "/nonexistent/grid.toml"][..],
        &["curve", "--no-such-flag"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = run(&["curve", "--tau=-1"]);
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["config_error"].as_str().unwrap().contains("tau"));
}

#[test]
fn bad_grid_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(&path, "version = 1\nn = [6]\ntau = [0.1]\n[[family]]\nkind = \"nope\"\n").unwrap();
    let out = run(&["harness", "--family", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn custom_grid_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(
        &path,
        "version = 7\nn = [6, 8]\ntau = [0.1]\n[[family]]\nkind = \"ball\"\nradius = 2\n",
    )
    .unwrap();
    let out = run(&["harness", "--family", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout(&out)).len(), 4);
}

#[test]
fn hex_set_files_round_trip_through_the_cli() {
    let set = make_family(&FamilySpec::Ball { center: 3, radius: Scaled::Absolute(3) }, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.hex");
    std::fs::write(&path, set.to_hex()).unwrap();
    assert_eq!(noisecube::CubeSet::from_hex(&std::fs::read_to_string(&path).unwrap()).unwrap(), set);

    let out = run(&["harness", "--set", path.to_str().unwrap(), "--tau", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&stdout(&out));
    assert_eq!(rows.len(), 2);
    let log2_b: f64 = rows[0][5].parse().unwrap();
    assert!((log2_b - (set.len() as f64).log2()).abs() < 1e-12);

    let out = run(&["verify-nazarov", "--set", path.to_str().unwrap(), "--tau", "0.1,0.25"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout(&out)).len(), 2);

    std::fs::write(&path, "n=3\nZZ\n").unwrap();
    assert_eq!(run(&["harness", "--set", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("self.csv");
    let out = run(&["wht-selftest", "--n", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rows = data_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn verification_suites_pass_at_small_scale() {
    for args in [
        &["verify-nazarov", "--n", "8"][..],
        &["verify-hyper", "--n", "6", "--trials", "100"][..],
        &["verify-concentration", "--n", "8", "--trials", "100"][..],
        &["verify-concentration", "--n", "4", "--tau-list", "0.1,0.5,0.7,0.9", "--trials", "5"][..],
        &["verify-blowup", "--n", "10", "--trials", "100"][..],
        &["harness", "--n", "8"][..],
        &["worstcase", "--n", "3"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
