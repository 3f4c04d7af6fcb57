use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwscatter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn field(row: &[String], i: usize) -> f64 {
    row[i].parse().unwrap()
}

#[test]
fn identity_stationary_norms_are_one() {
    let out = run(&["stationary", "--coin", "identity", "--M", "2", "--k", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.len(), 4);
    for row in &r {
        assert_eq!(field(row, 6), 1.0);
    }
}

#[test]
fn hadamard_stationary_two_routes() {
    let out = run(&[
        "stationary",
        "--coin",
        "hadamard",
        "--M",
        "3",
        "--k",
        "1.5707963",
        "--route",
        "closed,solve",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.iter().filter(|row| row[0] == "closed").count(), 3);
    assert_eq!(r.iter().filter(|row| row[0] == "solve").count(), 3);
    let text = String::from_utf8_lossy(&out.stdout);
    let dev: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# max_deviation="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev < 1e-10);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["stationary", "--coin", "hadamard", "--k", "0"][..],
        &["sweep", "--M", "2", "--k-grid", "0:1:0"][..],
        &["moments", "--M", "1", "--m", "5"][..],
        &["sweep", "--coin", "pauli", "--M", "2", "--k", "0"][..],
        &[
            "sweep",
            "--coin-entries",
            "1,0,1,0,0,0,1,0",
            "--M",
            "2",
            "--k",
            "0",
        ][..],
        &["sweep", "--M", "2", "--k", "0", "--k-grid", "0:1:4"][..],
        &["sweep", "--M", "4", "--design", "5,1"][..],
        &["spectrum", "--M", "5000"][..],
        &["frobnicate"][..],
    ] {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn zero_transmission_is_a_numerical_failure() {
    let out = run(&[
        "sweep",
        "--coin-entries",
        "0,0,1,0,1,0,0,0",
        "--M",
        "2",
        "--k",
        "0.3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_rows_are_unitary() {
    let out = run(&[
        "sweep",
        "--coin",
        "hadamard",
        "--M",
        "2",
        "--k-grid",
        "0:2pi:256",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.len(), 256);
    for row in &r {
        assert_eq!(row.len(), 11);
        assert!((field(row, 3) + field(row, 4) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn design_sweep_appends_exponent() {
    let out = run(&[
        "sweep",
        "--coin",
        "hadamard",
        "--M-range",
        "16:128:2",
        "--design",
        "1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&out).len(), 4);
    let text = String::from_utf8_lossy(&out.stdout);
    let exponent: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# exponent="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent - 3.0).abs() < 0.1);
}

#[test]
fn moments_routes_agree() {
    let out = run(&["moments", "--coin", "hadamard", "--M", "1", "--m", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    let total: f64 = r.iter().map(|row| field(row, 2)).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for row in &r {
        assert!(field(row, 4) <= 1e-8);
    }
}

#[test]
fn identity_never_exits_left() {
    let out = run(&["moments", "--coin", "identity", "--M", "3", "--m", "0,1,2"]);
    assert_eq!(out.status.code(), Some(0));
    for row in rows(&out).iter().filter(|r| r[0] == "left") {
        assert_eq!(field(row, 2), 0.0);
        assert_eq!(field(row, 3).abs(), 0.0);
    }
}

#[test]
fn spectrum_is_contractive() {
    let out = run(&["spectrum", "--coin", "rotation:0.4", "--M", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&out);
    assert_eq!(r.len(), 12);
    assert!(r.iter().all(|row| field(row, 3) < 1.0));
}

#[test]
fn check_passes_for_hadamard() {
    let out = run(&[
        "check",
        "--coin",
        "hadamard",
        "--M-range",
        "1:4:+1",
        "--k-grid",
        "0:2pi:16",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(rows(&out).iter().all(|row| row[4] != "FAIL"));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qwscatter-cli-{}.csv", std::process::id()));
    let out = run(&[
        "sweep",
        "--M",
        "3",
        "--k",
        "pi/3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("M,k,regime,T,R"));
    std::fs::remove_file(path).ok();
}
