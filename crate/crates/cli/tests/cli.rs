use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn isokin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isokin")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn export(name: &str, dir: &Path) {
    let o = isokin(&["export", "--scenario", scenario(name).to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn characteristics_of_the_paraboloid() {
    let p = scenario("paraboloid.toml");
    let o = isokin(&["characteristics", "--scenario", p.to_str().unwrap(), "--x", "2", "--y", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for line in ["kappa=0.5", "n_rho=-0.5", "rho=4", "tangent=(0, 1)", "normal=(-1, 0)"] {
        assert!(s.lines().any(|l| l == line), "{line} missing:\n{s}");
    }
}

#[test]
fn rotating_linear_origin_flags_the_second_relation() {
    let p = scenario("rotating_linear.toml");
    let o = isokin(&["characteristics", "--scenario", p.to_str().unwrap(), "--x", "0", "--y", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "omega=0.7"), "{s}");
    assert!(s.lines().any(|l| l == "residual(v_rho + omega_grad - lambda*n_rho)=0.7"), "{s}");
    assert!(s.lines().any(|l| l.starts_with("FLAG: v_rho")), "{s}");
    assert!(!s.contains("FLAG: omega"));
}

#[test]
fn critical_point_exits_with_two() {
    let p = scenario("paraboloid.toml");
    let o = isokin(&["characteristics", "--scenario", p.to_str().unwrap(), "--x", "0", "--y", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regularity hypothesis"));
}

#[test]
fn configuration_errors_exit_with_64() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[field]\nfamily = \"Plasma\"\n").unwrap();
    let o = isokin(&["export", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("Plasma") && msg.contains("line 2"), "{msg}");

    let p = scenario("paraboloid.toml");
    let o = isokin(&["verify", "--scenario", p.to_str().unwrap(), "--suite", "lemma9"]);
    assert_eq!(o.status.code(), Some(64));

    let o = isokin(&["verify", "--scenario", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));

    let o = isokin(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn unwritable_output_exits_with_73() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("f");
    std::fs::write(&file, "").unwrap();
    let p = scenario("linear_drift.toml");
    let out = file.join("x");
    let o = isokin(&["export", "--scenario", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(73));
}

#[test]
fn straight_run_reading_is_linear_in_time() {
    let tmp = tempfile::tempdir().unwrap();
    export("linear_drift.toml", tmp.path());
    let (header, rows) = read_csv(&tmp.path().join("trajectory.csv"));
    assert_eq!(
        header,
        ["t", "x", "y", "theta", "v", "d", "d_dot_formula", "d_ddot_formula", "d_dot_fd", "d_ddot_fd"]
    );
    let col = |r: &Vec<String>, k: usize| r[k].parse::<f64>().unwrap();
    let (t0, d0) = (col(&rows[0], 0), col(&rows[0], 5));
    let (t1, d1) = (col(&rows[rows.len() - 1], 0), col(&rows[rows.len() - 1], 5));
    let slope = (d1 - d0) / (t1 - t0);
    for r in &rows {
        assert!((col(r, 5) - (d0 + slope * (col(r, 0) - t0))).abs() < 1e-12);
        assert!((col(r, 6) - slope).abs() < 1e-12);
        assert!(col(r, 7).abs() < 1e-12);
    }
    // stencil needs two neighbours on each side
    assert!(rows[1][8].is_empty() && !rows[2][8].is_empty());
}

#[test]
fn paraboloid_isoline_is_the_circle_of_radius_two() {
    let tmp = tempfile::tempdir().unwrap();
    export("paraboloid.toml", tmp.path());
    let (header, rows) = read_csv(&tmp.path().join("isolines_0.csv"));
    assert_eq!(header[..3], ["x", "y", "level"]);
    let on_level: Vec<_> = rows.iter().filter(|r| r[2] == "-4").collect();
    assert!(on_level.len() > 500);
    for r in on_level {
        let (x, y): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!((x.hypot(y) - 2.0).abs() <= 1e-6);
    }
}

#[test]
fn chargrid_matches_the_characteristics_command() {
    let tmp = tempfile::tempdir().unwrap();
    export("default.toml", tmp.path());
    let (header, rows) = read_csv(&tmp.path().join("chargrid_1.5.csv"));
    assert_eq!(header.len(), 11);
    let p = scenario("default.toml");
    for r in [&rows[0], &rows[333], &rows[rows.len() - 1]] {
        let o = isokin(&["characteristics", "--scenario", p.to_str().unwrap(), "--t", "1.5", "--x", &r[0], "--y", &r[1]]);
        assert_eq!(o.status.code(), Some(0));
        let s = stdout(&o);
        for (name, value) in header[2..].iter().zip(&r[2..]) {
            let line = format!("{name}={value}");
            assert!(s.lines().any(|l| l == line), "{line} not in\n{s}");
        }
    }
}

#[test]
fn deviation_suite_records_the_quarter_turn_discrepancy() {
    let tmp = tempfile::tempdir().unwrap();
    let p = scenario("paraboloid.toml");
    let o = isokin(&[
        "verify",
        "--scenario",
        p.to_str().unwrap(),
        "--suite",
        "lemma4",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(report, stdout(&o));
    let line = report.lines().find(|l| l.contains("q-violation-quarter-turn")).unwrap();
    assert!(line.contains("[REPORT]") && line.contains("1.414213562373"), "{line}");
    assert!(report.contains("overall: PASS"));
    let (header, rows) = read_csv(&tmp.path().join("checks.csv"));
    assert_eq!(header, ["suite", "check", "status", "measured", "limit", "detail"]);
    assert!(rows.iter().all(|r| r[0] == "lemma4"));
}
