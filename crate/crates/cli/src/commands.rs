use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use isokin::isoline::{project, trace, MarchSettings};
use isokin::kinematics::{fd_reading_rates, integrate, reading_rate, Trajectory};
use isokin::suites::{run_campaign, Suite, SuiteReport};
use isokin::{char_set_at, frenet_at, identity_residuals, CharSet, FieldSpec, Point2};

use crate::output::{num, opt, prepare_dir, write_csv, write_text};
use crate::scenario::Scenario;
use crate::CliError;

/// Residuals above this are flagged in the characteristics printout.
const FLAG_RESIDUAL: f64 = 1e-9;

pub fn characteristics(sc: &Scenario, t: f64, x: f64, y: f64) -> Result<String, CliError> {
    let r = Point2::new(x, y);
    let c = char_set_at(&sc.field, t, r)?;
    let fr = frenet_at(&sc.field, t, r)?;
    let (res_omega, res_vrho) = identity_residuals(&c);

    let mut s = String::new();
    let _ = writeln!(s, "field={}", sc.field.family_name());
    let _ = writeln!(s, "t={}", num(t));
    let _ = writeln!(s, "x={}", num(x));
    let _ = writeln!(s, "y={}", num(y));
    for (name, v) in CharSet::NAMES.iter().zip(c.values()) {
        let _ = writeln!(s, "{name}={}", num(v));
    }
    let _ = writeln!(s, "tangent=({}, {})", num(fr.tangent.x), num(fr.tangent.y));
    let _ = writeln!(s, "normal=({}, {})", num(fr.normal.x), num(fr.normal.y));
    let _ = writeln!(s, "residual(omega - omega_grad + lambda*tau_rho)={}", num(res_omega));
    let _ = writeln!(s, "residual(v_rho + omega_grad - lambda*n_rho)={}", num(res_vrho));
    if res_omega.abs() > FLAG_RESIDUAL {
        let _ = writeln!(s, "FLAG: omega = omega_grad - lambda*tau_rho violated (residual {})", num(res_omega));
    }
    if res_vrho.abs() > FLAG_RESIDUAL {
        let _ = writeln!(
            s,
            "FLAG: v_rho = -omega_grad + lambda*n_rho does not hold here (residual {}); this relation is reported, not asserted",
            num(res_vrho)
        );
    }
    Ok(s)
}

pub struct VerifyOutcome {
    pub report: String,
    pub passed: bool,
}

pub fn verify(sc: &Scenario, suites: &[Suite], seed: u64, out: &Path) -> Result<VerifyOutcome, CliError> {
    prepare_dir(out)?;
    let cfg = sc.campaign(seed);
    let reports = run_campaign(suites, &cfg);
    let report = render_report(sc, seed, suites, &reports);
    let passed = reports.iter().all(SuiteReport::passed);

    write_text(&out.join("report.txt"), &report)?;

    let mut rows = Vec::new();
    for rep in &reports {
        for c in &rep.checks {
            rows.push(vec![
                rep.suite.name().to_string(),
                c.name.clone(),
                c.status().to_string(),
                num(c.measured),
                num(c.limit),
                c.detail.clone(),
            ]);
        }
    }
    write_csv(
        &out.join("checks.csv"),
        &["suite", "check", "status", "measured", "limit", "detail"],
        &rows,
    )?;

    let mut rows = Vec::new();
    for rep in &reports {
        for (label, b) in &rep.bounds {
            rows.push(vec![
                label.clone(),
                num(b.sup_omega_grad),
                num(b.sup_curv_mix),
                num(b.interval_len),
                num(b.diameter),
                num(b.bound),
                num(b.guarded_bound),
                num(b.empirical_max),
                num(b.margin),
                num(b.max_path_discrepancy),
                b.pairs.to_string(),
                b.grid.to_string(),
            ]);
        }
    }
    write_csv(
        &out.join("rotation_bounds.csv"),
        &[
            "box",
            "sup_omega_grad",
            "sup_curv_mix",
            "interval_len",
            "diameter",
            "bound",
            "guarded_bound",
            "empirical_max",
            "margin",
            "max_path_discrepancy",
            "pairs",
            "grid",
        ],
        &rows,
    )?;

    Ok(VerifyOutcome { report, passed })
}

fn render_report(sc: &Scenario, seed: u64, suites: &[Suite], reports: &[SuiteReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "isokin verification report");
    let _ = writeln!(s, "scenario field: {}", sc.field.family_name());
    let _ = writeln!(s, "seed: {seed}");
    let _ = writeln!(s, "suites: {}", suites.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s);
    for r in reports {
        s.push_str(&r.render());
        let _ = writeln!(s);
    }
    let all = reports.iter().flat_map(|r| &r.checks);
    let asserted = all.clone().filter(|c| c.asserted).count();
    let failed = all.clone().filter(|c| c.asserted && !c.passed).count();
    let reported = all.filter(|c| !c.asserted).count();
    let _ = writeln!(
        s,
        "summary: {asserted} asserted checks, {failed} failed, {reported} reported only"
    );
    for r in reports {
        let _ = writeln!(s, "  {:<11} {}", r.suite.name(), if r.passed() { "PASS" } else { "FAIL" });
    }
    let _ = writeln!(s, "overall: {}", if failed == 0 { "PASS" } else { "FAIL" });
    s
}

/// Writes `trajectory.csv` and, for each export time, `isolines_<t>.csv`
/// and `chargrid_<t>.csv`.
pub fn export(sc: &Scenario, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    prepare_dir(out)?;
    let mut written = Vec::new();

    let traj = integrate(&sc.field, sc.initial_state(), &sc.program(), sc.steering.dt)?;
    written.push(write_csv(
        &out.join("trajectory.csv"),
        &[
            "t",
            "x",
            "y",
            "theta",
            "v",
            "d",
            "d_dot_formula",
            "d_ddot_formula",
            "d_dot_fd",
            "d_ddot_fd",
        ],
        &trajectory_rows(&traj, sc.robot.v_max),
    )?);

    let (center, half_width) = window(sc);
    let n = sc.export.grid;
    for &t in &sc.export.times {
        let rows = isoline_rows(&sc.field, t, center, half_width, n, sc.export.levels.as_deref());
        let mut header = vec!["x", "y", "level", "curve"];
        written.push(write_csv(&out.join(format!("isolines_{}.csv", num(t))), &header, &rows)?);

        header = vec!["x", "y"];
        header.extend(CharSet::NAMES);
        let rows = chargrid_rows(&sc.field, t, center, half_width, n);
        written.push(write_csv(&out.join(format!("chargrid_{}.csv", num(t))), &header, &rows)?);
    }
    Ok(written)
}

fn window(sc: &Scenario) -> (Point2, f64) {
    let (c, w) = sc.field.sampling_region();
    let c = sc.export.center.map(|p| Point2::new(p[0], p[1])).unwrap_or(c);
    (c, sc.export.half_width.unwrap_or(w))
}

fn grid_node(center: Point2, half_width: f64, n: usize, i: usize, j: usize) -> Point2 {
    let s = |k: usize| -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64;
    Point2::new(center.x + s(i), center.y + s(j))
}

fn trajectory_rows(traj: &Trajectory, v_max: f64) -> Vec<Vec<String>> {
    (0..traj.len())
        .map(|i| {
            let s = &traj.samples[i];
            let (d_dot, d_ddot) = match traj.reading_rates_at(i, v_max) {
                Ok(r) => (Some(r.d_dot), Some(r.d_ddot)),
                // below full speed only the first-derivative formula applies
                Err(isokin::Error::Contract(_)) => (reading_rate(&traj.field, s.t, &s.state).ok(), None),
                Err(_) => (None, None),
            };
            let fd = fd_reading_rates(traj, i).ok();
            vec![
                num(s.t),
                num(s.state.r.x),
                num(s.state.r.y),
                num(s.state.theta),
                num(s.state.v),
                num(s.d),
                opt(d_dot),
                opt(d_ddot),
                opt(fd.map(|p| p.0)),
                opt(fd.map(|p| p.1)),
            ]
        })
        .collect()
}

fn chargrid_rows(field: &FieldSpec, t: f64, center: Point2, half_width: f64, n: usize) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = grid_node(center, half_width, n, i, j);
            let mut row = vec![num(p.x), num(p.y)];
            match char_set_at(field, t, p) {
                Ok(c) => row.extend(c.values().map(num)),
                // critical point: characteristics undefined
                Err(_) => row.extend(std::iter::repeat_n(String::new(), 9)),
            }
            rows.push(row);
        }
    }
    rows
}

/// Evenly spaced levels strictly inside the range of the field on the grid.
fn default_levels(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Vec::new();
    }
    (1..=7).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect()
}

/// Seeds every isoline component that crosses a grid edge, traces it and
/// skips seeds lying on a component already traced.
fn isoline_rows(
    field: &FieldSpec,
    t: f64,
    center: Point2,
    half_width: f64,
    n: usize,
    levels: Option<&[f64]>,
) -> Vec<Vec<String>> {
    let step = 1e-2 * field.length_scale();
    let settings = MarchSettings {
        step,
        max_points: 200_000,
        center,
        half_width,
    };
    let nodes: Vec<Point2> = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| grid_node(center, half_width, n, i, j))
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&p| field.value(t, p)).collect();
    let levels = levels.map(<[f64]>::to_vec).unwrap_or_else(|| default_levels(&values));

    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let a = j * n + i;
            if i + 1 < n {
                edges.push((a, a + 1));
            }
            if j + 1 < n {
                edges.push((a, a + n));
            }
        }
    }

    let mut rows = Vec::new();
    let mut curve = 0usize;
    for &level in &levels {
        let mut traced: Vec<Vec<Point2>> = Vec::new();
        for &(a, b) in &edges {
            let (fa, fb) = (values[a] - level, values[b] - level);
            if fa == 0.0 && fb == 0.0 || (fa > 0.0) == (fb > 0.0) && fa != 0.0 && fb != 0.0 {
                continue;
            }
            let seed = bisect(field, t, level, nodes[a], nodes[b]);
            let Ok(seed) = project(field, t, level, seed) else {
                continue;
            };
            if traced.iter().flatten().any(|q| q.distance(seed) < 2.0 * step) {
                continue;
            }
            match trace(field, t, seed, &settings) {
                Ok(iso) => {
                    let mut pts = iso.points;
                    if iso.closed {
                        pts.push(pts[0]);
                    }
                    for p in &pts {
                        rows.push(vec![num(p.x), num(p.y), num(level), curve.to_string()]);
                    }
                    curve += 1;
                    traced.push(pts);
                }
                Err(e) => eprintln!("isokin: skipped isoline at level {level} through {seed:?}: {e}"),
            }
        }
    }
    rows
}

fn bisect(field: &FieldSpec, t: f64, level: f64, mut a: Point2, mut b: Point2) -> Point2 {
    let fa = field.value(t, a) - level;
    for _ in 0..60 {
        let m = (a + b) * 0.5;
        let fm = field.value(t, m) - level;
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    (a + b) * 0.5
}
