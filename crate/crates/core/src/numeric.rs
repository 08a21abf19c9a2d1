//! Small numerical kernels shared by the oracles, the integrator checks and
//! the domain analysis: Richardson tableaux, bracketed line searches,
//! adaptive Simpson quadrature and convergence-order fits.

use crate::error::{Error, Result};

/// Richardson extrapolation of estimates taken at steps `h, h/2, h/4, …`
/// whose error expands in even powers of `h` (central quotients).
///
/// Returns the fully extrapolated diagonal entry. Fails with
/// [`Error::OracleUnstable`] when the diagonal corrections grow instead of
/// shrinking.
pub fn richardson_even(estimates: &[f64]) -> Result<f64> {
    assert!(!estimates.is_empty());
    let mut prev_row: Vec<f64> = Vec::new();
    let mut diag = Vec::with_capacity(estimates.len());
    for &est in estimates {
        let mut row = vec![est];
        for j in 1..=prev_row.len() {
            let factor = 4f64.powi(j as i32);
            let v = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        diag.push(*row.last().unwrap());
        prev_row = row;
    }
    let value = *diag.last().unwrap();
    if diag.len() >= 3 {
        let k = diag.len() - 1;
        let last = (diag[k] - diag[k - 1]).abs();
        let before = (diag[k - 1] - diag[k - 2]).abs();
        if last > 2.0 * before && last > 1e-9 * (1.0 + value.abs()) {
            return Err(Error::OracleUnstable { correction: last });
        }
    }
    if !value.is_finite() {
        return Err(Error::OracleUnstable { correction: f64::NAN });
    }
    Ok(value)
}

/// Parameters of a search for the root of a scalar function of a signed
/// offset along a line.
#[derive(Debug, Clone, Copy)]
pub struct LineSearch {
    pub initial_half_width: f64,
    pub max_half_width: f64,
    /// Absolute residual at which the refinement stops.
    pub residual_tol: f64,
    pub max_iter: usize,
}

/// Root found by [`nearest_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub offset: f64,
    /// More than one sign change was seen in the coarse scan.
    pub ambiguous: bool,
}

const SCAN_POINTS: usize = 64;

/// Root of `f` nearest to the origin. The bracket `[-P, P]` is scanned at
/// 64 intervals; `P` grows by ×4 from `initial_half_width` until a sign
/// change appears or `max_half_width` is exceeded. The sign-change
/// interval closest to zero is refined by Illinois regula falsi.
pub fn nearest_root<F: Fn(f64) -> f64>(f: F, search: &LineSearch) -> Result<Crossing> {
    let f0 = f(0.0);
    if f0 == 0.0 {
        return Ok(Crossing {
            offset: 0.0,
            ambiguous: false,
        });
    }
    let mut half = search.initial_half_width;
    loop {
        let step = 2.0 * half / SCAN_POINTS as f64;
        let xs: Vec<f64> = (0..=SCAN_POINTS)
            .map(|i| {
                if i == SCAN_POINTS / 2 {
                    0.0
                } else {
                    -half + step * i as f64
                }
            })
            .collect();
        let fs: Vec<f64> = xs
            .iter()
            .map(|&x| if x == 0.0 { f0 } else { f(x) })
            .collect();
        let mut best: Option<(f64, usize)> = None;
        let mut count = 0;
        for i in 0..SCAN_POINTS {
            if fs[i] == 0.0 {
                count += 1;
                let d = xs[i].abs();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
                continue;
            }
            if fs[i] * fs[i + 1] < 0.0 {
                count += 1;
                // secant estimate ranks intervals adjacent to the origin
                let est = xs[i] - fs[i] * (xs[i + 1] - xs[i]) / (fs[i + 1] - fs[i]);
                let d = est.abs();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
        }
        if let Some((_, i)) = best {
            let ambiguous = count > 1;
            if fs[i] == 0.0 {
                return Ok(Crossing {
                    offset: xs[i],
                    ambiguous,
                });
            }
            let offset = illinois(&f, xs[i], fs[i], xs[i + 1], fs[i + 1], search)?;
            return Ok(Crossing { offset, ambiguous });
        }
        if half >= search.max_half_width {
            return Err(Error::NoIntersection {
                max_half_width: half,
            });
        }
        half = (half * 4.0).min(search.max_half_width);
    }
}

fn illinois<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    search: &LineSearch,
) -> Result<f64> {
    let mut side = 0i8;
    let mut x = a;
    let mut fx = fa;
    // once the residual tolerance is met, a couple of extra steps take the
    // root to roundoff at negligible cost
    let mut polish: Option<u8> = None;
    let mut best = (f64::INFINITY, a);
    for _ in 0..search.max_iter {
        let x_new = (a * fb - b * fa) / (fb - fa);
        // bisection fallback if the secant point leaves the bracket
        let x_new = if x_new > a.min(b) && x_new < a.max(b) {
            x_new
        } else {
            0.5 * (a + b)
        };
        let converged_step = (x_new - x).abs() <= 4.0 * f64::EPSILON * x_new.abs().max(1e-300);
        x = x_new;
        fx = f(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx == 0.0 || converged_step {
            return Ok(best.1);
        }
        if fx.abs() <= search.residual_tol {
            match polish {
                None => polish = Some(2),
                Some(0) => return Ok(best.1),
                Some(k) => polish = Some(k - 1),
            }
        } else if polish.is_some() {
            return Ok(best.1);
        }
        if fx * fb > 0.0 {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok(best.1);
        }
    }
    if best.0 <= search.residual_tol {
        return Ok(best.1);
    }
    Err(Error::RootNotConverged {
        iterations: search.max_iter,
        residual: fx.abs(),
    })
}

const SIMPSON_MAX_DEPTH: u32 = 48;
/// Levels that are always subdivided, so that narrow features are not
/// missed by a lucky agreement of the coarsest estimates.
const SIMPSON_MIN_LEVELS: u32 = 4;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || (depth <= SIMPSON_MAX_DEPTH - SIMPSON_MIN_LEVELS && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Least-squares slope of `ln(err)` against `ln(step)`.
pub fn loglog_slope(steps: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(steps.len(), errors.len());
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_cancels_even_terms() {
        // f(h) = 1 + h² + h⁴ is extrapolated to 1 exactly with two levels
        let est: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|h: &f64| 1.0 + h * h + h.powi(4))
            .collect();
        let v = richardson_even(&est).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn richardson_flags_divergence() {
        let est = [1.0, 1.0 + 1e-6, 1.0 - 1.0];
        assert!(matches!(
            richardson_even(&est),
            Err(Error::OracleUnstable { .. })
        ));
    }

    #[test]
    fn nearest_root_prefers_origin_side() {
        // roots at -0.3 and 0.7
        let f = |x: f64| (x + 0.3) * (x - 0.7);
        let s = LineSearch {
            initial_half_width: 1.0,
            max_half_width: 10.0,
            residual_tol: 1e-15,
            max_iter: 100,
        };
        let c = nearest_root(f, &s).unwrap();
        assert!((c.offset + 0.3).abs() < 1e-14);
        assert!(c.ambiguous);
    }

    #[test]
    fn nearest_root_expands_bracket() {
        let f = |x: f64| x - 5.0;
        let s = LineSearch {
            initial_half_width: 0.01,
            max_half_width: 100.0,
            residual_tol: 1e-14,
            max_iter: 100,
        };
        let c = nearest_root(f, &s).unwrap();
        assert!((c.offset - 5.0).abs() < 1e-12);
        assert!(!c.ambiguous);
    }

    #[test]
    fn nearest_root_reports_missing_crossing() {
        let f = |x: f64| x * x + 1.0;
        let s = LineSearch {
            initial_half_width: 0.1,
            max_half_width: 2.0,
            residual_tol: 1e-14,
            max_iter: 100,
        };
        assert!(matches!(
            nearest_root(f, &s),
            Err(Error::NoIntersection { .. })
        ));
    }

    #[test]
    fn simpson_integrates_smooth_function() {
        let v = adaptive_simpson(&|x: f64| x.cos(), 0.0, 1.0, 1e-12);
        assert!((v - 1f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn slope_of_power_law() {
        let hs = [1e-1, 5e-2, 2.5e-2];
        let es: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((loglog_slope(&hs, &es) - 2.0).abs() < 1e-12);
    }
}
