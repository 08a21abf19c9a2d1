//! Isoline extraction at a frozen time by predictor–corrector marching.
//! Used for plotting only.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq)]
pub struct MarchSettings {
    pub step: f64,
    pub max_points: usize,
    /// Marching stops once a point leaves the square of this half-width
    /// around `center`.
    pub center: Point2,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isoline {
    pub level: f64,
    pub points: Vec<Point2>,
    pub closed: bool,
}

/// Newton projection of `p` onto `{D(t, ·) = level}` along the gradient.
pub fn project<F: ScalarField + ?Sized>(field: &F, t: f64, level: f64, mut p: Point2) -> Result<Point2> {
    let tol = 1e-14 * field.value_scale().max(level.abs()).max(1e-300);
    for _ in 0..60 {
        let jet = field.jet(t, p);
        let g2 = jet.grad.norm_squared();
        if !(g2 > 0.0) {
            return Err(Error::Degenerate { at: Some((t, p)) });
        }
        let res = jet.value - level;
        p -= jet.grad * (res / g2);
        if res.abs() <= tol {
            return Ok(p);
        }
    }
    let res = field.value(t, p) - level;
    if res.abs() <= 1e3 * tol {
        Ok(p)
    } else {
        Err(Error::RootNotConverged {
            iterations: 60,
            residual: res,
        })
    }
}

fn inside(s: &MarchSettings, p: Point2) -> bool {
    (p.x - s.center.x).abs() <= s.half_width && (p.y - s.center.y).abs() <= s.half_width
}

fn march<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    level: f64,
    start: Point2,
    sign: f64,
    s: &MarchSettings,
    budget: usize,
) -> Result<(Vec<Point2>, bool)> {
    let mut pts = Vec::new();
    let mut p = start;
    while pts.len() < budget {
        let g = field.jet(t, p).grad;
        let n = g.norm();
        if !(n > 0.0) {
            return Err(Error::Degenerate { at: Some((t, p)) });
        }
        // tangent with the superlevel set on the left
        let tan = (g * (1.0 / n)).rot_cw() * sign;
        let q = project(field, t, level, p + tan * s.step)?;
        if pts.len() >= 2 && q.distance(start) < 0.75 * s.step {
            return Ok((pts, true));
        }
        if !inside(s, q) {
            return Ok((pts, false));
        }
        pts.push(q);
        p = q;
    }
    Ok((pts, false))
}

/// Traces the isoline through the projection of `seed` in both directions.
pub fn trace<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    seed: Point2,
    settings: &MarchSettings,
) -> Result<Isoline> {
    if !(settings.step > 0.0 && settings.half_width > 0.0) {
        return Err(Error::InvalidSettings("marching step and window must be positive".into()));
    }
    let level = field.value(t, seed);
    let start = project(field, t, level, seed)?;
    let (fwd, closed) = march(field, t, level, start, 1.0, settings, settings.max_points)?;
    if closed {
        let mut points = vec![start];
        points.extend(fwd);
        return Ok(Isoline { level, points, closed });
    }
    let left = settings.max_points.saturating_sub(fwd.len());
    let (back, _) = march(field, t, level, start, -1.0, settings, left)?;
    let mut points: Vec<Point2> = back.into_iter().rev().collect();
    points.push(start);
    points.extend(fwd);
    Ok(Isoline { level, points, closed: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::geometry::Vec2;

    #[test]
    fn paraboloid_circle() {
        let f = FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
        };
        let s = MarchSettings {
            step: 1e-2,
            max_points: 10_000,
            center: Vec2::ZERO,
            half_width: 5.0,
        };
        let iso = trace(&f, 0.0, Vec2::new(2.0, 0.0), &s).unwrap();
        assert!(iso.closed);
        assert_eq!(iso.level, -4.0);
        assert!(iso.points.len() > 1000);
        for p in &iso.points {
            assert!((p.norm() - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn open_line_stops_at_window() {
        let f = FieldSpec::LinearDrift {
            gradient: Vec2::new(0.0, 1.0),
            velocity: Vec2::ZERO,
        };
        let s = MarchSettings {
            step: 0.1,
            max_points: 1000,
            center: Vec2::ZERO,
            half_width: 1.0,
        };
        let iso = trace(&f, 0.0, Vec2::new(0.0, 0.5), &s).unwrap();
        assert!(!iso.closed);
        assert!(iso.points.len() >= 19 && iso.points.len() <= 21);
        assert!(iso.points.iter().all(|p| (p.y - 0.5).abs() < 1e-14));
        // ordered left to right would be decreasing x for a gradient along +y
        assert!(iso.points.first().unwrap().x < iso.points.last().unwrap().x);
    }
}
