//! Total rotation of the field gradient over a space-time box and the
//! a-priori bound on it from the gradient rotation rate and the isoline
//! curvatures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characteristics::char_set;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{wrap_angle, Point2};
use crate::numeric::adaptive_simpson;

/// `Δ × C`: a time interval times a convex polygon (counter-clockwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBox {
    pub t_range: (f64, f64),
    pub region: Vec<Point2>,
}

impl SpaceTimeBox {
    pub fn new(t_range: (f64, f64), region: Vec<Point2>) -> Result<Self> {
        let b = SpaceTimeBox { t_range, region };
        b.validate()?;
        Ok(b)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(t_range: (f64, f64), x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        Self::new(
            t_range,
            vec![
                Point2::new(x.0, y.0),
                Point2::new(x.1, y.0),
                Point2::new(x.1, y.1),
                Point2::new(x.0, y.1),
            ],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.t_range;
        if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
            return Err(Error::InvalidRegion(format!("empty time range [{t0}, {t1}]")));
        }
        let n = self.region.len();
        if n < 3 {
            return Err(Error::InvalidRegion(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if self.region.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidRegion("non-finite vertex".into()));
        }
        for i in 0..n {
            let a = self.region[i];
            let b = self.region[(i + 1) % n];
            let c = self.region[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::InvalidRegion(format!(
                    "polygon is not strictly convex and counter-clockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(())
    }

    pub fn interval_len(&self) -> f64 {
        self.t_range.1 - self.t_range.0
    }

    /// Largest vertex-to-vertex distance (the polygon's diameter).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.region.iter().enumerate() {
            for b in &self.region[i + 1..] {
                d = d.max(a.distance(*b));
            }
        }
        d
    }

    pub fn contains(&self, p: Point2) -> bool {
        let n = self.region.len();
        let scale = self.diameter().max(1e-300);
        (0..n).all(|i| {
            let a = self.region[i];
            let b = self.region[(i + 1) % n];
            (b - a).cross(p - a) >= -1e-12 * scale * scale
        })
    }

    fn bbox(&self) -> (Point2, Point2) {
        let mut lo = self.region[0];
        let mut hi = self.region[0];
        for p in &self.region {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Raster of the polygon: interior nodes of an `n × n` bounding-box
    /// grid plus `n` points per edge. Grids with `n − 1` doubled are nested.
    pub fn raster(&self, n: usize) -> Vec<Point2> {
        let n = n.max(2);
        let (lo, hi) = self.bbox();
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let u = i as f64 / (n - 1) as f64;
                let w = j as f64 / (n - 1) as f64;
                let p = Point2::new(lo.x + u * (hi.x - lo.x), lo.y + w * (hi.y - lo.y));
                if self.contains(p) {
                    pts.push(p);
                }
            }
        }
        let m = self.region.len();
        for k in 0..m {
            let a = self.region[k];
            let b = self.region[(k + 1) % m];
            for i in 0..n - 1 {
                pts.push(a + (b - a) * (i as f64 / (n - 1) as f64));
            }
        }
        pts
    }

    pub fn times(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let (t0, t1) = self.t_range;
        (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect()
    }

    /// Uniform sample of `Δ × C` (rejection from the bounding box).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> (f64, Point2) {
        let (lo, hi) = self.bbox();
        let t = rng.gen_range(self.t_range.0..=self.t_range.1);
        loop {
            let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
            if self.contains(p) {
                return (t, p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationBoundReport {
    pub sup_omega_grad: f64,
    /// Grid maximum of `√(κ² + τ_ρ²)`.
    pub sup_curv_mix: f64,
    pub interval_len: f64,
    pub diameter: f64,
    /// `sup|ω∇|·|Δ| + sup√(κ² + τ_ρ²)·diam C` from raw grid maxima.
    pub bound: f64,
    /// `bound` with both suprema inflated by 5% against grid under-sampling.
    pub guarded_bound: f64,
    pub empirical_max: f64,
    /// `bound − empirical_max`.
    pub margin: f64,
    /// Largest disagreement between the two rotation evaluations.
    pub max_path_discrepancy: f64,
    pub pairs: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationBoundOptions {
    /// Nodes per axis (time and both space directions).
    pub grid: usize,
    /// Regularity threshold; nodes with `‖∇D‖ < 10·eps` are rejected.
    pub eps: Option<f64>,
    /// Random endpoint pairs in addition to all corner pairs.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for RotationBoundOptions {
    fn default() -> Self {
        RotationBoundOptions {
            grid: 17,
            eps: None,
            pairs: 500,
            seed: 0,
        }
    }
}

pub const SUPREMUM_INFLATION: f64 = 1.05;

/// Bound on the gradient rotation over `bx`, with default options at the
/// given grid resolution.
pub fn rotation_bound(field: &FieldSpec, bx: &SpaceTimeBox, grid: usize) -> Result<RotationBoundReport> {
    rotation_bound_with(
        field,
        bx,
        &RotationBoundOptions {
            grid,
            ..Default::default()
        },
    )
}

/// Grid suprema `(sup|ω∇|, sup√(κ² + τ_ρ²))` over `grid³` nodes.
pub fn grid_suprema(field: &FieldSpec, bx: &SpaceTimeBox, grid: usize, eps: f64) -> Result<(f64, f64)> {
    let threshold = 10.0 * eps;
    let pts = bx.raster(grid);
    let mut sw: f64 = 0.0;
    let mut sk: f64 = 0.0;
    for t in bx.times(grid) {
        for &r in &pts {
            let jet = field.jet(t, r);
            let g = jet.grad.norm();
            if !(g >= threshold) {
                return Err(Error::DegenerateRegion {
                    t,
                    r,
                    grad_norm: g,
                    threshold,
                });
            }
            let c = char_set(&jet).map_err(|e| e.at(t, r))?;
            sw = sw.max(c.omega_grad.abs());
            sk = sk.max(c.kappa.hypot(c.tau_rho));
        }
    }
    Ok((sw, sk))
}

pub fn rotation_bound_with(
    field: &FieldSpec,
    bx: &SpaceTimeBox,
    opts: &RotationBoundOptions,
) -> Result<RotationBoundReport> {
    bx.validate()?;
    if opts.grid < 8 {
        return Err(Error::InvalidSettings(format!(
            "rotation grid needs at least 8 nodes per axis, got {}",
            opts.grid
        )));
    }
    let eps = opts.eps.unwrap_or_else(|| field.default_regularity_eps());
    let (sw, sk) = grid_suprema(field, bx, opts.grid, eps)?;
    let len = bx.interval_len();
    let diam = bx.diameter();
    let bound = sw * len + sk * diam;
    let guarded_bound = SUPREMUM_INFLATION * bound;

    let (t0, t1) = bx.t_range;
    let mut corners = Vec::new();
    for &t in &[t0, t1] {
        for &r in &bx.region {
            corners.push((t, r));
        }
    }
    let mut endpoints = Vec::new();
    for &a in &corners {
        for &b in &corners {
            endpoints.push((a, b));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.pairs {
        endpoints.push((bx.sample(&mut rng), bx.sample(&mut rng)));
    }
    let mut empirical: f64 = 0.0;
    let mut discrepancy: f64 = 0.0;
    for &(p0, p1) in &endpoints {
        let e = rotation_evaluations(field, p0, p1)?;
        empirical = empirical.max(e.integrated.abs());
        discrepancy = discrepancy.max((e.integrated - e.tracked).abs());
    }
    Ok(RotationBoundReport {
        sup_omega_grad: sw,
        sup_curv_mix: sk,
        interval_len: len,
        diameter: diam,
        bound,
        guarded_bound,
        empirical_max: empirical,
        margin: bound - empirical,
        max_path_discrepancy: discrepancy,
        pairs: endpoints.len(),
        grid: opts.grid,
    })
}

/// The gradient rotation between two space-time points, computed two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEvaluations {
    /// Quadrature of the orientation-rate formulas along the path.
    pub integrated: f64,
    /// Unwrapped `atan2` tracking of `∇D` along the same path.
    pub tracked: f64,
}

const QUAD_TOL: f64 = 1e-8;
const TRACK_STEPS: usize = 4096;

/// Signed rotation of `∇D` along the path from `(t0, r0)` that first moves
/// in time at `r0`, then along the segment `r0 → r1` at `t1`.
pub fn gradient_rotation(field: &FieldSpec, p0: (f64, Point2), p1: (f64, Point2)) -> Result<f64> {
    Ok(rotation_evaluations(field, p0, p1)?.integrated)
}

pub fn rotation_evaluations(
    field: &FieldSpec,
    p0: (f64, Point2),
    p1: (f64, Point2),
) -> Result<RotationEvaluations> {
    let (t0, r0) = p0;
    let (t1, r1) = p1;
    let path = |s: f64| -> (f64, Point2) {
        // s ∈ [0, 1]: time leg, s ∈ [1, 2]: spatial leg
        if s <= 1.0 {
            (t0 + (t1 - t0) * s, r0)
        } else {
            (t1, r0 + (r1 - r0) * (s - 1.0))
        }
    };

    // tracking first: it also certifies regularity along the path
    let mut tracked = 0.0;
    let mut prev = None;
    for leg in 0..2 {
        for k in 0..=TRACK_STEPS {
            let s = leg as f64 + k as f64 / TRACK_STEPS as f64;
            let (t, r) = path(s);
            let g = field.jet(t, r).grad;
            if !(g.norm() > 0.0) || !g.is_finite() {
                return Err(Error::Degenerate { at: Some((t, r)) });
            }
            let a = g.angle();
            if let Some(p) = prev {
                tracked += wrap_angle(a - p);
            }
            prev = Some(a);
        }
    }

    let du = r1 - r0;
    let time_rate = |s: f64| {
        let (t, r) = path(s);
        char_set(&field.jet(t, r)).map_or(0.0, |c| c.omega_grad * (t1 - t0))
    };
    let space_rate = |s: f64| {
        let (t, r) = path(1.0 + s);
        let jet = field.jet(t, r);
        match crate::characteristics::frenet(&jet) {
            Ok(fr) => {
                let c = char_set(&jet).expect("regular point");
                c.kappa * du.dot(fr.tangent) - c.tau_rho * du.dot(fr.normal)
            }
            Err(_) => 0.0,
        }
    };
    let integrated = if t1 != t0 { adaptive_simpson(&time_rate, 0.0, 1.0, QUAD_TOL) } else { 0.0 }
        + if du.norm() > 0.0 { adaptive_simpson(&space_rate, 0.0, 1.0, QUAD_TOL) } else { 0.0 };
    Ok(RotationEvaluations { integrated, tracked })
}
