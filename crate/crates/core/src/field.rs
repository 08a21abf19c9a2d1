//! Time-varying analytic scalar fields `D(t, r)` with exact second-order jets.
//!
//! Every family evaluates its jet from a closed form; nothing in here
//! differences the field internally. [`fd_jet2`] is the independent
//! finite-difference route used to cross-check those closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Sym2, Vec2};

/// Order-2 space-time jet of the field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldJet2 {
    pub value: f64,
    /// `∂D/∂t`
    pub dt: f64,
    /// `∂²D/∂t²`
    pub dtt: f64,
    /// Spatial gradient `∇D`.
    pub grad: Vec2,
    /// `∇(∂D/∂t)`
    pub grad_dt: Vec2,
    /// Spatial Hessian `D''`.
    pub hess: Sym2,
}

impl FieldJet2 {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.dt.is_finite()
            && self.dtt.is_finite()
            && self.grad.is_finite()
            && self.grad_dt.is_finite()
            && self.hess.is_finite()
    }
}

/// One isotropic Gaussian bump whose center follows
/// `c(t) = center + velocity·t + ½·acceleration·t²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: Point2,
    #[serde(default)]
    pub velocity: Vec2,
    #[serde(default)]
    pub acceleration: Vec2,
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

/// Catalog of analytic field families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FieldSpec {
    /// `D = ⟨a, r − v·t⟩`
    LinearDrift {
        gradient: Vec2,
        #[serde(default)]
        velocity: Vec2,
    },
    /// `D = ⟨a, r − v·t − ½·g·t²⟩`
    AcceleratingRamp {
        gradient: Vec2,
        #[serde(default)]
        velocity: Vec2,
        acceleration: Vec2,
    },
    /// `D = A·⟨e(Ω·t + φ₀), r − c⟩`
    RotatingLinear {
        rate: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        center: Point2,
    },
    /// `D = peak − k·‖r − c − v·t‖²`
    RadialParaboloid {
        #[serde(default)]
        peak: f64,
        #[serde(default = "one")]
        curvature: f64,
        #[serde(default)]
        center: Point2,
        #[serde(default)]
        velocity: Vec2,
    },
    /// Sum of drifting isotropic Gaussians.
    MovingGaussianSum { terms: Vec<GaussianTerm> },
    /// `D = A·exp(−½·sᵀ M(t) s)`, `s = r − c − v·t`, with `M(t)` the inverse
    /// covariance of principal widths `widths` rotated to angle `angle + rate·t`.
    RotatingAnisotropicGaussian {
        amplitude: f64,
        center: Point2,
        #[serde(default)]
        velocity: Vec2,
        widths: [f64; 2],
        #[serde(default)]
        angle: f64,
        rate: f64,
    },
}

impl FieldSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            FieldSpec::LinearDrift { .. } => "LinearDrift",
            FieldSpec::AcceleratingRamp { .. } => "AcceleratingRamp",
            FieldSpec::RotatingLinear { .. } => "RotatingLinear",
            FieldSpec::RadialParaboloid { .. } => "RadialParaboloid",
            FieldSpec::MovingGaussianSum { .. } => "MovingGaussianSum",
            FieldSpec::RotatingAnisotropicGaussian { .. } => "RotatingAnisotropicGaussian",
        }
    }

    /// Checks the family invariants (finite parameters, positive widths,
    /// non-empty Gaussian sums).
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, vals: &[f64]) -> Result<()> {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::InvalidField(format!("{name}: parameters must be finite")))
            }
        }
        let name = self.family_name();
        match self {
            FieldSpec::LinearDrift { gradient, velocity } => {
                finite(name, &[gradient.x, gradient.y, velocity.x, velocity.y])
            }
            FieldSpec::AcceleratingRamp {
                gradient,
                velocity,
                acceleration,
            } => finite(
                name,
                &[
                    gradient.x,
                    gradient.y,
                    velocity.x,
                    velocity.y,
                    acceleration.x,
                    acceleration.y,
                ],
            ),
            FieldSpec::RotatingLinear {
                rate,
                amplitude,
                phase,
                center,
            } => finite(name, &[*rate, *amplitude, *phase, center.x, center.y]),
            FieldSpec::RadialParaboloid {
                peak,
                curvature,
                center,
                velocity,
            } => {
                finite(
                    name,
                    &[*peak, *curvature, center.x, center.y, velocity.x, velocity.y],
                )?;
                if *curvature == 0.0 {
                    return Err(Error::InvalidField(
                        "RadialParaboloid: curvature must be nonzero".into(),
                    ));
                }
                Ok(())
            }
            FieldSpec::MovingGaussianSum { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidField(
                        "MovingGaussianSum: at least one term is required".into(),
                    ));
                }
                for (i, g) in terms.iter().enumerate() {
                    finite(
                        name,
                        &[
                            g.amplitude,
                            g.center.x,
                            g.center.y,
                            g.velocity.x,
                            g.velocity.y,
                            g.acceleration.x,
                            g.acceleration.y,
                            g.width,
                        ],
                    )?;
                    if g.width <= 0.0 {
                        return Err(Error::InvalidField(format!(
                            "MovingGaussianSum: term {i} has non-positive width {}",
                            g.width
                        )));
                    }
                }
                Ok(())
            }
            FieldSpec::RotatingAnisotropicGaussian {
                amplitude,
                center,
                velocity,
                widths,
                angle,
                rate,
            } => {
                finite(
                    name,
                    &[
                        *amplitude, center.x, center.y, velocity.x, velocity.y, widths[0],
                        widths[1], *angle, *rate,
                    ],
                )?;
                if widths[0] <= 0.0 || widths[1] <= 0.0 {
                    return Err(Error::InvalidField(
                        "RotatingAnisotropicGaussian: widths must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Field value `D(t, r)`.
    pub fn value(&self, t: f64, r: Point2) -> f64 {
        match self {
            FieldSpec::LinearDrift { gradient, velocity } => gradient.dot(r - *velocity * t),
            FieldSpec::AcceleratingRamp {
                gradient,
                velocity,
                acceleration,
            } => gradient.dot(r - *velocity * t - *acceleration * (0.5 * t * t)),
            FieldSpec::RotatingLinear {
                rate,
                amplitude,
                phase,
                center,
            } => amplitude * Vec2::from_angle(rate * t + phase).dot(r - *center),
            FieldSpec::RadialParaboloid {
                peak,
                curvature,
                center,
                velocity,
            } => peak - curvature * (r - *center - *velocity * t).norm_squared(),
            FieldSpec::MovingGaussianSum { terms } => terms
                .iter()
                .map(|g| {
                    let s = r - gaussian_center(g, t);
                    g.amplitude * (-s.norm_squared() / (2.0 * g.width * g.width)).exp()
                })
                .sum(),
            FieldSpec::RotatingAnisotropicGaussian {
                amplitude,
                center,
                velocity,
                widths,
                angle,
                rate,
            } => {
                let s = r - *center - *velocity * t;
                let m = inverse_covariance(*widths, angle + rate * t);
                amplitude * (-0.5 * m.form(s, s)).exp()
            }
        }
    }

    /// Exact closed-form order-2 jet.
    pub fn jet(&self, t: f64, r: Point2) -> FieldJet2 {
        match self {
            FieldSpec::LinearDrift { gradient, velocity } => FieldJet2 {
                value: self.value(t, r),
                dt: -gradient.dot(*velocity),
                dtt: 0.0,
                grad: *gradient,
                grad_dt: Vec2::ZERO,
                hess: Sym2::ZERO,
            },
            FieldSpec::AcceleratingRamp {
                gradient,
                velocity,
                acceleration,
            } => FieldJet2 {
                value: self.value(t, r),
                dt: -gradient.dot(*velocity + *acceleration * t),
                dtt: -gradient.dot(*acceleration),
                grad: *gradient,
                grad_dt: Vec2::ZERO,
                hess: Sym2::ZERO,
            },
            FieldSpec::RotatingLinear {
                rate,
                amplitude,
                phase,
                center,
            } => {
                let u = Vec2::from_angle(rate * t + phase);
                let s = r - *center;
                FieldJet2 {
                    value: self.value(t, r),
                    dt: amplitude * rate * u.rot_ccw().dot(s),
                    dtt: -amplitude * rate * rate * u.dot(s),
                    grad: u * *amplitude,
                    grad_dt: u.rot_ccw() * (amplitude * rate),
                    hess: Sym2::ZERO,
                }
            }
            FieldSpec::RadialParaboloid {
                curvature,
                center,
                velocity,
                ..
            } => {
                let k = *curvature;
                let s = r - *center - *velocity * t;
                FieldJet2 {
                    value: self.value(t, r),
                    dt: 2.0 * k * s.dot(*velocity),
                    dtt: -2.0 * k * velocity.norm_squared(),
                    grad: s * (-2.0 * k),
                    grad_dt: *velocity * (2.0 * k),
                    hess: Sym2::identity().scale(-2.0 * k),
                }
            }
            FieldSpec::MovingGaussianSum { terms } => {
                let mut jet = FieldJet2 {
                    value: 0.0,
                    dt: 0.0,
                    dtt: 0.0,
                    grad: Vec2::ZERO,
                    grad_dt: Vec2::ZERO,
                    hess: Sym2::ZERO,
                };
                for g in terms {
                    let sig2 = g.width * g.width;
                    let c = gaussian_center(g, t);
                    let c1 = g.velocity + g.acceleration * t;
                    let c2 = g.acceleration;
                    let s = r - c;
                    let val = g.amplitude * (-s.norm_squared() / (2.0 * sig2)).exp();
                    let sc = s.dot(c1) / sig2;
                    jet.value += val;
                    jet.dt += val * sc;
                    jet.dtt += val * (sc * sc + (s.dot(c2) - c1.norm_squared()) / sig2);
                    jet.grad += s * (-val / sig2);
                    jet.grad_dt += (c1 - s * sc) * (val / sig2);
                    jet.hess = jet.hess
                        + (Sym2::outer(s).scale(1.0 / (sig2 * sig2)) - Sym2::identity().scale(1.0 / sig2))
                            .scale(val);
                }
                jet
            }
            FieldSpec::RotatingAnisotropicGaussian {
                amplitude,
                center,
                velocity,
                widths,
                angle,
                rate,
            } => {
                let phi = angle + rate * t;
                let u = Vec2::from_angle(phi);
                let w = u.rot_ccw();
                let delta = 1.0 / (widths[0] * widths[0]) - 1.0 / (widths[1] * widths[1]);
                let m = inverse_covariance(*widths, phi);
                let m1 = Sym2::sym_outer(u, w).scale(rate * delta);
                let m2 = (Sym2::outer(w) - Sym2::outer(u)).scale(2.0 * rate * rate * delta);
                let v = *velocity;
                let s = r - *center - v * t;

                let q = 0.5 * m.form(s, s);
                let grad_q = m.apply(s);
                let q_t = 0.5 * m1.form(s, s) - grad_q.dot(v);
                let q_tt = 0.5 * m2.form(s, s) - 2.0 * m1.form(s, v) + m.form(v, v);
                let grad_q_t = m1.apply(s) - m.apply(v);

                let val = amplitude * (-q).exp();
                FieldJet2 {
                    value: val,
                    dt: -val * q_t,
                    dtt: val * (q_t * q_t - q_tt),
                    grad: grad_q * (-val),
                    grad_dt: (grad_q * q_t - grad_q_t) * val,
                    hess: (Sym2::outer(grad_q) - m).scale(val),
                }
            }
        }
    }

    /// Characteristic length of the field features (m).
    pub fn length_scale(&self) -> f64 {
        match self {
            FieldSpec::MovingGaussianSum { terms } => {
                terms.iter().map(|g| g.width).fold(f64::INFINITY, f64::min)
            }
            FieldSpec::RotatingAnisotropicGaussian { widths, .. } => widths[0].min(widths[1]),
            _ => 1.0,
        }
    }

    /// Typical gradient magnitude (field units per m).
    pub fn gradient_scale(&self) -> f64 {
        match self {
            FieldSpec::LinearDrift { gradient, .. } | FieldSpec::AcceleratingRamp { gradient, .. } => {
                gradient.norm()
            }
            FieldSpec::RotatingLinear { amplitude, .. } => amplitude.abs(),
            FieldSpec::RadialParaboloid { curvature, .. } => 2.0 * curvature.abs(),
            FieldSpec::MovingGaussianSum { terms } => terms
                .iter()
                .map(|g| g.amplitude.abs() / g.width * (-0.5f64).exp())
                .fold(0.0, f64::max),
            FieldSpec::RotatingAnisotropicGaussian {
                amplitude, widths, ..
            } => amplitude.abs() / widths[0].min(widths[1]) * (-0.5f64).exp(),
        }
    }

    /// Magnitude of field values over one length scale.
    pub fn value_scale(&self) -> f64 {
        let s = self.gradient_scale() * self.length_scale();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Default regularity threshold: `1e-3 ×` the typical gradient magnitude.
    pub fn default_regularity_eps(&self) -> f64 {
        let g = self.gradient_scale();
        if g > 0.0 {
            1e-3 * g
        } else {
            1e-3
        }
    }

    /// A square region `(center, half_width)` at `t = 0` where the field
    /// carries its structure; used to draw random probe points.
    pub fn sampling_region(&self) -> (Point2, f64) {
        match self {
            FieldSpec::LinearDrift { .. } | FieldSpec::AcceleratingRamp { .. } => (Vec2::ZERO, 2.0),
            FieldSpec::RotatingLinear { center, .. } => (*center, 2.0),
            FieldSpec::RadialParaboloid { center, .. } => (*center, 2.0),
            FieldSpec::MovingGaussianSum { terms } => {
                let n = terms.len() as f64;
                let mut c = Vec2::ZERO;
                for g in terms {
                    c += g.center * (1.0 / n);
                }
                let reach = terms
                    .iter()
                    .map(|g| g.center.distance(c) + 1.5 * g.width)
                    .fold(0.0, f64::max);
                (c, reach)
            }
            FieldSpec::RotatingAnisotropicGaussian { center, widths, .. } => {
                (*center, 1.5 * widths[0].max(widths[1]))
            }
        }
    }
}

fn gaussian_center(g: &GaussianTerm, t: f64) -> Point2 {
    g.center + g.velocity * t + g.acceleration * (0.5 * t * t)
}

fn inverse_covariance(widths: [f64; 2], phi: f64) -> Sym2 {
    let u = Vec2::from_angle(phi);
    let w = u.rot_ccw();
    Sym2::outer(u).scale(1.0 / (widths[0] * widths[0]))
        + Sym2::outer(w).scale(1.0 / (widths[1] * widths[1]))
}

/// A smooth time-varying scalar field with an exact order-2 jet.
///
/// [`FieldSpec`] is the catalog implementation; the oracles and campaign
/// code accept any implementor.
pub trait ScalarField {
    fn value(&self, t: f64, r: Point2) -> f64;
    fn jet(&self, t: f64, r: Point2) -> FieldJet2;
    fn length_scale(&self) -> f64 {
        1.0
    }
    fn value_scale(&self) -> f64 {
        1.0
    }
}

impl ScalarField for FieldSpec {
    fn value(&self, t: f64, r: Point2) -> f64 {
        FieldSpec::value(self, t, r)
    }
    fn jet(&self, t: f64, r: Point2) -> FieldJet2 {
        FieldSpec::jet(self, t, r)
    }
    fn length_scale(&self) -> f64 {
        FieldSpec::length_scale(self)
    }
    fn value_scale(&self) -> f64 {
        FieldSpec::value_scale(self)
    }
}

/// Exact jet of `field` at `(t, r)`.
pub fn eval_jet2(field: &FieldSpec, t: f64, r: Point2) -> FieldJet2 {
    field.jet(t, r)
}

/// Central-difference estimate of every jet entry, Richardson-extrapolated
/// over the step pair `h`, `h/2`.
pub fn fd_jet2<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, h: f64) -> Result<FieldJet2> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidSettings(format!("step must be positive, got {h}")));
    }
    let scale = 1f64.max(t.abs()).max(r.x.abs()).max(r.y.abs());
    let limit = 1e2 * f64::EPSILON * scale;
    if h < limit {
        return Err(Error::StepUnderflow { h, limit });
    }
    let f = |dt: f64, dx: f64, dy: f64| field.value(t + dt, Vec2::new(r.x + dx, r.y + dy));
    let f0 = f(0.0, 0.0, 0.0);

    // each stencil returns (first, second) derivative estimates along one axis
    let axis = |h: f64, e: [f64; 3]| {
        let p = f(h * e[0], h * e[1], h * e[2]);
        let m = f(-h * e[0], -h * e[1], -h * e[2]);
        ((p - m) / (2.0 * h), (p - 2.0 * f0 + m) / (h * h))
    };
    let mixed = |h: f64, a: [f64; 3], b: [f64; 3]| {
        let at = |sa: f64, sb: f64| {
            f(
                h * (sa * a[0] + sb * b[0]),
                h * (sa * a[1] + sb * b[1]),
                h * (sa * a[2] + sb * b[2]),
            )
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
    };
    let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;

    const T: [f64; 3] = [1.0, 0.0, 0.0];
    const X: [f64; 3] = [0.0, 1.0, 0.0];
    const Y: [f64; 3] = [0.0, 0.0, 1.0];
    let h2 = 0.5 * h;

    let (t1, t2) = axis(h, T);
    let (t1f, t2f) = axis(h2, T);
    let (x1, x2) = axis(h, X);
    let (x1f, x2f) = axis(h2, X);
    let (y1, y2) = axis(h, Y);
    let (y1f, y2f) = axis(h2, Y);

    let xy = rich(mixed(h, X, Y), mixed(h2, X, Y));
    let tx = rich(mixed(h, T, X), mixed(h2, T, X));
    let ty = rich(mixed(h, T, Y), mixed(h2, T, Y));

    Ok(FieldJet2 {
        value: f0,
        dt: rich(t1, t1f),
        dtt: rich(t2, t2f),
        grad: Vec2::new(rich(x1, x1f), rich(y1, y1f)),
        grad_dt: Vec2::new(tx, ty),
        hess: Sym2::new(rich(x2, x2f), xy, rich(y2, y2f)),
    })
}

/// Nondegeneracy test `‖∇D‖ ≥ eps`.
pub fn regularity(jet: &FieldJet2, eps: f64) -> bool {
    jet.grad.norm() >= eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_drift() -> FieldSpec {
        FieldSpec::LinearDrift {
            gradient: Vec2::new(0.0, 1.0),
            velocity: Vec2::new(0.0, 2.0),
        }
    }

    fn paraboloid() -> FieldSpec {
        FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
        }
    }

    #[test]
    fn linear_drift_jet() {
        let j = eval_jet2(&linear_drift(), 0.7, Vec2::new(-1.0, 3.0));
        assert_eq!(j.value, 3.0 - 1.4);
        assert_eq!(j.grad, Vec2::new(0.0, 1.0));
        assert_eq!(j.dt, -2.0);
        assert_eq!(j.hess, Sym2::ZERO);
        assert_eq!(j.grad_dt, Vec2::ZERO);
    }

    #[test]
    fn paraboloid_jet() {
        let j = eval_jet2(&paraboloid(), 0.0, Vec2::new(2.0, 0.0));
        assert_eq!(j.value, -4.0);
        assert_eq!(j.grad, Vec2::new(-4.0, 0.0));
        assert_eq!(j.hess, Sym2::new(-2.0, 0.0, -2.0));
        assert_eq!(j.dt, 0.0);
    }

    #[test]
    fn fd_linear_and_paraboloid() {
        let j = fd_jet2(&linear_drift(), 0.3, Vec2::new(0.5, -0.2), 1e-3).unwrap();
        assert!((j.grad - Vec2::new(0.0, 1.0)).norm() < 1e-10);
        assert!((j.dt + 2.0).abs() < 1e-10);
        let j = fd_jet2(&paraboloid(), 0.0, Vec2::new(2.0, 0.0), 1e-3).unwrap();
        assert!((j.hess.xx + 2.0).abs() < 1e-8);
        assert!((j.hess.yy + 2.0).abs() < 1e-8);
        assert!(j.hess.xy.abs() < 1e-8);
    }

    #[test]
    fn fd_rejects_tiny_step() {
        let err = fd_jet2(&paraboloid(), 0.0, Vec2::new(2.0, 0.0), 1e-15).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
        assert!(fd_jet2(&paraboloid(), 0.0, Vec2::ZERO, -1.0).is_err());
    }

    #[test]
    fn regularity_threshold() {
        let mut j = eval_jet2(&linear_drift(), 0.0, Vec2::ZERO);
        assert!(regularity(&j, 0.1));
        j.grad = Vec2::ZERO;
        assert!(!regularity(&j, 1e-300));
        let j = eval_jet2(&paraboloid(), 0.0, Vec2::ZERO);
        assert!(!regularity(&j, 1e-3));
    }

    #[test]
    fn validation_rejects_bad_gaussians() {
        let empty = FieldSpec::MovingGaussianSum { terms: vec![] };
        assert!(empty.validate().is_err());
        let bad = FieldSpec::RotatingAnisotropicGaussian {
            amplitude: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
            widths: [1.0, 0.0],
            angle: 0.0,
            rate: 0.1,
        };
        assert!(bad.validate().is_err());
    }
}
