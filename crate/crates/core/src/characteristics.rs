//! Frenet frame of the spatial isoline and the closed-form field
//! characteristics at a regular point, plus their first-order shift laws.
//!
//! Orientation convention: `N = ∇D/‖∇D‖` points uphill and `T` is `N`
//! rotated by −π/2, so the superlevel set lies on the left when travelling
//! along `T`. The signs of `ω`, `ω∇`, `τ_ρ` and the robot's `v_T` all
//! follow from this choice.

use crate::error::{Error, Result};
use crate::field::{FieldJet2, ScalarField};
use crate::geometry::{Point2, Vec2};

/// Unit tangent and unit normal of the isoline through a point. `[T, N]`
/// is right-handed: `N = T` rotated by +π/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub tangent: Vec2,
    pub normal: Vec2,
}

/// The nine isoline characteristics at one `(t, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharSet {
    /// Front velocity (m/s).
    pub lambda: f64,
    /// Isoline density `‖∇D‖`.
    pub rho: f64,
    /// Front acceleration (m/s²).
    pub alpha: f64,
    /// Angular velocity of the isoline following the front (rad/s).
    pub omega: f64,
    /// Signed curvature, positive on convexities of the superlevel set (1/m).
    pub kappa: f64,
    /// Angular velocity of the gradient at a fixed point (rad/s).
    pub omega_grad: f64,
    /// Proportional growth rate of the density along the front (1/s).
    pub v_rho: f64,
    /// Proportional growth rate of the density along `T` (1/m).
    pub tau_rho: f64,
    /// Proportional growth rate of the density along `N` (1/m).
    pub n_rho: f64,
}

impl CharSet {
    pub const NAMES: [&'static str; 9] = [
        "lambda",
        "rho",
        "alpha",
        "omega",
        "kappa",
        "omega_grad",
        "v_rho",
        "tau_rho",
        "n_rho",
    ];

    /// Values in the order of [`CharSet::NAMES`].
    pub fn values(&self) -> [f64; 9] {
        [
            self.lambda,
            self.rho,
            self.alpha,
            self.omega,
            self.kappa,
            self.omega_grad,
            self.v_rho,
            self.tau_rho,
            self.n_rho,
        ]
    }
}

fn grad_norm(jet: &FieldJet2) -> Option<f64> {
    let rho = jet.grad.norm();
    (rho > 0.0 && rho.is_finite()).then_some(rho)
}

/// Frame `N = ∇D/‖∇D‖`, `T = N` rotated by −π/2.
pub fn frenet(jet: &FieldJet2) -> Result<FrenetFrame> {
    let rho = grad_norm(jet).ok_or(Error::Degenerate { at: None })?;
    let normal = jet.grad * (1.0 / rho);
    Ok(FrenetFrame {
        tangent: normal.rot_cw(),
        normal,
    })
}

/// All nine characteristics from the closed forms.
pub fn char_set(jet: &FieldJet2) -> Result<CharSet> {
    let frame = frenet(jet)?;
    let (t, n) = (frame.tangent, frame.normal);
    let rho = jet.grad.norm();

    let lambda = -jet.dt / rho;
    // ∇D'_t + λ D'' N
    let w = jet.grad_dt + jet.hess.apply(n) * lambda;
    let v_rho = w.dot(n) / rho;
    let omega = -w.dot(t) / rho;
    let alpha = -(jet.dtt + lambda * jet.grad_dt.dot(n)) / rho - lambda * v_rho;
    let kappa = -jet.hess.form(t, t) / rho;
    let omega_grad = -jet.grad_dt.dot(t) / rho;
    let tau_rho = jet.hess.form(n, t) / rho;
    let n_rho = jet.hess.form(n, n) / rho;

    Ok(CharSet {
        lambda,
        rho,
        alpha,
        omega,
        kappa,
        omega_grad,
        v_rho,
        tau_rho,
        n_rho,
    })
}

/// Frame of the field at `(t, r)`.
pub fn frenet_at<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2) -> Result<FrenetFrame> {
    frenet(&field.jet(t, r)).map_err(|e| e.at(t, r))
}

/// Characteristics of the field at `(t, r)`.
pub fn char_set_at<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2) -> Result<CharSet> {
    char_set(&field.jet(t, r)).map_err(|e| e.at(t, r))
}

/// Residuals of the two relations stated after the characteristics lemma:
/// `(ω − ω∇ + λτ_ρ, v_ρ + ω∇ − λn_ρ)`.
///
/// The first vanishes identically. The second does not hold in general
/// (a field rotating about a point is a counterexample) and is only
/// reported.
pub fn identity_residuals(c: &CharSet) -> (f64, f64) {
    (
        c.omega - c.omega_grad + c.lambda * c.tau_rho,
        c.v_rho + c.omega_grad - c.lambda * c.n_rho,
    )
}

/// Infinitesimal displacement along which a prediction is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    /// `(t, r) → (t, r + T·ds)`
    TangentialSpace,
    /// `(t, r) → (t, r + N·ds)`
    NormalSpace,
    /// `(t, r) → (t + ds, r₊(ds))`, following the moving front.
    TimeAlongFront,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 3] = [
        ShiftKind::TangentialSpace,
        ShiftKind::NormalSpace,
        ShiftKind::TimeAlongFront,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShiftKind::TangentialSpace => "tangential",
            ShiftKind::NormalSpace => "normal",
            ShiftKind::TimeAlongFront => "time",
        }
    }
}

/// First-order predictions of `λ`, `T` and `N` after a shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPrediction {
    pub lambda: f64,
    pub tangent: Vec2,
    pub normal: Vec2,
}

/// First-order shift laws. For [`ShiftKind::TimeAlongFront`] the `λ` law is
/// `λ + α·ds`, which is the definition of the front acceleration.
pub fn shift_predict(
    jet: &FieldJet2,
    c: &CharSet,
    kind: ShiftKind,
    ds: f64,
) -> Result<ShiftPrediction> {
    let FrenetFrame { tangent: t, normal: n } = frenet(jet)?;
    let p = match kind {
        ShiftKind::TangentialSpace => ShiftPrediction {
            lambda: c.lambda + c.omega * ds,
            tangent: t + n * (c.kappa * ds),
            normal: n - t * (c.kappa * ds),
        },
        ShiftKind::NormalSpace => ShiftPrediction {
            lambda: c.lambda - c.v_rho * ds,
            tangent: t - n * (c.tau_rho * ds),
            normal: n + t * (c.tau_rho * ds),
        },
        ShiftKind::TimeAlongFront => ShiftPrediction {
            lambda: c.lambda + c.alpha * ds,
            tangent: t + n * (c.omega * ds),
            normal: n - t * (c.omega * ds),
        },
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_jet2, FieldSpec};
    use crate::geometry::Sym2;

    fn jet_with_grad(g: Vec2) -> FieldJet2 {
        FieldJet2 {
            value: 0.0,
            dt: 0.0,
            dtt: 0.0,
            grad: g,
            grad_dt: Vec2::ZERO,
            hess: Sym2::ZERO,
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frame_examples() {
        let f = frenet(&jet_with_grad(Vec2::new(0.0, 1.0))).unwrap();
        assert_eq!(f.normal, Vec2::new(0.0, 1.0));
        assert_eq!(f.tangent, Vec2::new(1.0, 0.0));

        let f = frenet(&jet_with_grad(Vec2::new(-4.0, 0.0))).unwrap();
        assert_eq!(f.normal, Vec2::new(-1.0, 0.0));
        assert_eq!(f.tangent, Vec2::new(0.0, 1.0));

        let f = frenet(&jet_with_grad(Vec2::new(1.0, 2.0))).unwrap();
        let s5 = 5f64.sqrt();
        assert!((f.normal - Vec2::new(1.0 / s5, 2.0 / s5)).norm() < 1e-15);
        assert!((f.tangent - Vec2::new(2.0 / s5, -1.0 / s5)).norm() < 1e-15);
        // right-handed pair
        assert!((f.tangent.rot_ccw() - f.normal).norm() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_degenerate() {
        let j = jet_with_grad(Vec2::ZERO);
        assert!(matches!(frenet(&j), Err(Error::Degenerate { .. })));
        assert!(matches!(char_set(&j), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn accelerating_ramp_characteristics() {
        let field = FieldSpec::AcceleratingRamp {
            gradient: Vec2::new(0.0, 1.0),
            velocity: Vec2::new(0.0, 2.0),
            acceleration: Vec2::new(0.0, 9.81),
        };
        let c = char_set(&eval_jet2(&field, 0.0, Vec2::new(0.4, -1.0))).unwrap();
        assert_eq!(c.lambda, 2.0);
        assert_eq!(c.alpha, 9.81);
        assert_eq!(c.rho, 1.0);
        for v in [c.omega, c.kappa, c.omega_grad, c.v_rho, c.tau_rho, c.n_rho] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn rotating_linear_characteristics() {
        let field = FieldSpec::RotatingLinear {
            rate: 0.7,
            amplitude: 1.0,
            phase: 0.0,
            center: Vec2::ZERO,
        };
        let c = char_set(&eval_jet2(&field, 0.0, Vec2::ZERO)).unwrap();
        assert_eq!(c.rho, 1.0);
        assert!(close(c.lambda, 0.0, 1e-15));
        assert!(close(c.omega_grad, 0.7, 1e-15));
        assert!(close(c.omega, 0.7, 1e-15));
        for v in [c.v_rho, c.tau_rho, c.n_rho, c.kappa, c.alpha] {
            assert!(close(v, 0.0, 1e-15));
        }
        let (first, second) = identity_residuals(&c);
        assert!(first.abs() <= 1e-12);
        assert!(close(second, 0.7, 1e-15));
    }

    #[test]
    fn paraboloid_characteristics() {
        let field = FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
        };
        let c = char_set(&eval_jet2(&field, 0.0, Vec2::new(2.0, 0.0))).unwrap();
        assert_eq!(c.rho, 4.0);
        assert_eq!(c.kappa, 0.5);
        assert_eq!(c.n_rho, -0.5);
        for v in [c.tau_rho, c.lambda, c.omega, c.omega_grad, c.v_rho, c.alpha] {
            assert_eq!(v, 0.0);
        }
        assert_eq!(identity_residuals(&c), (0.0, 0.0));
    }

    #[test]
    fn saddle_tau_rho() {
        // D = xy is a RotatingAnisotropicGaussian-free saddle; build the jet by hand
        let r = Vec2::new(2.0, 1.0);
        let jet = FieldJet2 {
            value: r.x * r.y,
            dt: 0.0,
            dtt: 0.0,
            grad: Vec2::new(r.y, r.x),
            grad_dt: Vec2::ZERO,
            hess: Sym2::new(0.0, 1.0, 0.0),
        };
        let c = char_set(&jet).unwrap();
        let expected = 3.0 / (5.0 * 5f64.sqrt());
        assert!(close(c.tau_rho, expected, 1e-15));
    }

    #[test]
    fn rho_is_gradient_norm() {
        let field = FieldSpec::RotatingAnisotropicGaussian {
            amplitude: 2.0,
            center: Vec2::new(0.1, -0.2),
            velocity: Vec2::new(0.3, 0.1),
            widths: [1.0, 0.6],
            angle: 0.3,
            rate: 0.5,
        };
        let jet = eval_jet2(&field, 0.4, Vec2::new(0.5, 0.4));
        let c = char_set(&jet).unwrap();
        assert_eq!(c.rho, jet.grad.norm());
    }

    #[test]
    fn shift_examples() {
        let field = FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
        };
        let jet = eval_jet2(&field, 0.0, Vec2::new(2.0, 0.0));
        let c = char_set(&jet).unwrap();
        let p = shift_predict(&jet, &c, ShiftKind::TangentialSpace, 0.1).unwrap();
        let f = frenet(&jet).unwrap();
        assert!((p.normal - (f.normal - f.tangent * 0.05)).norm() < 1e-15);
        // static field: v_rho = 0 keeps lambda
        let p = shift_predict(&jet, &c, ShiftKind::NormalSpace, 0.3).unwrap();
        assert_eq!(p.lambda, c.lambda);
    }

    #[test]
    fn rotating_linear_time_shift() {
        let field = FieldSpec::RotatingLinear {
            rate: 0.7,
            amplitude: 1.0,
            phase: 0.0,
            center: Vec2::ZERO,
        };
        let jet = eval_jet2(&field, 0.0, Vec2::ZERO);
        let c = char_set(&jet).unwrap();
        let ds = 0.01;
        let p = shift_predict(&jet, &c, ShiftKind::TimeAlongFront, ds).unwrap();
        let f = frenet(&jet).unwrap();
        let turned = crate::geometry::signed_angle(f.normal, p.normal);
        assert!((turned - (0.007f64).atan()).abs() < 1e-15);
        // the front stays at the origin (λ = 0), so the exact frame is at (ds, 0)
        let exact = frenet(&eval_jet2(&field, ds, Vec2::ZERO)).unwrap();
        assert!((crate::geometry::signed_angle(f.normal, exact.normal) - 0.007).abs() < 1e-15);
        assert!((p.normal - exact.normal).norm() <= 0.7 * 0.7 * ds * ds);
    }
}
