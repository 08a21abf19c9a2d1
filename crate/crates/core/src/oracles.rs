//! Limit-definition oracles for the isoline characteristics.
//!
//! Each oracle evaluates the defining limit directly: isoline displacements
//! come from root-finding along the normal axis of the frame at the base
//! point, rates from central difference quotients in the displacement
//! parameter, extrapolated by a Richardson tableau. Nothing here calls the
//! closed forms in [`crate::characteristics`] except the pointwise
//! relations `λ = −D'_t/‖∇D‖` and `ρ = ‖∇D‖` at displaced points, which
//! the λ and ρ oracles check on their own.

use serde::{Deserialize, Serialize};

use crate::characteristics::{CharSet, FrenetFrame};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{signed_angle, Point2, Vec2};
use crate::numeric::{nearest_root, richardson_even, Crossing, LineSearch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Initial step of the difference quotients.
    pub step: f64,
    /// Number of step halvings combined by Richardson extrapolation.
    pub richardson_levels: usize,
    /// Root-find residual tolerance, relative to the field value scale.
    pub root_tol: f64,
    pub max_iter: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            richardson_levels: 2,
            root_tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl OracleSettings {
    /// Defaults with the step scaled to the field's length scale.
    pub fn for_field<F: ScalarField + ?Sized>(field: &F) -> Self {
        Self {
            step: 1e-3 * field.length_scale(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "oracle step must be positive, got {}",
                self.step
            )));
        }
        if !(self.root_tol.is_finite() && self.root_tol > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "root_tol must be positive, got {}",
                self.root_tol
            )));
        }
        if self.richardson_levels < 1 {
            return Err(Error::InvalidSettings("richardson_levels must be >= 1".into()));
        }
        if self.max_iter < 8 {
            return Err(Error::InvalidSettings(format!(
                "max_iter must be >= 8, got {}",
                self.max_iter
            )));
        }
        Ok(())
    }
}

/// Quantities for which a limit-definition oracle exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Lambda,
    Rho,
    Alpha,
    Omega,
    Kappa,
    OmegaGrad,
    VRho,
    TauRho,
    NRho,
}

impl Quantity {
    /// Same order as [`CharSet::NAMES`].
    pub const ALL: [Quantity; 9] = [
        Quantity::Lambda,
        Quantity::Rho,
        Quantity::Alpha,
        Quantity::Omega,
        Quantity::Kappa,
        Quantity::OmegaGrad,
        Quantity::VRho,
        Quantity::TauRho,
        Quantity::NRho,
    ];

    pub fn name(self) -> &'static str {
        CharSet::NAMES[self as usize]
    }

    pub fn of(self, c: &CharSet) -> f64 {
        c.values()[self as usize]
    }
}

struct Base {
    t: f64,
    r: Point2,
    gamma: f64,
    rho: f64,
    frame: FrenetFrame,
}

fn base<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2) -> Result<Base> {
    let jet = field.jet(t, r);
    let frame = crate::characteristics::frenet(&jet).map_err(|e| e.at(t, r))?;
    Ok(Base {
        t,
        r,
        gamma: jet.value,
        rho: jet.grad.norm(),
        frame,
    })
}

fn search<F: ScalarField + ?Sized>(
    field: &F,
    settings: &OracleSettings,
    gamma: f64,
    initial: f64,
) -> LineSearch {
    let initial = if initial > 0.0 && initial.is_finite() {
        initial
    } else {
        settings.step
    };
    LineSearch {
        initial_half_width: initial,
        max_half_width: initial.max(10.0 * field.length_scale()),
        residual_tol: settings.root_tol * gamma.abs().max(field.value_scale()),
        max_iter: settings.max_iter,
    }
}

fn displacement_at<F: ScalarField + ?Sized>(
    field: &F,
    b: &Base,
    dt: f64,
    settings: &OracleSettings,
) -> Result<Crossing> {
    if dt == 0.0 {
        return Ok(Crossing {
            offset: 0.0,
            ambiguous: false,
        });
    }
    let n = b.frame.normal;
    let t1 = b.t + dt;
    // rough front speed from the value change at the fixed point sizes the bracket
    let lambda_est = (field.value(t1, b.r) - b.gamma).abs() / (dt.abs() * b.rho);
    let initial = 4.0 * dt.abs() * (lambda_est + 1.0);
    let s = search(field, settings, b.gamma, initial);
    nearest_root(|p| field.value(t1, b.r + n * p) - b.gamma, &s)
}

/// Signed normal displacement `p(dt | t, r)` of the isoline through
/// `(t, r)`: the root of `D(t + dt, r + p·N) = D(t, r)` nearest to zero.
pub fn front_displacement<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    r: Point2,
    dt: f64,
    settings: &OracleSettings,
) -> Result<Crossing> {
    let b = base(field, t, r)?;
    displacement_at(field, &b, dt, settings)
}

/// The point `r₊(dt | t, r)` where the isoline of level `D(t, r)` crosses
/// the normal axis at time `t + dt`.
pub fn front_point<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    r: Point2,
    dt: f64,
    settings: &OracleSettings,
) -> Result<Point2> {
    let b = base(field, t, r)?;
    let p = displacement_at(field, &b, dt, settings)?.offset;
    Ok(r + b.frame.normal * p)
}

fn lambda_pointwise<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2) -> Result<f64> {
    let j = field.jet(t, r);
    let rho = j.grad.norm();
    if rho > 0.0 {
        Ok(-j.dt / rho)
    } else {
        Err(Error::Degenerate { at: Some((t, r)) })
    }
}

fn tangent_pointwise<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2) -> Result<Vec2> {
    let j = field.jet(t, r);
    crate::characteristics::frenet(&j)
        .map(|f| f.tangent)
        .map_err(|e| e.at(t, r))
}

fn central<G: Fn(f64) -> Result<f64>>(g: G, h: f64) -> Result<f64> {
    Ok((g(h)? - g(-h)?) / (2.0 * h))
}

fn raw_with_base<F: ScalarField + ?Sized>(
    q: Quantity,
    field: &F,
    b: &Base,
    h: f64,
    settings: &OracleSettings,
) -> Result<f64> {
    let FrenetFrame {
        tangent: t0,
        normal: n0,
    } = b.frame;
    let front = |dt: f64| -> Result<Point2> {
        Ok(b.r + n0 * displacement_at(field, b, dt, settings)?.offset)
    };
    match q {
        Quantity::Lambda => central(|dt| Ok(displacement_at(field, b, dt, settings)?.offset), h),
        Quantity::Alpha => central(|dt| lambda_pointwise(field, b.t + dt, front(dt)?), h),
        Quantity::VRho => {
            let d = central(|dt| Ok(field.jet(b.t + dt, front(dt)?).grad.norm()), h)?;
            Ok(d / b.rho)
        }
        Quantity::Omega => central(
            |dt| {
                let t1 = tangent_pointwise(field, b.t + dt, front(dt)?)?;
                Ok(signed_angle(t0, t1))
            },
            h,
        ),
        Quantity::OmegaGrad => central(
            |dt| {
                let g = field.jet(b.t + dt, b.r).grad;
                Ok(signed_angle(n0, g))
            },
            h,
        ),
        Quantity::Rho => {
            // dq/dγ at γ is 1/ρ; the level step is sized by a probe along N
            let probe = settings.step;
            let slope = (field.value(b.t, b.r + n0 * probe) - b.gamma).abs() / probe;
            let dgamma = slope * h;
            if dgamma == 0.0 {
                return Err(Error::Degenerate {
                    at: Some((b.t, b.r)),
                });
            }
            let level_offset = |dg: f64| -> Result<f64> {
                let target = b.gamma + dg;
                let s = search(field, settings, target, 4.0 * h);
                Ok(nearest_root(|p| field.value(b.t, b.r + n0 * p) - target, &s)?.offset)
            };
            central(level_offset, dgamma)
        }
        Quantity::TauRho => central(
            |s| Ok(field.jet(b.t, b.r + t0 * s).grad.norm().ln()),
            h,
        ),
        Quantity::NRho => central(
            |s| Ok(field.jet(b.t, b.r + n0 * s).grad.norm().ln()),
            h,
        ),
        Quantity::Kappa => central(
            |s| {
                // isoline point whose projection on the tangent line is r + T·s
                let foot = b.r + t0 * s;
                let sr = search(field, settings, b.gamma, 4.0 * s.abs());
                let off = nearest_root(|p| field.value(b.t, foot + n0 * p) - b.gamma, &sr)?.offset;
                let t1 = tangent_pointwise(field, b.t, foot + n0 * off)?;
                Ok(signed_angle(t0, t1))
            },
            h,
        ),
    }
}

/// Unextrapolated central difference quotient of the defining limit at
/// step `h`. For [`Quantity::Rho`] this is the quotient for `1/ρ`, inverted.
pub fn raw_quotient<F: ScalarField + ?Sized>(
    q: Quantity,
    field: &F,
    t: f64,
    r: Point2,
    h: f64,
    settings: &OracleSettings,
) -> Result<f64> {
    let b = base(field, t, r)?;
    let v = raw_with_base(q, field, &b, h, settings)?;
    Ok(if q == Quantity::Rho { 1.0 / v } else { v })
}

/// Richardson-extrapolated oracle estimate of `q` at `(t, r)`.
pub fn oracle<F: ScalarField + ?Sized>(
    q: Quantity,
    field: &F,
    t: f64,
    r: Point2,
    settings: &OracleSettings,
) -> Result<f64> {
    settings.validate()?;
    let b = base(field, t, r)?;
    let estimates = (0..=settings.richardson_levels)
        .map(|k| raw_with_base(q, field, &b, settings.step / 2f64.powi(k as i32), settings))
        .collect::<Result<Vec<_>>>()?;
    let v = richardson_even(&estimates)?;
    Ok(if q == Quantity::Rho { 1.0 / v } else { v })
}

pub fn oracle_lambda<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::Lambda, field, t, r, s)
}

pub fn oracle_alpha<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::Alpha, field, t, r, s)
}

pub fn oracle_omega<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::Omega, field, t, r, s)
}

pub fn oracle_vrho<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::VRho, field, t, r, s)
}

pub fn oracle_rho<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::Rho, field, t, r, s)
}

pub fn oracle_taurho<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::TauRho, field, t, r, s)
}

pub fn oracle_nrho<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::NRho, field, t, r, s)
}

pub fn oracle_kappa<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::Kappa, field, t, r, s)
}

pub fn oracle_omega_grad<F: ScalarField + ?Sized>(field: &F, t: f64, r: Point2, s: &OracleSettings) -> Result<f64> {
    oracle(Quantity::OmegaGrad, field, t, r, s)
}

/// All nine oracle estimates at one point.
pub fn oracle_set<F: ScalarField + ?Sized>(
    field: &F,
    t: f64,
    r: Point2,
    settings: &OracleSettings,
) -> Result<CharSet> {
    let mut v = [0.0; 9];
    for q in Quantity::ALL {
        v[q as usize] = oracle(q, field, t, r, settings)?;
    }
    Ok(CharSet {
        lambda: v[0],
        rho: v[1],
        alpha: v[2],
        omega: v[3],
        kappa: v[4],
        omega_grad: v[5],
        v_rho: v[6],
        tau_rho: v[7],
        n_rho: v[8],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldJet2, FieldSpec};
    use crate::geometry::Sym2;

    /// `D = xy`, not part of the catalog.
    struct Saddle;

    impl ScalarField for Saddle {
        fn value(&self, _t: f64, r: Point2) -> f64 {
            r.x * r.y
        }
        fn jet(&self, _t: f64, r: Point2) -> FieldJet2 {
            FieldJet2 {
                value: r.x * r.y,
                dt: 0.0,
                dtt: 0.0,
                grad: Vec2::new(r.y, r.x),
                grad_dt: Vec2::ZERO,
                hess: Sym2::new(0.0, 1.0, 0.0),
            }
        }
    }

    fn settings() -> OracleSettings {
        OracleSettings::default()
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
    fn linear_drift_displacement() {
        let f = FieldSpec::LinearDrift {
            gradient: Vec2::new(0.0, 1.0),
            velocity: Vec2::new(0.0, 2.0),
        };
        let c = front_displacement(&f, 0.0, Vec2::new(0.3, 0.1), 0.1, &settings()).unwrap();
        assert!((c.offset - 0.2).abs() < 1e-12);
        assert!(!c.ambiguous);
        assert!((oracle_rho(&f, 0.0, Vec2::ZERO, &settings()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn static_field_does_not_move() {
        let c = front_displacement(&paraboloid(), 0.0, Vec2::new(2.0, 0.0), 0.3, &settings()).unwrap();
        assert_eq!(c.offset, 0.0);
        let v = oracle_vrho(&paraboloid(), 0.0, Vec2::new(1.0, 1.5), &settings()).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn ramp_speed_and_acceleration() {
        let f = FieldSpec::AcceleratingRamp {
            gradient: Vec2::new(0.0, 1.0),
            velocity: Vec2::new(0.0, 2.0),
            acceleration: Vec2::new(0.0, 9.81),
        };
        let l = oracle_lambda(&f, 0.0, Vec2::ZERO, &settings()).unwrap();
        assert!((l - 2.0).abs() < 1e-8, "{l}");
        let a = oracle_alpha(&f, 0.0, Vec2::ZERO, &settings()).unwrap();
        assert!((a - 9.81).abs() < 1e-6, "{a}");
    }

    #[test]
    fn rotating_linear_omega() {
        let f = FieldSpec::RotatingLinear {
            rate: 0.7,
            amplitude: 1.0,
            phase: 0.0,
            center: Vec2::ZERO,
        };
        let w = oracle_omega(&f, 0.0, Vec2::ZERO, &settings()).unwrap();
        assert!((w - 0.7).abs() < 1e-7, "{w}");
        let wg = oracle_omega_grad(&f, 0.0, Vec2::ZERO, &settings()).unwrap();
        assert!((wg - 0.7).abs() < 1e-9, "{wg}");
    }

    #[test]
    fn paraboloid_curvature_and_normal_growth() {
        let k = oracle_kappa(&paraboloid(), 0.0, Vec2::new(2.0, 0.0), &settings()).unwrap();
        assert!((k - 0.5).abs() < 1e-6, "{k}");
        let n = oracle_nrho(&paraboloid(), 0.0, Vec2::new(2.0, 0.0), &settings()).unwrap();
        assert!((n + 0.5).abs() < 1e-7, "{n}");
    }

    #[test]
    fn saddle_tangential_growth() {
        let v = oracle_taurho(&Saddle, 0.0, Vec2::new(2.0, 1.0), &settings()).unwrap();
        assert!((v - 0.268_328_157_299_974_8).abs() < 1e-6, "{v}");
    }

    #[test]
    fn degenerate_base_point() {
        let e = oracle_lambda(&paraboloid(), 0.0, Vec2::ZERO, &settings()).unwrap_err();
        assert!(matches!(e, Error::Degenerate { at: Some(_) }));
    }

    #[test]
    fn settings_validation() {
        let mut s = settings();
        s.max_iter = 4;
        assert!(s.validate().is_err());
        let mut s = settings();
        s.step = 0.0;
        assert!(s.validate().is_err());
    }
}
