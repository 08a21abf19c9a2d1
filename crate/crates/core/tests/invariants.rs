//! Property-based invariants across the field catalog.

use std::f64::consts::PI;

use isokin::characteristics::{char_set, frenet, identity_residuals};
use isokin::domain::{gradient_rotation, rotation_evaluations, SpaceTimeBox};
use isokin::kinematics::{
    deviation_bound_ceil, empirical_max_deviation, integrate, RobotState,
};
use isokin::oracles::{front_displacement, oracle, OracleSettings, Quantity};
use isokin::suites::{catalog, random_monotone_program, random_regular_point};
use isokin::{FieldSpec, Vec2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = FieldSpec> {
    (0usize..6).prop_map(|i| catalog()[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_is_orthonormal_and_oriented(f in family(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, r) = random_regular_point(&f, &mut rng).unwrap();
        let jet = f.jet(t, r);
        let fr = frenet(&jet).unwrap();
        prop_assert!((fr.tangent.norm() - 1.0).abs() < 1e-14);
        prop_assert!((fr.normal.norm() - 1.0).abs() < 1e-14);
        prop_assert!(fr.tangent.dot(fr.normal).abs() < 1e-14);
        // superlevel set on the left of the tangent
        prop_assert!((fr.tangent.cross(fr.normal) - 1.0).abs() < 1e-14);
        prop_assert!(fr.normal.dot(jet.grad) > 0.0);
    }

    #[test]
    fn rho_is_the_gradient_norm(f in family(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, r) = random_regular_point(&f, &mut rng).unwrap();
        let jet = f.jet(t, r);
        prop_assert_eq!(char_set(&jet).unwrap().rho, jet.grad.norm());
    }

    #[test]
    fn rotation_identity_holds(f in family(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, r) = random_regular_point(&f, &mut rng).unwrap();
        let (first, _) = identity_residuals(&char_set(&f.jet(t, r)).unwrap());
        prop_assert!(first.abs() <= 1e-12);
    }

    #[test]
    fn paraboloid_curvature_is_nonnegative(x in -3.0f64..3.0, y in -3.0f64..3.0, t in -1.0f64..1.0) {
        let f = FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::new(0.2, 0.1),
            velocity: Vec2::new(0.3, -0.2),
        };
        let r = Vec2::new(x, y);
        prop_assume!(f.jet(t, r).grad.norm() > 1e-3);
        prop_assert!(char_set(&f.jet(t, r)).unwrap().kappa >= 0.0);
    }

    #[test]
    fn rotation_is_antisymmetric(
        x0 in 0.6f64..2.4, y0 in 0.6f64..2.4, x1 in 0.6f64..2.4, y1 in 0.6f64..2.4,
    ) {
        let f = FieldSpec::RadialParaboloid {
            peak: 0.0,
            curvature: 1.0,
            center: Vec2::ZERO,
            velocity: Vec2::ZERO,
        };
        let p0 = (0.0, Vec2::new(x0, y0));
        let p1 = (0.0, Vec2::new(x1, y1));
        let a = gradient_rotation(&f, p0, p1).unwrap();
        let b = gradient_rotation(&f, p1, p0).unwrap();
        prop_assert!((a + b).abs() < 1e-8);
        let e = rotation_evaluations(&f, p0, p1).unwrap();
        prop_assert!((e.integrated - e.tracked).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oracles_agree_with_closed_forms(f in family(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, r) = random_regular_point(&f, &mut rng).unwrap();
        let c = char_set(&f.jet(t, r)).unwrap();
        let s = OracleSettings::for_field(&f);
        for q in Quantity::ALL {
            let o = oracle(q, &f, t, r, &s).unwrap();
            let v = q.of(&c);
            prop_assert!((o - v).abs() <= 1e-6 * (1.0 + v.abs()), "{}: {} vs {}", q.name(), o, v);
        }
    }

    #[test]
    fn monotone_rotation_respects_ceiling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat = FieldSpec::LinearDrift { gradient: Vec2::new(1.0, 0.0), velocity: Vec2::ZERO };
        let omega_theta = 0.8;
        let prog = random_monotone_program(&mut rng, omega_theta, 1.0, 4.0 * PI / omega_theta);
        let init = RobotState { r: Vec2::ZERO, theta: 0.0, v: 1.0 };
        let tr = integrate(&flat, init, &prog, 2e-3).unwrap();
        for s in &tr.samples {
            let phi = s.state.theta.abs();
            prop_assert!(s.state.r.norm() <= deviation_bound_ceil(1.0, omega_theta, phi) + 1e-6);
        }
    }
}

#[test]
fn front_displacement_is_lambda_dt_to_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in catalog() {
        let s = OracleSettings::for_field(&f);
        for _ in 0..5 {
            let (t, r) = random_regular_point(&f, &mut rng).unwrap();
            let lambda = char_set(&f.jet(t, r)).unwrap().lambda;
            let mut c_max: f64 = 0.0;
            let dts = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
            let devs: Vec<f64> = dts
                .iter()
                .map(|&dt| (front_displacement(&f, t, r, dt, &s).unwrap().offset - lambda * dt).abs())
                .collect();
            for (dt, d) in dts.iter().zip(&devs) {
                c_max = c_max.max(d / (dt * dt));
            }
            // one constant covers the whole range
            for (dt, d) in dts.iter().zip(&devs) {
                assert!(*d <= c_max * dt * dt * (1.0 + 1e-9) + 1e-13);
            }
            assert!(devs[4] <= devs[0] * 1e-2 + 1e-13, "{}: {devs:?}", f.family_name());
        }
    }
}

#[test]
fn raw_quotients_converge_and_extrapolation_improves() {
    use isokin::oracles::raw_quotient;
    let f = &catalog()[4];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (t, r) = random_regular_point(f, &mut rng).unwrap();
    let c = char_set(&f.jet(t, r)).unwrap();
    let s = OracleSettings::for_field(f);
    for q in Quantity::ALL {
        let exact = q.of(&c);
        let e1 = (raw_quotient(q, f, t, r, 4e-2, &s).unwrap() - exact).abs();
        let e2 = (raw_quotient(q, f, t, r, 2e-2, &s).unwrap() - exact).abs();
        if e1 > 1e-10 {
            assert!(e2 / e1 < 0.5, "{}: {e1} -> {e2}", q.name());
        }
        let ex = (oracle(q, f, t, r, &s).unwrap() - exact).abs();
        assert!(ex <= e2.max(1e-12), "{}", q.name());
    }
}

#[test]
fn empirical_maximum_is_monotone() {
    let mut prev = 0.0;
    for k in 1..=20 {
        let phi = k as f64 * 0.25 * PI;
        let n = (phi / PI).ceil() as usize + 1;
        let d = empirical_max_deviation(1.0, 1.0, phi, n);
        assert!(d + 1e-12 >= prev, "phi = {phi}: {d} < {prev}");
        assert!(d <= deviation_bound_ceil(1.0, 1.0, phi) + 1e-9);
        prev = d;
    }
    let mut prev = 0.0;
    for n in 0..7 {
        let d = empirical_max_deviation(1.0, 1.0, 3.3 * PI, n);
        assert!(d + 1e-12 >= prev);
        prev = d;
    }
}

#[test]
fn random_box_pairs_respect_the_bound() {
    use isokin::domain::rotation_bound;
    let f = catalog()[5].clone();
    let bx = SpaceTimeBox::new(
        (0.0, 1.0),
        vec![Vec2::new(0.6, 0.5), Vec2::new(1.4, 0.6), Vec2::new(1.2, 1.3), Vec2::new(0.7, 1.1)],
    )
    .unwrap();
    let coarse = rotation_bound(&f, &bx, 9).unwrap();
    let fine = rotation_bound(&f, &bx, 17).unwrap();
    assert!(fine.sup_omega_grad >= coarse.sup_omega_grad);
    assert!(fine.sup_curv_mix >= coarse.sup_curv_mix);
    assert!(fine.empirical_max <= fine.bound + 1e-6);
    assert!((fine.bound - (fine.sup_omega_grad * fine.interval_len + fine.sup_curv_mix * fine.diameter)).abs() < 1e-15);
    assert!(fine.margin >= 0.0);
}
