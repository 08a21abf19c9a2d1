use isokin::field::{eval_jet2, fd_jet2, FieldJet2, FieldSpec, GaussianTerm};
use isokin::suites::{catalog, random_regular_point};
use isokin::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entries(j: &FieldJet2) -> [f64; 10] {
    [
        j.value, j.dt, j.dtt, j.grad.x, j.grad.y, j.grad_dt.x, j.grad_dt.y, j.hess.xx, j.hess.xy, j.hess.yy,
    ]
}

const NAMES: [&str; 10] = [
    "value", "dt", "dtt", "grad.x", "grad.y", "grad_dt.x", "grad_dt.y", "hess.xx", "hess.xy", "hess.yy",
];

#[test]
fn closed_form_jets_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in catalog() {
        let h = 2e-3 * f.length_scale();
        let (c, w) = f.sampling_region();
        for _ in 0..100 {
            let t = rng.gen_range(-1.0..1.0);
            let r = c + Vec2::new(rng.gen_range(-w..w), rng.gen_range(-w..w));
            let exact = entries(&eval_jet2(&f, t, r));
            let approx = entries(&fd_jet2(&f, t, r, h).unwrap());
            for k in 0..10 {
                let err = (exact[k] - approx[k]).abs();
                assert!(
                    err <= 1e-6 * exact[k].abs() + 1e-8,
                    "{} {}: exact {} vs fd {} at t={t}, r={r:?}",
                    f.family_name(),
                    NAMES[k],
                    exact[k],
                    approx[k]
                );
            }
        }
    }
}

#[test]
fn single_gaussian_matches_fine_step() {
    let f = FieldSpec::MovingGaussianSum {
        terms: vec![GaussianTerm {
            amplitude: 1.3,
            center: Vec2::new(0.2, -0.4),
            velocity: Vec2::new(0.5, 0.25),
            acceleration: Vec2::ZERO,
            width: 0.8,
        }],
    };
    let (t, r) = (0.4, Vec2::new(0.9, 0.1));
    let exact = entries(&eval_jet2(&f, t, r));
    let approx = entries(&fd_jet2(&f, t, r, 1e-4).unwrap());
    for k in 0..10 {
        assert!((exact[k] - approx[k]).abs() <= 1e-6 * exact[k].abs().max(1e-2), "{}", NAMES[k]);
    }
}

#[test]
fn hessian_is_symmetric_by_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for f in catalog() {
        for _ in 0..50 {
            let (t, r) = random_regular_point(&f, &mut rng).unwrap();
            let rows = eval_jet2(&f, t, r).hess.rows();
            assert_eq!(rows[0][1], rows[1][0]);
            assert!(eval_jet2(&f, t, r).is_finite());
        }
    }
}

fn drifting_families(c: Vec2) -> Vec<FieldSpec> {
    vec![
        FieldSpec::RadialParaboloid {
            peak: 0.5,
            curvature: 0.8,
            center: c,
            velocity: Vec2::new(0.3, -0.6),
        },
        FieldSpec::RotatingLinear {
            rate: 0.4,
            amplitude: 2.0,
            phase: 0.1,
            center: c,
        },
        FieldSpec::MovingGaussianSum {
            terms: vec![GaussianTerm {
                amplitude: 1.0,
                center: c,
                velocity: Vec2::new(-0.2, 0.7),
                acceleration: Vec2::new(0.1, 0.0),
                width: 0.9,
            }],
        },
        FieldSpec::RotatingAnisotropicGaussian {
            amplitude: 1.5,
            center: c,
            velocity: Vec2::new(0.4, 0.1),
            widths: [1.0, 0.5],
            angle: 0.2,
            rate: 0.3,
        },
    ]
}

#[test]
fn jets_are_translation_covariant() {
    let c = Vec2::new(1.7, -0.9);
    let moved = drifting_families(c);
    let origin = drifting_families(Vec2::ZERO);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (a, b) in moved.iter().zip(&origin) {
        for _ in 0..50 {
            let t = rng.gen_range(-1.0..1.0);
            let r = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let ja = entries(&eval_jet2(a, t, r + c));
            let jb = entries(&eval_jet2(b, t, r));
            for k in 0..10 {
                assert!(
                    (ja[k] - jb[k]).abs() <= 1e-12 * (1.0 + jb[k].abs()),
                    "{} {}",
                    a.family_name(),
                    NAMES[k]
                );
            }
        }
    }
}

#[test]
fn linear_drift_example() {
    // D = y − 2t
    let f = FieldSpec::LinearDrift {
        gradient: Vec2::new(0.0, 1.0),
        velocity: Vec2::new(0.0, 2.0),
    };
    let j = eval_jet2(&f, 0.7, Vec2::new(3.0, 1.0));
    assert_eq!(j.grad, Vec2::new(0.0, 1.0));
    assert_eq!(j.dt, -2.0);
    assert_eq!(j.hess.rows(), [[0.0, 0.0], [0.0, 0.0]]);
}
