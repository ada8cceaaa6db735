use cdl_core::mask::make_random_mask;
use cdl_core::prox::{project_cpn, soft_threshold};
use cdl_core::{ConstraintSet, NormMode, Shape2};
use proptest::prelude::*;

fn cset(mode: NormMode) -> ConstraintSet {
    ConstraintSet::new(Shape2::new(6, 5), Shape2::new(3, 2), mode).unwrap()
}

proptest! {
    #[test]
    fn soft_threshold_is_nonexpansive(a in -10.0f64..10.0, b in -10.0f64..10.0, g in 0.0f64..5.0) {
        prop_assert!((soft_threshold(a, g) - soft_threshold(b, g)).abs() <= (a - b).abs() + 1e-15);
    }

    #[test]
    fn soft_threshold_shrinks_towards_zero(v in -10.0f64..10.0, g in 0.0f64..5.0) {
        let s = soft_threshold(v, g);
        prop_assert!(s.abs() <= v.abs());
        prop_assert!(s == 0.0 || s.signum() == v.signum());
        if v.abs() <= g {
            prop_assert_eq!(s, 0.0);
        } else {
            prop_assert!((v.abs() - s.abs() - g).abs() <= 1e-12);
        }
    }

    #[test]
    fn projection_is_feasible_and_idempotent(y in prop::collection::vec(-3.0f64..3.0, 60), ball in any::<bool>()) {
        let c = cset(if ball { NormMode::UnitBall } else { NormMode::UnitEquality });
        let (p, _) = project_cpn(&y, &c).unwrap();
        prop_assert!(c.contains(&p, 1e-12));
        let (q, _) = project_cpn(&p, &c).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn projection_is_nearest_on_the_support(y in prop::collection::vec(-3.0f64..3.0, 30), z in prop::collection::vec(-3.0f64..3.0, 30)) {
        // any other feasible point is no closer than the projection
        let c = cset(NormMode::UnitBall);
        let (p, _) = project_cpn(&y, &c).unwrap();
        let (zp, _) = project_cpn(&z, &c).unwrap();
        let d = |a: &[f64]| a.iter().zip(&y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
        prop_assert!(d(&p) <= d(&zp) + 1e-12);
    }

    #[test]
    fn random_mask_has_exact_zero_count(frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let s = Shape2::new(7, 9);
        let m = make_random_mask(s, frac, seed).unwrap();
        let zeros = m.data().iter().filter(|&&v| v == 0.0).count();
        prop_assert_eq!(zeros, (frac * 63.0).floor() as usize);
        prop_assert!(m.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }
}

#[test]
fn ball_mode_leaves_short_filters_alone() {
    let c = cset(NormMode::UnitBall);
    let mut y = vec![0.0; 30];
    y[0] = 0.3;
    y[6] = -0.4;
    let (p, n) = project_cpn(&y, &c).unwrap();
    assert_eq!(p, y);
    assert_eq!(n, 0);
}

#[test]
fn zero_filter_becomes_impulse_in_equality_mode() {
    let c = cset(NormMode::UnitEquality);
    let (p, n) = project_cpn(&[0.0; 30], &c).unwrap();
    assert_eq!(n, 1);
    assert_eq!(p[0], 1.0);
    assert!(c.contains(&p, 0.0));
}
