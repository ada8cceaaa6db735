mod common;

use cdl_core::csc::CscConfig;
use cdl_core::driver::{cdl_learn, evaluate_on_test_set, grid_search, CdlConfig, Method};
use cdl_core::{CdlError, Ctx, Mask, Shape2};

fn small_config(m: Method, iters: usize) -> CdlConfig {
    let mut cfg = CdlConfig::new(m);
    cfg.iters = iters;
    cfg
}

#[test]
fn every_method_learns_a_feasible_dictionary() {
    let ctx = Ctx::reference();
    let shape = Shape2::new(8, 8);
    let s = common::noise(shape, 2, 1);
    let init = common::dict(shape, 3, 3, 2);
    for m in Method::ALL {
        let mask = m.is_masked().then(|| Mask::identity(shape));
        let out = cdl_learn(&ctx, &s, &init, &small_config(m, 15), mask.as_ref(), Some(5)).unwrap();
        assert!(out.dictionary.is_feasible(1e-9), "{m}");
        assert_eq!(out.trace.rows.len(), 15);
        assert_eq!(out.snapshots.iter().map(|s| s.iteration).collect::<Vec<_>>(), [5, 10, 15]);
        let obj = out.trace.objectives();
        assert!(obj.iter().all(|v| v.is_finite()));
        assert!(obj[14] < obj[0], "{m} did not reduce the objective");
        for w in out.trace.rows.windows(2) {
            assert!(w[1].time_s >= w[0].time_s);
            assert_eq!(w[1].iter, w[0].iter + 1);
        }
    }
}

#[test]
fn learning_is_reproducible() {
    let ctx = Ctx::reference();
    let shape = Shape2::new(8, 8);
    let s = common::noise(shape, 3, 3);
    let cfg = small_config(Method::Cns, 10);
    let init = cfg.initial_dictionary(shape, Shape2::new(3, 3), 4, 1).unwrap();
    let a = cdl_learn(&ctx, &s, &init, &cfg, None, None).unwrap();
    let b = cdl_learn(&ctx, &s, &init, &cfg, None, None).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.dictionary, b.dictionary);
}

#[test]
fn mask_must_match_the_method() {
    let ctx = Ctx::reference();
    let shape = Shape2::new(8, 8);
    let s = common::noise(shape, 1, 4);
    let init = common::dict(shape, 3, 2, 5);
    let id = Mask::identity(shape);
    assert!(matches!(cdl_learn(&ctx, &s, &init, &small_config(Method::Cg, 2), Some(&id), None), Err(CdlError::Parameter(_))));
    assert!(matches!(cdl_learn(&ctx, &s, &init, &small_config(Method::MCg, 2), None, None), Err(CdlError::Parameter(_))));
}

#[test]
fn grid_search_picks_the_lowest_objective() {
    let ctx = Ctx::reference();
    let shape = Shape2::new(8, 8);
    let s = common::noise(shape, 2, 6);
    let init = common::dict(shape, 3, 2, 7);
    let g = grid_search(&ctx, &s, &init, &CdlConfig::new(Method::Ism), None, &[0.5, 2.0], &[1.0, 10.0], 5).unwrap();
    assert_eq!(g.points.len(), 4);
    let best = g.points.iter().map(|p| p.objective).fold(f64::INFINITY, f64::min);
    assert_eq!(g.best_point().objective, best);
}

#[test]
fn test_set_evaluation_covers_every_snapshot() {
    let ctx = Ctx::reference();
    let shape = Shape2::new(8, 8);
    let s = common::noise(shape, 2, 8);
    let test = common::noise(shape, 1, 9);
    let init = common::dict(shape, 3, 2, 10);
    let out = cdl_learn(&ctx, &s, &init, &small_config(Method::Fista, 6), None, Some(3)).unwrap();
    let rows = evaluate_on_test_set(&ctx, &out.snapshots, &test, 0.1, CscConfig::default()).unwrap();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [3, 6]);
    assert!(rows.iter().all(|r| r.1.is_finite() && r.1 > 0.0));
}
