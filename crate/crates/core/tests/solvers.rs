use cdl_core::linalg::{dense_oracle_solve, gram_shift_dense, solve_cg, solve_rank1, solve_rank_k_ism, CgOptions};
use cdl_core::Complex64;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

fn system() -> impl Strategy<Value = (usize, f64, Vec<Complex64>, Vec<Complex64>)> {
    (1usize..=8, 1usize..=4, 0.05f64..10.0).prop_flat_map(|(m, k, rho)| (Just(m), Just(rho), complex_vec(k * m), complex_vec(m)))
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (d / n.max(1e-300)).sqrt()
}

fn apply(rows: &[Complex64], m: usize, rho: f64, v: &[Complex64], out: &mut [Complex64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o = x * rho;
    }
    for row in rows.chunks_exact(m) {
        let s: Complex64 = row.iter().zip(v).map(|(r, x)| r * x).sum();
        for (o, r) in out.iter_mut().zip(row) {
            *o += r.conj() * s;
        }
    }
}

proptest! {
    #[test]
    fn ism_matches_dense_oracle((m, rho, rows, b) in system()) {
        let want = dense_oracle_solve(&gram_shift_dense(&rows, m, rho), &b).unwrap();
        let got = solve_rank_k_ism(&rows, m, rho, &b).unwrap();
        prop_assert!(rel(&got, &want) <= 1e-9);
    }

    #[test]
    fn rank1_matches_dense_oracle((m, rho, rows, b) in system()) {
        let row = &rows[..m];
        let a: Vec<Complex64> = row.iter().map(|v| v.conj()).collect();
        let want = dense_oracle_solve(&gram_shift_dense(row, m, rho), &b).unwrap();
        prop_assert!(rel(&solve_rank1(&a, rho, &b).unwrap(), &want) <= 1e-9);
    }

    #[test]
    fn cg_matches_dense_oracle((m, rho, rows, b) in system()) {
        let want = dense_oracle_solve(&gram_shift_dense(&rows, m, rho), &b).unwrap();
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        let out = solve_cg(|v, o| apply(&rows, m, rho, v, o), &b, &mut x, CgOptions { rel_tol: 1e-12, max_iter: 1000 }).unwrap();
        prop_assert!(out.converged);
        prop_assert!(rel(&x, &want) <= 1e-8);
    }

    #[test]
    fn ism_residual_is_small((m, rho, rows, b) in system()) {
        let x = solve_rank_k_ism(&rows, m, rho, &b).unwrap();
        let mut ax = vec![Complex64::new(0.0, 0.0); m];
        apply(&rows, m, rho, &x, &mut ax);
        prop_assert!(rel(&ax, &b) <= 1e-10);
    }
}

#[test]
fn cg_zero_rhs_returns_zero() {
    let rows = [Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5)];
    let mut x = vec![Complex64::new(3.0, 1.0); 2];
    solve_cg(|v, o| apply(&rows, 2, 1.0, v, o), &[Complex64::new(0.0, 0.0); 2], &mut x, CgOptions::default()).unwrap();
    assert!(x.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn cg_respects_iteration_cap() {
    let rows: Vec<Complex64> = (0..32).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
    let b: Vec<Complex64> = (0..8).map(|i| Complex64::new(1.0, i as f64)).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); 8];
    let out = solve_cg(|v, o| apply(&rows, 8, 1e-3, v, o), &b, &mut x, CgOptions { rel_tol: 1e-15, max_iter: 2 }).unwrap();
    assert!(out.iterations <= 2);
    assert!(!out.converged);
}
