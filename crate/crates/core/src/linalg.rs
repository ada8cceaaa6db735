//! Per-frequency-bin linear solvers.
//!
//! Every system here has the form `(sum_k a_k a_k^H + rho I) x = b`. The
//! rank-one and iterated Sherman-Morrison solvers take the `a_k^H` as rows of
//! a row-major `K x M` matrix, which is how bin-major spectra are stored.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{CdlError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(CdlError::param(format!("penalty must be positive and finite, got {rho}")))
    }
}

/// Solves `(a a^H + rho I) x = b` in closed form.
pub fn solve_rank1(a: &[Complex64], rho: f64, b: &[Complex64]) -> Result<Vec<Complex64>> {
    check_rho(rho)?;
    if a.len() != b.len() {
        return Err(CdlError::dim("solve_rank1: a and b lengths differ"));
    }
    let row: Vec<Complex64> = a.iter().map(|v| v.conj()).collect();
    let mut x = vec![ZERO; b.len()];
    rank1_row(&row, rho, b, &mut x);
    Ok(x)
}

/// Rank-one kernel with `row = a^H`.
#[inline]
pub(crate) fn rank1_row(row: &[Complex64], rho: f64, b: &[Complex64], x: &mut [Complex64]) {
    let mut nrm = 0.0;
    let mut dot = ZERO;
    for (r, bi) in row.iter().zip(b) {
        nrm += r.norm_sqr();
        dot += r * bi;
    }
    let coef = dot / (rho + nrm);
    for ((xi, r), bi) in x.iter_mut().zip(row).zip(b) {
        *xi = (bi - r.conj() * coef) / rho;
    }
}

/// Scratch space for [`ism_rows`], reusable across bins.
#[derive(Clone, Debug, Default)]
pub struct IsmWork {
    z: Vec<Complex64>,
    beta: Vec<f64>,
}

/// Solves `(A^H A + rho I) x = b` by iterated Sherman-Morrison, where `rows`
/// is `A` (`K x M`, row `k` is `a_k^H`). Cost `O(K^2 M)`.
pub fn solve_rank_k_ism(rows: &[Complex64], m: usize, rho: f64, b: &[Complex64]) -> Result<Vec<Complex64>> {
    check_rho(rho)?;
    if m == 0 || !rows.len().is_multiple_of(m) || b.len() != m {
        return Err(CdlError::dim("solve_rank_k_ism: inconsistent shapes"));
    }
    let mut x = vec![ZERO; m];
    ism_rows(rows, m, rho, b, &mut x, &mut IsmWork::default());
    Ok(x)
}

/// ISM kernel. Corrections are applied in ascending row order; with a single
/// row it performs exactly the operations of the rank-one kernel.
pub(crate) fn ism_rows(
    rows: &[Complex64],
    m: usize,
    rho: f64,
    b: &[Complex64],
    x: &mut [Complex64],
    work: &mut IsmWork,
) {
    let k = rows.len() / m;
    work.z.clear();
    work.z.resize(k * m, ZERO);
    work.beta.clear();
    work.beta.resize(k, 0.0);
    // z_k = rho * A_{k-1}^{-1} a_k,  beta_k = rho + a_k^H z_k
    for kk in 0..k {
        let row = &rows[kk * m..(kk + 1) * m];
        let (done, rest) = work.z.split_at_mut(kk * m);
        let zk = &mut rest[..m];
        for (z, r) in zk.iter_mut().zip(row) {
            *z = r.conj();
        }
        for l in 0..kk {
            let zl = &done[l * m..(l + 1) * m];
            // z_l^H a_k = sum conj(z_l) conj(row)
            let mut dot = ZERO;
            for (a, r) in zl.iter().zip(row) {
                dot += (a * r).conj();
            }
            let c = dot / work.beta[l];
            for (z, a) in zk.iter_mut().zip(zl) {
                *z -= a * c;
            }
        }
        let mut acc = 0.0;
        for (r, z) in row.iter().zip(zk.iter()) {
            acc += (r * z).re;
        }
        work.beta[kk] = rho + acc;
    }
    x.copy_from_slice(b);
    for kk in 0..k {
        let zk = &work.z[kk * m..(kk + 1) * m];
        let mut dot = ZERO;
        for (z, bi) in zk.iter().zip(b) {
            dot += z.conj() * bi;
        }
        let coef = dot / work.beta[kk];
        for (xi, z) in x.iter_mut().zip(zk) {
            *xi -= z * coef;
        }
    }
    for xi in x.iter_mut() {
        *xi /= rho;
    }
}

/// Result of a CG solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    /// `false` when `max_iter` was exhausted before reaching `rel_tol`.
    pub converged: bool,
}

/// Default CG settings: relative tolerance 1e-3, at most 100 iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { rel_tol: 1e-3, max_iter: 100 }
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

fn norm2(a: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().map(|v| v.norm_sqr()).sum::<f64>())
}

/// Reusable CG vectors.
#[derive(Clone, Debug, Default)]
pub struct CgWork {
    r: Vec<Complex64>,
    p: Vec<Complex64>,
    ap: Vec<Complex64>,
    best: Vec<Complex64>,
}

/// Conjugate gradient for a Hermitian positive definite operator.
///
/// `x` holds the warm start on entry and the solution on exit. When the
/// tolerance is not met the lowest-residual iterate is returned with
/// `converged == false`.
pub fn solve_cg<F>(apply: F, b: &[Complex64], x: &mut [Complex64], opts: CgOptions) -> Result<CgOutcome>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    solve_cg_with(apply, b, x, opts, &mut CgWork::default())
}

pub fn solve_cg_with<F>(
    mut apply: F,
    b: &[Complex64],
    x: &mut [Complex64],
    opts: CgOptions,
    w: &mut CgWork,
) -> Result<CgOutcome>
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    if x.len() != n {
        return Err(CdlError::dim("solve_cg: x0 and b lengths differ"));
    }
    let bnorm = norm2(b);
    if !bnorm.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(CdlError::Numerical("solve_cg: non-finite input".into()));
    }
    if bnorm == 0.0 {
        x.fill(ZERO);
        return Ok(CgOutcome { iterations: 0, rel_residual: 0.0, converged: true });
    }
    w.r.resize(n, ZERO);
    w.p.resize(n, ZERO);
    w.ap.resize(n, ZERO);
    apply(x, &mut w.ap);
    for ((r, bi), ai) in w.r.iter_mut().zip(b).zip(&w.ap) {
        *r = bi - ai;
    }
    let mut rs = w.r.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let mut rel = libm::sqrt(rs) / bnorm;
    if rel <= opts.rel_tol {
        return Ok(CgOutcome { iterations: 0, rel_residual: rel, converged: true });
    }
    w.best.clear();
    w.best.extend_from_slice(x);
    let mut best_rel = rel;
    w.p.copy_from_slice(&w.r);
    for it in 1..=opts.max_iter {
        apply(&w.p, &mut w.ap);
        let pap = dotc(&w.p, &w.ap).re;
        if !(pap.is_finite()) {
            return Err(CdlError::Numerical("solve_cg: non-finite curvature".into()));
        }
        if pap <= 0.0 {
            break;
        }
        let alpha = rs / pap;
        for (xi, pi) in x.iter_mut().zip(&w.p) {
            *xi += pi * alpha;
        }
        for (ri, ai) in w.r.iter_mut().zip(&w.ap) {
            *ri -= ai * alpha;
        }
        let rs_new = w.r.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if !rs_new.is_finite() {
            return Err(CdlError::Numerical("solve_cg: non-finite residual".into()));
        }
        rel = libm::sqrt(rs_new) / bnorm;
        if rel <= opts.rel_tol {
            return Ok(CgOutcome { iterations: it, rel_residual: rel, converged: true });
        }
        if rel < best_rel {
            best_rel = rel;
            w.best.copy_from_slice(x);
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for (pi, ri) in w.p.iter_mut().zip(&w.r) {
            *pi = ri + *pi * beta;
        }
    }
    x.copy_from_slice(&w.best);
    Ok(CgOutcome { iterations: opts.max_iter, rel_residual: best_rel, converged: false })
}

/// Applies `A^H A + rho I` with `A` given by rows (`K x M`).
pub(crate) fn apply_gram_shift(rows: &[Complex64], m: usize, rho: f64, v: &[Complex64], out: &mut [Complex64]) {
    for (o, vi) in out.iter_mut().zip(v) {
        *o = vi * rho;
    }
    for row in rows.chunks_exact(m) {
        let mut s = ZERO;
        for (r, vi) in row.iter().zip(v) {
            s += r * vi;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o += r.conj() * s;
        }
    }
}

/// Dense solve of `G x = b` (row-major `G`) by Gaussian elimination with
/// partial pivoting. Test oracle for the structured solvers.
pub fn dense_oracle_solve(g: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = b.len();
    if g.len() != n * n {
        return Err(CdlError::dim("dense_oracle_solve: matrix is not square with b"));
    }
    let mut a = g.to_vec();
    let mut x = b.to_vec();
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(CdlError::Solver("dense_oracle_solve: singular matrix".into()));
    }
    for col in 0..n {
        let (piv, pmag) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= 1e-13 * scale {
            return Err(CdlError::Solver(format!("dense_oracle_solve: singular at column {col}")));
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == ZERO {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[r * n + j] -= f * v;
            }
            let v = x[col];
            x[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s -= a[col * n + j] * x[j];
        }
        x[col] = s / a[col * n + col];
    }
    Ok(x)
}

/// `A^H A + rho I` as a dense row-major matrix.
pub fn gram_shift_dense(rows: &[Complex64], m: usize, rho: f64) -> Vec<Complex64> {
    let mut g = vec![ZERO; m * m];
    for i in 0..m {
        g[i * m + i] = Complex64::new(rho, 0.0);
    }
    for row in rows.chunks_exact(m) {
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] += row[i].conj() * row[j];
            }
        }
    }
    g
}
