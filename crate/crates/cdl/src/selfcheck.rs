//! Oracle and invariant checks shared by the `selfcheck` subcommand and the
//! acceptance tests. Every check builds its own fixed-seed problem.

use std::time::Instant;

use cdl_core::csc::{cbpdn_objective, csc_admm, csc_admm_masked, CscConfig};
use cdl_core::dictupd::{
    grad_dict_fidelity, Consensus, DictProblem, DictUpdate, EqAdmm, Fista, LinearSolver, MaskedBlock, MaskedConsensus,
    ThreeD,
};
use cdl_core::driver::{cdl_learn, default_params, CdlConfig, Method};
use cdl_core::linalg::{dense_oracle_solve, gram_shift_dense, solve_cg, solve_rank1, solve_rank_k_ism, CgOptions};
use cdl_core::mask::make_random_mask;
use cdl_core::preprocess::{tikhonov_gradient, tikhonov_highpass};
use cdl_core::{Complex64, Ctx, Dictionary, Mask, NormMode, Shape2, Signals};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::synth::{noise_signals, piecewise_images, sparse_maps};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn check(name: &'static str, passed: bool, detail: String, start: Instant) -> Check {
    Check { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_err_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (d / n.max(f64::MIN_POSITIVE)).sqrt()
}

/// Direct circular convolution of two images.
pub fn circular_conv(shape: Shape2, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (r, c) = (shape.rows, shape.cols);
    let mut out = vec![0.0; r * c];
    for p in 0..r {
        for q in 0..c {
            let av = a[p * c + q];
            if av == 0.0 {
                continue;
            }
            for i in 0..r {
                for j in 0..c {
                    out[((i + p) % r) * c + (j + q) % c] += av * b[i * c + j];
                }
            }
        }
    }
    out
}

/// `1/2 sum_k ||W_k (sum_m x_{k,m} * d_m - s_k)||^2` by direct convolution
/// (single channel).
pub fn spatial_dict_objective(shape: Shape2, coeffs: &[f64], filters: usize, d: &[f64], s: &Signals, mask: Option<&Mask>) -> f64 {
    let n = shape.len();
    let mut total = 0.0;
    for k in 0..s.images() {
        let mut rec = vec![0.0; n];
        for m in 0..filters {
            let x = &coeffs[(k * filters + m) * n..(k * filters + m + 1) * n];
            for (r, v) in rec.iter_mut().zip(circular_conv(shape, x, &d[m * n..(m + 1) * n])) {
                *r += v;
            }
        }
        for (i, (r, v)) in rec.iter().zip(s.image(0, k)).enumerate() {
            let w = mask.map_or(1.0, |w| w.weights(k)[i]);
            let e = w * (r - v);
            total += 0.5 * e * e;
        }
    }
    total
}

fn dict(shape: Shape2, filter: Shape2, m: usize, seed: u64) -> Dictionary {
    Dictionary::random(shape, filter, m, 1, NormMode::UnitEquality, seed).expect("valid dictionary")
}

/// Solver agreement with the dense oracle on random per-bin systems.
pub fn check_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rand_vec = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    };
    let mut worst = [0.0f64; 3];
    let mut failed = None;
    for _ in 0..200 {
        let m = rng.random_range(1..=8);
        let k = rng.random_range(1..=4);
        let rho = rng.random_range(0.1..5.0);
        let rows = rand_vec(&mut rng, k * m);
        let b = rand_vec(&mut rng, m);
        let run = || -> cdl_core::Result<[f64; 3]> {
            let want = dense_oracle_solve(&gram_shift_dense(&rows, m, rho), &b)?;
            let want1 = dense_oracle_solve(&gram_shift_dense(&rows[..m], m, rho), &b)?;
            let a: Vec<Complex64> = rows[..m].iter().map(|v| v.conj()).collect();
            let r1 = solve_rank1(&a, rho, &b)?;
            let rk = solve_rank_k_ism(&rows, m, rho, &b)?;
            let mut x = vec![Complex64::new(0.0, 0.0); m];
            solve_cg(
                |v, o| {
                    for (i, oi) in o.iter_mut().enumerate() {
                        *oi = v[i] * rho;
                    }
                    for row in rows.chunks_exact(m) {
                        let s: Complex64 = row.iter().zip(v).map(|(r, v)| r * v).sum();
                        for (oi, r) in o.iter_mut().zip(row) {
                            *oi += r.conj() * s;
                        }
                    }
                },
                &b,
                &mut x,
                CgOptions { rel_tol: 1e-12, max_iter: 500 },
            )?;
            Ok([rel_err_c(&r1, &want1), rel_err_c(&rk, &want), rel_err_c(&x, &want)])
        };
        match run() {
            Ok(e) => {
                for (w, v) in worst.iter_mut().zip(e) {
                    *w = w.max(v);
                }
            }
            Err(e) => failed = Some(e.to_string()),
        }
    }
    let pass = failed.is_none() && worst.iter().all(|&e| e <= 1e-8);
    let detail = match failed {
        Some(e) => format!("solver error: {e}"),
        None => format!("max rel err rank1 {:.2e}, ism {:.2e}, cg {:.2e} (tol 1e-8)", worst[0], worst[1], worst[2]),
    };
    check("oracle-equivalence", pass, detail, start)
}

/// Frequency-domain products against direct circular convolution.
pub fn check_convolution(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(8, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ah = cdl_core::fft::forward_real(ctx.fft, shape, &a).unwrap();
        let bh = cdl_core::fft::forward_real(ctx.fft, shape, &b).unwrap();
        let p: Vec<Complex64> = ah.iter().zip(&bh).map(|(x, y)| x * y).collect();
        let got = cdl_core::fft::inverse_real(ctx.fft, shape, &p).unwrap();
        worst = worst.max(max_abs_diff(&got, &circular_conv(shape, &a, &b)));
    }
    check("convolution-theorem", worst <= 1e-10, format!("max abs diff {worst:.2e} (tol 1e-10)"), start)
}

/// Analytic dictionary gradients against central finite differences.
pub fn check_gradients(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(8, 8);
    let (k, m, n) = (2, 3, 64);
    let x = sparse_maps(shape, k, m, 0.3, 31);
    let s = noise_signals(shape, 1, k, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let w = Mask::per_image(shape, k, (0..k * n).map(|_| rng.random_range(0.0..1.5)).collect()).unwrap();
    let d: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let h = 1e-6;
    let mut worst = [0.0f64; 2];
    for (slot, mask) in [None, Some(&w)].into_iter().enumerate() {
        let prob = DictProblem::new(ctx, &x, m, &s, mask).unwrap();
        let g = grad_dict_fidelity(ctx, &prob, &d, mask).unwrap();
        for _ in 0..50 {
            let v: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let dp: Vec<f64> = d.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let dm: Vec<f64> = d.iter().zip(&v).map(|(a, b)| a - h * b).collect();
            let fd = (spatial_dict_objective(shape, &x, m, &dp, &s, mask) - spatial_dict_objective(shape, &x, m, &dm, &s, mask)) / (2.0 * h);
            let an: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
            worst[slot] = worst[slot].max((fd - an).abs() / an.abs().max(1e-12));
        }
    }
    // all-ones mask through the masked code path
    let id = Mask::identity(shape);
    let prob = DictProblem::new(ctx, &x, m, &s, Some(&id)).unwrap();
    let gm = grad_dict_fidelity(ctx, &prob, &d, Some(&id)).unwrap();
    let gu = grad_dict_fidelity(ctx, &prob, &d, None).unwrap();
    let id_diff = max_abs_diff(&gm, &gu) / gu.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let pass = worst.iter().all(|&e| e <= 1e-5) && id_diff <= 1e-12;
    check(
        "gradient-finite-difference",
        pass,
        format!("max rel err unmasked {:.2e}, masked {:.2e} (tol 1e-5); identity-mask diff {id_diff:.2e}", worst[0], worst[1]),
        start,
    )
}

/// Consensus on the image-axis DFT of a K=2 problem reproduces the 3D method.
pub fn check_consensus_3d(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(8, 8);
    let (m, n) = (3, 64);
    let x = sparse_maps(shape, 2, m, 0.3, 41);
    let s = noise_signals(shape, 1, 2, 42);
    let mn = m * n;
    let xt: Vec<f64> = (0..mn).map(|i| x[i] + x[mn + i]).chain((0..mn).map(|i| x[i] - x[mn + i])).collect();
    let (s0, s1) = (s.image(0, 0), s.image(0, 1));
    let st: Vec<f64> = (0..n).map(|i| s0[i] + s1[i]).chain((0..n).map(|i| s0[i] - s1[i])).collect();
    let st = Signals::greyscale(shape, 2, st).unwrap();
    let init = dict(shape, Shape2::new(3, 3), m, 43);
    let sigma = 2.0;
    let p3 = DictProblem::new(ctx, &x, m, &s, None).unwrap();
    let pc = DictProblem::new(ctx, &xt, m, &st, None).unwrap();
    let mut a = ThreeD::new(&init, 2, sigma);
    let mut b = Consensus::new(&init, 2, sigma, false);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..50 {
        a.step(ctx, &p3).unwrap();
        b.step(ctx, &pc).unwrap();
        worst.0 = worst.0.max(max_abs_diff(a.dictionary().data(), b.dictionary().data()));
        let d0: Vec<f64> = (0..mn).map(|i| a.d[i] + a.d[mn + i]).collect();
        let d1: Vec<f64> = (0..mn).map(|i| a.d[i] - a.d[mn + i]).collect();
        worst.1 = worst.1.max(max_abs_diff(&d0, &b.dk[..mn])).max(max_abs_diff(&d1, &b.dk[mn..]));
    }
    let pass = worst.0 <= 1e-9 && worst.1 <= 1e-9;
    check("consensus-equals-3d", pass, format!("max diff g {:.2e}, d {:.2e} over 50 iterations (tol 1e-9)", worst.0, worst.1), start)
}

fn duplicate_maps(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.extend_from_slice(x);
    v
}

fn run_pair(
    ctx: &Ctx,
    iters: usize,
    a: &mut dyn DictUpdate,
    pa: &DictProblem,
    b: &mut dyn DictUpdate,
    pb: &DictProblem,
) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..iters {
        a.step(ctx, pa).unwrap();
        b.step(ctx, pb).unwrap();
        worst = worst.max(max_abs_diff(a.dictionary().data(), b.dictionary().data()));
    }
    worst
}

/// Duplicating the training image leaves every method's iterates unchanged
/// once the parameters are scaled by the replication laws.
pub fn check_replication(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(8, 8);
    let (m, n) = (3, 64);
    let x1 = sparse_maps(shape, 1, m, 0.3, 51);
    let s1 = noise_signals(shape, 1, 1, 52);
    let x2 = duplicate_maps(&x1);
    let s2 = Signals::greyscale(shape, 2, duplicate_maps(s1.data())).unwrap();
    let w = make_random_mask(shape, 0.25, 53).unwrap();
    let init = dict(shape, Shape2::new(3, 3), m, 54);
    let p1 = DictProblem::new(ctx, &x1, m, &s1, None).unwrap();
    let p2 = DictProblem::new(ctx, &x2, m, &s2, None).unwrap();
    let pm1 = DictProblem::new(ctx, &x1, m, &s1, Some(&w)).unwrap();
    let pm2 = DictProblem::new(ctx, &x2, m, &s2, Some(&w)).unwrap();
    let cg = CgOptions::default();
    let iters = 50;
    let eq = run_pair(
        ctx,
        iters,
        &mut EqAdmm::new(&init, 5.0, LinearSolver::Ism, cg),
        &p1,
        &mut EqAdmm::new(&init, 10.0, LinearSolver::Ism, cg),
        &p2,
    );
    let cns = run_pair(ctx, iters, &mut Consensus::new(&init, 1, 2.0, false), &p1, &mut Consensus::new(&init, 2, 2.0, false), &p2);
    let ext = run_pair(
        ctx,
        iters,
        &mut MaskedConsensus::new(&init, 1, 3.0, false),
        &pm1,
        &mut MaskedConsensus::new(&init, 2, 3.0, false),
        &pm2,
    );
    // step parameter above the Lipschitz constant of the K=1 gradient
    let lip = (0..n)
        .map(|f| p1.x_hat().bin(0, f).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    let l = 1.5 * lip;
    let fista = run_pair(ctx, iters, &mut Fista::new(&init, l, false, true), &p1, &mut Fista::new(&init, 2.0 * l, false, true), &p2);
    let d = dict(shape, Shape2::new(3, 3), m, 55);
    let cfg = CscConfig { iters, rho: 1.5, relax: 1.0, stop: None };
    let (c1, _) = csc_admm(ctx, &d, &s1, 0.1, cfg, None).unwrap();
    let (c2, _) = csc_admm(ctx, &d, &s2, 0.1, cfg, None).unwrap();
    let mn = m * n;
    let csc = max_abs_diff(&c1.y, &c2.y[..mn]).max(max_abs_diff(&c1.y, &c2.y[mn..]));
    let worst = [eq, cns, ext, fista, csc];
    let pass = worst.iter().all(|&e| e <= 1e-10);
    check(
        "replication-scaling",
        pass,
        format!("max diff eqadmm {eq:.2e}, consensus {cns:.2e}, ext-consensus {ext:.2e}, fista {fista:.2e}, csc {csc:.2e} (tol 1e-10)"),
        start,
    )
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn fidelity_at(ctx: &Ctx, d: &Dictionary, coeffs: &[f64], s: &Signals) -> f64 {
    cbpdn_objective(ctx, d, coeffs, s, 1.0, None).expect("objective").fidelity
}

fn run_for(ctx: &Ctx, upd: &mut dyn DictUpdate, prob: &DictProblem, iters: usize) -> Dictionary {
    for _ in 0..iters {
        upd.step(ctx, prob).expect("dictionary update");
    }
    upd.dictionary()
}

/// All-ones masks reproduce the mask-free methods.
pub fn check_identity_mask(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(16, 16);
    let (k, m) = (2, 4);
    let filter = Shape2::new(5, 5);
    let raw = piecewise_images(shape, k, 61);
    let (high, _) = tikhonov_highpass(ctx, shape, raw.data(), 5.0).unwrap();
    let s = Signals::greyscale(shape, k, high).unwrap();
    let id = Mask::identity(shape);
    let init = dict(shape, filter, m, 62);

    // learning traces: FISTA and M-FISTA with W = I
    let mut f_cfg = CdlConfig::new(Method::Fista);
    f_cfg.iters = 200;
    let mut mf_cfg = CdlConfig::new(Method::MFista);
    mf_cfg.iters = 200;
    let tf = cdl_learn(ctx, &s, &init, &f_cfg, None, None).unwrap().trace.objectives();
    let tm = cdl_learn(ctx, &s, &init, &mf_cfg, Some(&id), None).unwrap().trace.objectives();
    let trace_diff = tf.iter().zip(&tm).map(|(a, b)| relative(*b, *a)).fold(0.0, f64::max);

    // fixed coefficient maps from a short learning run
    let mut warm = CdlConfig::new(Method::Ism);
    warm.iters = 20;
    let y = cdl_learn(ctx, &s, &init, &warm, None, None).unwrap().coefficients;
    let prob = DictProblem::new(ctx, &y, m, &s, Some(&id)).unwrap();

    // masked FISTA through the masked gradient matches unmasked FISTA
    let lu = 14.0 * k as f64;
    let mut a = Fista::new(&init, lu, false, true);
    let mut b = Fista::new(&init, lu, true, false);
    let mut fista_step = 0.0f64;
    for _ in 0..100 {
        a.step(ctx, &prob).unwrap();
        b.step(ctx, &prob).unwrap();
        fista_step = fista_step.max(relative(fidelity_at(ctx, &b.dictionary(), &y, &s), fidelity_at(ctx, &a.dictionary(), &y, &s)));
    }

    // converged subproblem objectives after 1000 iterations
    // tight inner tolerance so the comparison measures the outer iterations
    let iters = 1000;
    let cg = CgOptions { rel_tol: 1e-10, max_iter: 200 };
    let (_, sigma_cg) = default_params(Method::Cg, k);
    let (_, sigma_mcg) = default_params(Method::MCg, k);
    let f_cg = fidelity_at(ctx, &run_for(ctx, &mut EqAdmm::new(&init, sigma_cg, LinearSolver::Cg, cg), &prob, iters), &y, &s);
    let f_mcg = fidelity_at(ctx, &run_for(ctx, &mut MaskedBlock::new(&init, k, sigma_mcg, LinearSolver::Cg, cg), &prob, iters), &y, &s);
    let (_, sigma_cns) = default_params(Method::Cns, k);
    let (_, sigma_mcns) = default_params(Method::MCns, k);
    let f_cns = fidelity_at(ctx, &run_for(ctx, &mut Consensus::new(&init, k, sigma_cns, false), &prob, iters), &y, &s);
    let f_mcns = fidelity_at(ctx, &run_for(ctx, &mut MaskedConsensus::new(&init, k, sigma_mcns, false), &prob, iters), &y, &s);
    let (r_mcg, r_mcns) = (relative(f_mcg, f_cg), relative(f_mcns, f_cns));

    // converged sparse coding objectives, masked vs mask-free
    let cfg = CscConfig { iters, rho: 2.2, relax: 1.0, stop: None };
    let (u, _) = csc_admm(ctx, &init, &s, 0.1, cfg, None).unwrap();
    let (mk, _) = csc_admm_masked(ctx, &init, &s, &id, 0.1, cfg, None).unwrap();
    let ou = cbpdn_objective(ctx, &init, &u.y, &s, 0.1, None).unwrap().total;
    let om = cbpdn_objective(ctx, &init, &mk.y0, &s, 0.1, Some(&id)).unwrap().total;
    let r_csc = relative(om, ou);

    let pass = trace_diff <= 1e-10 && fista_step <= 1e-10 && r_mcg <= 1e-6 && r_mcns <= 1e-6 && r_csc <= 1e-6;
    check(
        "identity-mask",
        pass,
        format!(
            "M-FISTA trace {trace_diff:.2e}, masked-gradient FISTA {fista_step:.2e} (tol 1e-10); converged M-CG {r_mcg:.2e}, M-Cns {r_mcns:.2e}, masked CSC {r_csc:.2e} (tol 1e-6)"
        ),
        start,
    )
}

/// Parameter rules for every method.
pub fn check_table(ctx: &Ctx) -> Check {
    let _ = ctx;
    let start = Instant::now();
    let cases: [(Method, usize, f64, f64); 9] = [
        (Method::Cg, 20, 2.2, 17.0),
        (Method::Ism, 20, 2.2, 17.0),
        (Method::Fista, 40, 2.2, 560.0),
        (Method::Cns, 5, 3.0, 2.2),
        (Method::CnsP, 5, 3.0, 2.2),
        (Method::MCns, 5, 2.7, 3.0),
        (Method::MCnsP, 9, 2.7, 3.0),
        (Method::Cg, 1, 2.2, 7.5),
        (Method::Fista, 3, 2.2, 42.0),
    ];
    let bad: Vec<String> = cases
        .iter()
        .filter(|(m, k, r, s)| default_params(*m, *k) != (*r, *s))
        .map(|(m, k, _, _)| format!("{m}@K={k}"))
        .collect();
    check("parameter-rules", bad.is_empty(), if bad.is_empty() { "all entries exact".into() } else { format!("mismatch: {}", bad.join(", ")) }, start)
}

/// Largest `|<d_m shifted, s_k>|` over filters, images and shifts.
pub fn correlation_bound(d: &Dictionary, s: &Signals) -> f64 {
    let shape = s.shape();
    let n = shape.len();
    let (r, c) = (shape.rows, shape.cols);
    let mut best = 0.0f64;
    for k in 0..s.images() {
        let img = s.image(0, k);
        for m in 0..d.filters() {
            let f = d.filter(0, m);
            for i in 0..r {
                for j in 0..c {
                    let mut acc = 0.0;
                    for p in 0..r {
                        for q in 0..c {
                            let fv = f[p * c + q];
                            if fv != 0.0 {
                                acc += fv * img[((p + i) % r) * c + (q + j) % c];
                            }
                        }
                    }
                    best = best.max(acc.abs());
                }
            }
        }
    }
    let _ = n;
    best
}

/// Above the correlation bound the sparse code converges to zero.
pub fn check_large_lambda(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(16, 16);
    let s = noise_signals(shape, 1, 2, 71);
    let d = dict(shape, Shape2::new(4, 4), 4, 72);
    let lambda = 1.2 * correlation_bound(&d, &s);
    let (st, _) = csc_admm(ctx, &d, &s, lambda, CscConfig { iters: 500, rho: 10.0 * lambda, relax: 1.0, stop: None }, None).unwrap();
    let ymax = st.y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    check("large-lambda-zero", ymax <= 1e-8, format!("lambda {lambda:.3}, max |Y| {ymax:.2e} (tol 1e-8)"), start)
}

/// Tikhonov lowpass optimality and exact reconstruction.
pub fn check_tikhonov(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let shape = Shape2::new(16, 16);
    let s = piecewise_images(shape, 2, 81);
    let (h, l) = tikhonov_highpass(ctx, shape, s.data(), 5.0).unwrap();
    let g = tikhonov_gradient(shape, s.data(), &l, 5.0);
    let gmax = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rec = h.iter().zip(&l).zip(s.data()).map(|((a, b), c)| (a + b - c).abs()).fold(0.0, f64::max);
    check("tikhonov-optimality", gmax <= 1e-8 && rec <= 1e-12, format!("gradient {gmax:.2e} (tol 1e-8), reconstruction {rec:.2e} (tol 1e-12)"), start)
}

/// The suite run by `cdl selfcheck`.
pub fn run_all(ctx: &Ctx) -> Vec<Check> {
    vec![
        check_oracle(),
        check_convolution(ctx),
        check_gradients(ctx),
        check_consensus_3d(ctx),
        check_replication(ctx),
        check_identity_mask(ctx),
        check_table(ctx),
        check_large_lambda(ctx),
        check_tikhonov(ctx),
    ]
}
