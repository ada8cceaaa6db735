//! Convolutional sparse coding by ADMM: the mask-free MMV solver, the masked
//! solver based on mask decoupling, and the multi-channel extension (shared
//! coefficient maps, one rank-C system per bin).
//!
//! Coefficient maps are stored `[K][M][N]`. The reported objective is always
//! evaluated at the sparse auxiliary variable `Y` (`Y0` when masked).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dictionary::Dictionary;
use crate::error::{CdlError, Result};
use crate::exec::{for_each_mut, Ctx};
use crate::fft::{bins_to_maps, maps_to_bins, FreqTensor};
use crate::linalg::{ism_rows, rank1_row, IsmWork};
use crate::mask::Mask;
use crate::prox::soft_threshold;
use crate::signals::Signals;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Residual-based stopping thresholds, relative to the iterate scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub primal: f64,
    pub dual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { primal: 1e-4, dual: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CscConfig {
    pub iters: usize,
    pub rho: f64,
    /// Over-relaxation factor in `[1, 2]`; ignored by the masked solver.
    pub relax: f64,
    /// Stop early once both relative residuals fall below these values.
    pub stop: Option<Tolerances>,
}

impl Default for CscConfig {
    fn default() -> Self {
        CscConfig { iters: 100, rho: 2.2, relax: 1.0, stop: None }
    }
}

impl CscConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(CdlError::param("rho must be positive"));
        }
        if !(1.0..=2.0).contains(&self.relax) {
            return Err(CdlError::param("relaxation factor must lie in [1, 2]"));
        }
        Ok(())
    }
}

/// Primal and dual residual norms after one iteration, with the scales used
/// by the relative stopping test.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub primal_scale: f64,
    pub dual_scale: f64,
}

impl Residuals {
    pub fn relative(&self) -> (f64, f64) {
        let rel = |r: f64, s: f64| if s > 0.0 { r / s } else { r };
        (rel(self.primal, self.primal_scale), rel(self.dual, self.dual_scale))
    }

    fn meets(&self, tol: Tolerances) -> bool {
        let (p, d) = self.relative();
        p <= tol.primal && d <= tol.dual
    }
}

/// Mask-free ADMM state, each tensor `[K][M][N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
}

/// Masked ADMM state. `x`, `y0`, `u0` are `[K][M][N]`; the signal-space splits
/// `y1`, `u1` are `[K][C][N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedCoeffState {
    pub x: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CscState {
    Plain(CoeffState),
    Masked(MaskedCoeffState),
}

impl CscState {
    /// The sparse auxiliary coefficient maps (`Y`, or `Y0` when masked).
    pub fn coefficients(&self) -> &[f64] {
        match self {
            CscState::Plain(s) => &s.y,
            CscState::Masked(s) => &s.y0,
        }
    }
}

/// Sparse coding solver bound to one set of training signals. The dictionary
/// may be swapped between iterations, which is how the learning loop drives it.
pub struct CscSolver {
    signals: Signals,
    filters: usize,
    lambda: f64,
    cfg: CscConfig,
    mask: Option<Mask>,
    s_hat: FreqTensor,
    d_hat: FreqTensor,
    /// `sum_c conj(D_c) s_{c,k}` per image, `[K][bin][M]`.
    dhs: Vec<Complex64>,
    state: CscState,
}

struct ImageJob<'a> {
    x: &'a mut [f64],
    y: &'a mut [f64],
    u: &'a mut [f64],
    y1: &'a mut [f64],
    u1: &'a mut [f64],
    res: [f64; 6],
}

impl CscSolver {
    /// Zero-initialised solver. `mask` selects the mask-decoupling iterations.
    pub fn new(
        ctx: &Ctx,
        dict: &Dictionary,
        signals: &Signals,
        lambda: f64,
        cfg: CscConfig,
        mask: Option<&Mask>,
    ) -> Result<Self> {
        cfg.validate()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CdlError::param("lambda must be positive"));
        }
        let shape = signals.shape();
        let (k, c) = (signals.images(), signals.channels());
        if let Some(w) = mask {
            w.check_for(shape, k)?;
        }
        let s_hat = FreqTensor::from_maps(ctx.fft, shape, signals.data(), c * k, 1)?;
        let m = dict.filters();
        let coeff = k * m * shape.len();
        let state = match mask {
            None => CscState::Plain(CoeffState { x: vec![0.0; coeff], y: vec![0.0; coeff], u: vec![0.0; coeff] }),
            Some(_) => CscState::Masked(MaskedCoeffState {
                x: vec![0.0; coeff],
                y0: vec![0.0; coeff],
                y1: vec![0.0; k * c * shape.len()],
                u0: vec![0.0; coeff],
                u1: vec![0.0; k * c * shape.len()],
            }),
        };
        let mut s = CscSolver {
            signals: signals.clone(),
            filters: m,
            lambda,
            cfg,
            mask: mask.cloned(),
            s_hat,
            d_hat: FreqTensor::zeros(shape, c, m),
            dhs: Vec::new(),
            state,
        };
        s.set_dictionary(ctx, dict)?;
        Ok(s)
    }

    /// Replaces the dictionary used by subsequent iterations.
    pub fn set_dictionary(&mut self, ctx: &Ctx, dict: &Dictionary) -> Result<()> {
        let shape = self.signals.shape();
        let (k, c, m) = (self.signals.images(), self.signals.channels(), self.filters);
        if dict.image_shape() != shape || dict.channels() != c || dict.filters() != m {
            return Err(CdlError::dim("dictionary does not match the signals (shape, channels or filter count)"));
        }
        self.d_hat = FreqTensor::from_maps(ctx.fft, shape, dict.data(), c, m)?;
        let n = shape.len();
        let mut dhs = vec![ZERO; k * n * m];
        for kk in 0..k {
            for f in 0..n {
                let out = &mut dhs[(kk * n + f) * m..(kk * n + f + 1) * m];
                for cc in 0..c {
                    let s = self.s_hat.bin(cc * k + kk, f)[0];
                    for (o, d) in out.iter_mut().zip(self.d_hat.bin(cc, f)) {
                        *o += d.conj() * s;
                    }
                }
            }
        }
        self.dhs = dhs;
        Ok(())
    }

    /// Replaces the iterates (warm start).
    pub fn set_state(&mut self, state: CscState) -> Result<()> {
        let same = match (&self.state, &state) {
            (CscState::Plain(a), CscState::Plain(b)) => a.x.len() == b.x.len() && b.y.len() == b.x.len() && b.u.len() == b.x.len(),
            (CscState::Masked(a), CscState::Masked(b)) => {
                a.x.len() == b.x.len()
                    && b.y0.len() == b.x.len()
                    && b.u0.len() == b.x.len()
                    && a.y1.len() == b.y1.len()
                    && b.u1.len() == b.y1.len()
            }
            _ => false,
        };
        if !same {
            return Err(CdlError::dim("warm-start state does not match the problem"));
        }
        self.state = state;
        Ok(())
    }

    pub fn state(&self) -> &CscState {
        &self.state
    }

    pub fn into_state(self) -> CscState {
        self.state
    }

    pub fn coefficients(&self) -> &[f64] {
        self.state.coefficients()
    }

    pub fn config(&self) -> &CscConfig {
        &self.cfg
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn signals(&self) -> &Signals {
        &self.signals
    }

    /// Runs one ADMM iteration. Images are processed as independent jobs.
    pub fn iterate(&mut self, ctx: &Ctx) -> Result<Residuals> {
        let shape = self.signals.shape();
        let n = shape.len();
        let (k, c, m) = (self.signals.images(), self.signals.channels(), self.filters);
        let (rho, alpha, gamma) = (self.cfg.rho, self.cfg.relax, self.lambda / self.cfg.rho);
        let mn = m * n;
        let masked = matches!(self.state, CscState::Masked(_));
        let mut empty0: Vec<f64> = Vec::new();
        let mut empty1: Vec<f64> = Vec::new();
        let (xs, ys, us, y1s, u1s) = match &mut self.state {
            CscState::Plain(s) => (&mut s.x, &mut s.y, &mut s.u, &mut empty0, &mut empty1),
            CscState::Masked(s) => (&mut s.x, &mut s.y0, &mut s.u0, &mut s.y1, &mut s.u1),
        };
        let cn = c * n;
        let mut jobs: Vec<ImageJob> = if masked {
            xs.chunks_exact_mut(mn)
                .zip(ys.chunks_exact_mut(mn))
                .zip(us.chunks_exact_mut(mn))
                .zip(y1s.chunks_exact_mut(cn).zip(u1s.chunks_exact_mut(cn)))
                .map(|(((x, y), u), (y1, u1))| ImageJob { x, y, u, y1, u1, res: [0.0; 6] })
                .collect()
        } else {
            xs.chunks_exact_mut(mn)
                .zip(ys.chunks_exact_mut(mn))
                .zip(us.chunks_exact_mut(mn))
                .map(|((x, y), u)| ImageJob { x, y, u, y1: &mut [], u1: &mut [], res: [0.0; 6] })
                .collect()
        };
        let d_hat = &self.d_hat;
        let dhs = &self.dhs;
        let s_hat = &self.s_hat;
        let signals = &self.signals;
        let mask = self.mask.as_ref();
        let fft = ctx.fft;
        for_each_mut(ctx.exec, &mut jobs, |kk, job| {
            let mut spec = vec![ZERO; mn];
            let mut xh = vec![ZERO; mn];
            let mut rows = vec![ZERO; c * m];
            let mut work = IsmWork::default();
            let solve = |f: usize, r: f64, b: &[Complex64], out: &mut [Complex64], rows: &mut [Complex64], work: &mut IsmWork| {
                if c == 1 {
                    rank1_row(d_hat.bin(0, f), r, b, out);
                } else {
                    for cc in 0..c {
                        rows[cc * m..(cc + 1) * m].copy_from_slice(d_hat.bin(cc, f));
                    }
                    ism_rows(rows, m, r, b, out, work);
                }
            };
            if !masked {
                let tmp: Vec<f64> = job.y.iter().zip(job.u.iter()).map(|(y, u)| y - u).collect();
                maps_to_bins(fft, shape, &tmp, m, &mut spec);
                let base = &dhs[kk * mn..(kk + 1) * mn];
                for (b, d) in spec.iter_mut().zip(base) {
                    *b = d + *b * rho;
                }
                for f in 0..n {
                    solve(f, rho, &spec[f * m..(f + 1) * m], &mut xh[f * m..(f + 1) * m], &mut rows, &mut work);
                }
                bins_to_maps(fft, shape, &xh, m, job.x);
                let mut r = [0.0; 6];
                for ((x, y), u) in job.x.iter().zip(job.y.iter_mut()).zip(job.u.iter_mut()) {
                    let xr = alpha * x + (1.0 - alpha) * *y;
                    let y_new = soft_threshold(xr + *u, gamma);
                    *u += xr - y_new;
                    r[0] += (x - y_new) * (x - y_new);
                    r[1] += (y_new - *y) * (y_new - *y);
                    r[2] += x * x;
                    r[3] += y_new * y_new;
                    r[4] += *u * *u;
                    *y = y_new;
                }
                job.res = r;
                return;
            }
            // masked: (D^H D + I) x = D^H (y1 + s - u1) + (y0 - u0)
            let tmp: Vec<f64> = job.y.iter().zip(job.u.iter()).map(|(y, u)| y - u).collect();
            maps_to_bins(fft, shape, &tmp, m, &mut spec);
            let sig: Vec<f64> = job.y1.iter().zip(job.u1.iter()).map(|(y, u)| y - u).collect();
            let mut sig_hat = vec![ZERO; cn];
            for cc in 0..c {
                // single map, bin-major equals map order
                maps_to_bins(fft, shape, &sig[cc * n..(cc + 1) * n], 1, &mut sig_hat[cc * n..(cc + 1) * n]);
            }
            for f in 0..n {
                let b = &mut spec[f * m..(f + 1) * m];
                for cc in 0..c {
                    let t = sig_hat[cc * n + f] + s_hat.bin(cc * k + kk, f)[0];
                    for (bi, d) in b.iter_mut().zip(d_hat.bin(cc, f)) {
                        *bi += d.conj() * t;
                    }
                }
            }
            for f in 0..n {
                solve(f, 1.0, &spec[f * m..(f + 1) * m], &mut xh[f * m..(f + 1) * m], &mut rows, &mut work);
            }
            bins_to_maps(fft, shape, &xh, m, job.x);
            // D x per channel
            let mut dx = vec![0.0; cn];
            for cc in 0..c {
                let mut acc = vec![ZERO; n];
                for (f, a) in acc.iter_mut().enumerate() {
                    let xf = &xh[f * m..(f + 1) * m];
                    *a = d_hat.bin(cc, f).iter().zip(xf).map(|(d, x)| d * x).sum();
                }
                bins_to_maps(fft, shape, &acc, 1, &mut dx[cc * n..(cc + 1) * n]);
            }
            let mut r = [0.0; 6];
            for ((x, y), u) in job.x.iter().zip(job.y.iter_mut()).zip(job.u.iter_mut()) {
                let y_new = soft_threshold(x + *u, gamma);
                *u += x - y_new;
                r[0] += (x - y_new) * (x - y_new);
                r[1] += (y_new - *y) * (y_new - *y);
                r[2] += x * x;
                r[3] += y_new * y_new;
                r[4] += *u * *u;
                *y = y_new;
            }
            for cc in 0..c {
                let s = signals.image(cc, kk);
                let w = mask.expect("masked state without mask").weights(kk);
                for i in 0..n {
                    let j = cc * n + i;
                    let v = dx[j] - s[i] + job.u1[j];
                    let y1 = rho * v / (w[i] * w[i] + rho);
                    let p = dx[j] - s[i] - y1;
                    job.u1[j] += p;
                    r[0] += p * p;
                    r[1] += (y1 - job.y1[j]) * (y1 - job.y1[j]);
                    r[2] += dx[j] * dx[j];
                    r[3] += y1 * y1 + s[i] * s[i];
                    r[4] += job.u1[j] * job.u1[j];
                    job.y1[j] = y1;
                }
            }
            job.res = r;
        });
        let mut acc = [0.0; 6];
        for job in &jobs {
            for (a, r) in acc.iter_mut().zip(job.res) {
                *a += r;
            }
        }
        let res = Residuals {
            primal: libm::sqrt(acc[0]),
            dual: rho * libm::sqrt(acc[1]),
            primal_scale: libm::sqrt(acc[2]).max(libm::sqrt(acc[3])),
            dual_scale: rho * libm::sqrt(acc[4]),
        };
        if !(res.primal.is_finite() && res.dual.is_finite()) {
            return Err(CdlError::Numerical("sparse coding iterates became non-finite".into()));
        }
        Ok(res)
    }

    /// Runs `cfg.iters` iterations (fewer if the stopping rule triggers).
    pub fn solve(&mut self, ctx: &Ctx) -> Result<Vec<Residuals>> {
        let mut hist = Vec::with_capacity(self.cfg.iters);
        for _ in 0..self.cfg.iters {
            let r = self.iterate(ctx)?;
            hist.push(r);
            if self.cfg.stop.is_some_and(|t| r.meets(t)) {
                break;
            }
        }
        Ok(hist)
    }
}

/// Mask-free CBPDN. Starts from zero unless `warm` is given.
pub fn csc_admm(
    ctx: &Ctx,
    dict: &Dictionary,
    signals: &Signals,
    lambda: f64,
    cfg: CscConfig,
    warm: Option<CoeffState>,
) -> Result<(CoeffState, Vec<Residuals>)> {
    let mut s = CscSolver::new(ctx, dict, signals, lambda, cfg, None)?;
    if let Some(w) = warm {
        s.set_state(CscState::Plain(w))?;
    }
    let hist = s.solve(ctx)?;
    match s.into_state() {
        CscState::Plain(st) => Ok((st, hist)),
        CscState::Masked(_) => unreachable!(),
    }
}

/// Masked CBPDN with data term `1/2 ||W (D x - s)||^2`.
pub fn csc_admm_masked(
    ctx: &Ctx,
    dict: &Dictionary,
    signals: &Signals,
    mask: &Mask,
    lambda: f64,
    cfg: CscConfig,
    warm: Option<MaskedCoeffState>,
) -> Result<(MaskedCoeffState, Vec<Residuals>)> {
    let mut s = CscSolver::new(ctx, dict, signals, lambda, cfg, Some(mask))?;
    if let Some(w) = warm {
        s.set_state(CscState::Masked(w))?;
    }
    let hist = s.solve(ctx)?;
    match s.into_state() {
        CscState::Masked(st) => Ok((st, hist)),
        CscState::Plain(_) => unreachable!(),
    }
}

/// Multi-channel CBPDN with coefficient maps shared across channels.
pub fn csc_multichannel(
    ctx: &Ctx,
    dict: &Dictionary,
    signals: &Signals,
    lambda: f64,
    cfg: CscConfig,
) -> Result<(CoeffState, Vec<Residuals>)> {
    csc_admm(ctx, dict, signals, lambda, cfg, None)
}

/// `sum_m d_{c,m} * x_{k,m}` for every channel and image, `[C][K][N]`.
pub fn reconstruct(ctx: &Ctx, dict: &Dictionary, coeffs: &[f64], images: usize) -> Result<Vec<f64>> {
    let shape = dict.image_shape();
    let (n, m, c) = (shape.len(), dict.filters(), dict.channels());
    if coeffs.len() != images * m * n {
        return Err(CdlError::dim("coefficient length differs from K*M*N"));
    }
    let d_hat = FreqTensor::from_maps(ctx.fft, shape, dict.data(), c, m)?;
    let x_hat = FreqTensor::from_maps(ctx.fft, shape, coeffs, images, m)?;
    let mut out = vec![0.0; c * images * n];
    let mut acc = vec![ZERO; n];
    for cc in 0..c {
        for kk in 0..images {
            for (f, a) in acc.iter_mut().enumerate() {
                *a = d_hat.bin(cc, f).iter().zip(x_hat.bin(kk, f)).map(|(d, x)| d * x).sum();
            }
            let o = (cc * images + kk) * n;
            bins_to_maps(ctx.fft, shape, &acc, 1, &mut out[o..o + n]);
        }
    }
    Ok(out)
}

/// CBPDN objective pieces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    /// `fidelity + lambda * l1`.
    pub total: f64,
    /// `1/2 sum ||W (D x - s)||^2`.
    pub fidelity: f64,
    /// `||x||_1` (not multiplied by lambda).
    pub l1: f64,
}

/// Evaluates the (optionally masked) CBPDN objective.
pub fn cbpdn_objective(
    ctx: &Ctx,
    dict: &Dictionary,
    coeffs: &[f64],
    signals: &Signals,
    lambda: f64,
    mask: Option<&Mask>,
) -> Result<Objective> {
    let k = signals.images();
    if dict.image_shape() != signals.shape() || dict.channels() != signals.channels() {
        return Err(CdlError::dim("dictionary does not match the signals"));
    }
    if let Some(w) = mask {
        w.check_for(signals.shape(), k)?;
    }
    let rec = reconstruct(ctx, dict, coeffs, k)?;
    let n = signals.shape().len();
    let mut fid = 0.0;
    for (j, (r, s)) in rec.iter().zip(signals.data()).enumerate() {
        let e = r - s;
        let w = match mask {
            Some(w) => w.weights((j / n) % k)[j % n],
            None => 1.0,
        };
        fid += (w * e) * (w * e);
    }
    let fidelity = 0.5 * fid;
    let l1: f64 = coeffs.iter().map(|v| v.abs()).sum();
    Ok(Objective { total: fidelity + lambda * l1, fidelity, l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::Shape2;
    use crate::prox::NormMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(shape: Shape2, k: usize, m: usize, c: usize, seed: u64) -> (Dictionary, Signals) {
        let d = Dictionary::random(shape, Shape2::new(3, 3), m, c, NormMode::UnitEquality, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let s = (0..c * k * shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        (d, Signals::new(shape, c, k, s).unwrap())
    }

    fn cfg(iters: usize) -> CscConfig {
        CscConfig { iters, rho: 1.0, relax: 1.0, stop: None }
    }

    #[test]
    fn zero_signal_is_a_fixed_point() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(6, 6), 2, 3, 1, 1);
        let z = Signals::greyscale(s.shape(), 2, vec![0.0; 72]).unwrap();
        let (st, _) = csc_admm(&ctx, &d, &z, 0.1, cfg(5), None).unwrap();
        assert!(st.x.iter().chain(&st.y).chain(&st.u).all(|&v| v == 0.0));
        assert_eq!(s.images(), 2);
    }

    #[test]
    fn impulse_dictionary_gives_soft_threshold() {
        let ctx = Ctx::reference();
        let shape = Shape2::new(5, 4);
        let cset = crate::prox::ConstraintSet::new(shape, Shape2::new(1, 1), NormMode::UnitEquality).unwrap();
        let mut dd = vec![0.0; 20];
        dd[0] = 1.0;
        let d = Dictionary::new(cset, 1, 1, dd).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sv: Vec<f64> = (0..20).map(|_| rng.random_range(-2.0..2.0)).collect();
        let s = Signals::greyscale(shape, 1, sv.clone()).unwrap();
        let (st, _) = csc_admm(&ctx, &d, &s, 0.3, cfg(300), None).unwrap();
        for (y, v) in st.y.iter().zip(&sv) {
            assert!((y - soft_threshold(*v, 0.3)).abs() <= 1e-6);
        }
    }

    #[test]
    fn multichannel_single_channel_is_identical() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(6, 5), 2, 3, 1, 7);
        let a = csc_admm(&ctx, &d, &s, 0.1, cfg(10), None).unwrap();
        let b = csc_multichannel(&ctx, &d, &s, 0.1, cfg(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_channels_double_the_data_term() {
        // two identical channels: (2 D^H D + rho I) x = 2 D^H s + rho (y - u)
        let ctx = Ctx::reference();
        let (d1, s1) = problem(Shape2::new(6, 6), 1, 2, 1, 9);
        let mut dd = d1.data().to_vec();
        dd.extend_from_slice(d1.data());
        let d2 = d1.with_channels(2, dd);
        let mut sd = s1.data().to_vec();
        sd.extend_from_slice(s1.data());
        let s2 = Signals::new(s1.shape(), 2, 1, sd).unwrap();
        let (st, _) = csc_multichannel(&ctx, &d2, &s2, 0.1, cfg(1)).unwrap();
        let n = 36;
        let dh = FreqTensor::from_maps(ctx.fft, s1.shape(), d1.data(), 1, 2).unwrap();
        let sh = FreqTensor::from_maps(ctx.fft, s1.shape(), s1.data(), 1, 1).unwrap();
        let xh = FreqTensor::from_maps(ctx.fft, s1.shape(), &st.x, 1, 2).unwrap();
        for f in 0..n {
            let row = dh.bin(0, f);
            let rows2: Vec<Complex64> = row.iter().chain(row.iter()).copied().collect();
            let g = crate::linalg::gram_shift_dense(&rows2, 2, 1.0);
            let b: Vec<Complex64> = row.iter().map(|v| v.conj() * sh.bin(0, f)[0] * 2.0).collect();
            let want = crate::linalg::dense_oracle_solve(&g, &b).unwrap();
            for (x, w) in xh.bin(0, f).iter().zip(&want) {
                assert!((x - w).norm() <= 1e-10 * (1.0 + w.norm()));
            }
        }
    }

    #[test]
    fn x_step_satisfies_normal_equations() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(6, 6), 2, 3, 1, 11);
        let rho = 1.7;
        let mut solver = CscSolver::new(&ctx, &d, &s, 0.2, CscConfig { rho, ..cfg(1) }, None).unwrap();
        solver.iterate(&ctx).unwrap();
        let CscState::Plain(prev) = solver.state().clone() else { unreachable!() };
        solver.iterate(&ctx).unwrap();
        let CscState::Plain(now) = solver.state().clone() else { unreachable!() };
        let shape = s.shape();
        let dh = FreqTensor::from_maps(ctx.fft, shape, d.data(), 1, 3).unwrap();
        let sh = FreqTensor::from_maps(ctx.fft, shape, s.data(), 2, 1).unwrap();
        let xh = FreqTensor::from_maps(ctx.fft, shape, &now.x, 2, 3).unwrap();
        let zu: Vec<f64> = prev.y.iter().zip(&prev.u).map(|(y, u)| y - u).collect();
        let zh = FreqTensor::from_maps(ctx.fft, shape, &zu, 2, 3).unwrap();
        for k in 0..2 {
            for f in 0..36 {
                let a = dh.bin(0, f);
                let x = xh.bin(k, f);
                let ax: Complex64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
                let mut num = 0.0;
                let mut den = 0.0;
                for m in 0..3 {
                    let lhs = a[m].conj() * ax + x[m] * rho;
                    let rhs = a[m].conj() * sh.bin(k, f)[0] + zh.bin(k, f)[m] * rho;
                    num += (lhs - rhs).norm_sqr();
                    den += rhs.norm_sqr();
                }
                assert!((num / den.max(1e-300)).sqrt() <= 1e-10);
            }
        }
    }

    #[test]
    fn y_step_is_soft_threshold_of_x_plus_u() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(6, 6), 1, 2, 1, 13);
        let rho = 1.3;
        let mut solver = CscSolver::new(&ctx, &d, &s, 0.2, CscConfig { rho, ..cfg(1) }, None).unwrap();
        for _ in 0..3 {
            let CscState::Plain(prev) = solver.state().clone() else { unreachable!() };
            solver.iterate(&ctx).unwrap();
            let CscState::Plain(now) = solver.state().clone() else { unreachable!() };
            for i in 0..now.x.len() {
                assert_eq!(now.y[i], soft_threshold(now.x[i] + prev.u[i], 0.2 / rho));
            }
        }
    }

    #[test]
    fn masked_zero_weights_give_zero_code() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(6, 6), 2, 2, 1, 3);
        let w = Mask::shared(s.shape(), vec![0.0; 36]).unwrap();
        let (st, _) = csc_admm_masked(&ctx, &d, &s, &w, 0.1, cfg(50), None).unwrap();
        assert!(st.y0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masked_y1_step_halves_for_unit_weights() {
        // with w = 1 and rho = 1 the signal split is half its argument
        let w = 1.0f64;
        let rho = 1.0;
        let r = 0.37;
        assert_eq!(rho * r / (w * w + rho), r / 2.0);
    }

    #[test]
    fn objective_examples() {
        let ctx = Ctx::reference();
        let (d, s) = problem(Shape2::new(5, 5), 2, 2, 1, 5);
        let z = vec![0.0; 2 * 2 * 25];
        let o = cbpdn_objective(&ctx, &d, &z, &s, 0.1, None).unwrap();
        let ss: f64 = s.data().iter().map(|v| v * v).sum();
        assert!((o.total - 0.5 * ss).abs() <= 1e-12 * ss);
        let w = make_mask(25);
        let o = cbpdn_objective(&ctx, &d, &z, &s, 0.1, Some(&w)).unwrap();
        let ws: f64 = s.data().iter().enumerate().map(|(i, v)| (w.data()[i % 25] * v).powi(2)).sum();
        assert!((o.total - 0.5 * ws).abs() <= 1e-12 * ws);
    }

    fn make_mask(n: usize) -> Mask {
        Mask::shared(Shape2::new(5, 5), (0..n).map(|i| (i % 3) as f64 * 0.5).collect()).unwrap()
    }
}
