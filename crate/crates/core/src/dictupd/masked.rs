//! Masked dictionary updates built on the mask-decoupling split
//! `g0 = d` (constrained) and `g1 = X d - s` (weighted):
//! [`MaskedBlock`] solves one rank-K system per bin, [`MaskedConsensus`]
//! keeps one dictionary copy per image as in consensus ADMM.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::consensus::ordered_mean;
use super::eqadmm::{solve_bins, LinearSolver};
use super::{check_finite, sq_dist, DictProblem, DictStepInfo, DictUpdate, ZERO};
use crate::dictionary::Dictionary;
use crate::error::{CdlError, Result};
use crate::exec::{for_each_mut, Ctx};
use crate::fft::{bins_to_maps, maps_to_bins};
use crate::linalg::{rank1_row, CgOptions};

fn mask_of<'p>(prob: &'p DictProblem) -> Result<&'p crate::mask::Mask> {
    prob.mask().ok_or_else(|| CdlError::param("masked dictionary update needs a mask"))
}

/// `X_k d` for one image from the filter spectrum `[bin][M]`.
fn apply_coeffs(ctx: &Ctx, prob: &DictProblem, k: usize, dh: &[Complex64], out: &mut [f64]) {
    let (n, m) = (prob.shape().len(), prob.filters());
    let mut acc = vec![ZERO; n];
    for (f, a) in acc.iter_mut().enumerate() {
        *a = prob.x_hat().bin(k, f).iter().zip(&dh[f * m..(f + 1) * m]).map(|(x, d)| x * d).sum();
    }
    bins_to_maps(ctx.fft, prob.shape(), &acc, 1, out);
}

/// Signal-split update for one image and channel: returns the squared
/// primal and dual contributions.
fn update_signal_split(xd: &[f64], s: &[f64], w: &[f64], sigma: f64, g1: &mut [f64], h1: &mut [f64]) -> (f64, f64) {
    let (mut p, mut q) = (0.0, 0.0);
    for i in 0..xd.len() {
        let v = sigma * (xd[i] - s[i] + h1[i]) / (w[i] * w[i] + sigma);
        let r = xd[i] - v - s[i];
        h1[i] += r;
        p += r * r;
        q += (v - g1[i]) * (v - g1[i]);
        g1[i] = v;
    }
    (p, q)
}

/// Block-constraint ADMM. `d`, `g0`, `h0` are `[C][M][N]`; `g1`, `h1` are
/// `[C][K][N]`.
#[derive(Clone, Debug)]
pub struct MaskedBlock {
    template: Dictionary,
    pub sigma: f64,
    pub solver: LinearSolver,
    pub cg: CgOptions,
    pub d: Vec<f64>,
    pub g0: Vec<f64>,
    pub h0: Vec<f64>,
    pub g1: Vec<f64>,
    pub h1: Vec<f64>,
    d_hat: Vec<Complex64>,
    warm: bool,
}

impl MaskedBlock {
    /// `d = g0 = init`; `h0`, `g1`, `h1` zero.
    pub fn new(init: &Dictionary, images: usize, sigma: f64, solver: LinearSolver, cg: CgOptions) -> Self {
        let sig = init.channels() * images * init.image_shape().len();
        MaskedBlock {
            template: init.clone(),
            sigma,
            solver,
            cg,
            d: init.data().to_vec(),
            g0: init.data().to_vec(),
            h0: vec![0.0; init.data().len()],
            g1: vec![0.0; sig],
            h1: vec![0.0; sig],
            d_hat: Vec::new(),
            warm: false,
        }
    }
}

impl DictUpdate for MaskedBlock {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let w = mask_of(prob)?;
        let shape = prob.shape();
        let (n, m, c, k) = (shape.len(), prob.filters(), prob.channels(), prob.images());
        if self.g1.len() != c * k * n {
            return Err(CdlError::dim("masked state was built for a different image count"));
        }
        let mn = m * n;
        let sigma = self.sigma;
        if !self.warm {
            self.d_hat = vec![ZERO; c * mn];
            for cc in 0..c {
                maps_to_bins(ctx.fft, shape, &self.d[cc * mn..(cc + 1) * mn], m, &mut self.d_hat[cc * mn..(cc + 1) * mn]);
            }
            self.warm = true;
        }
        let mut info = DictStepInfo::default();
        let mut spec = vec![ZERO; mn];
        let mut th = vec![ZERO; n];
        let mut xd = vec![0.0; c * k * n];
        for cc in 0..c {
            let r = cc * mn..(cc + 1) * mn;
            // (X^H X + I) d = X^H (g1 + s - h1) + (g0 - h0)
            let t: Vec<f64> = self.g0[r.clone()].iter().zip(&self.h0[r.clone()]).map(|(g, h)| g - h).collect();
            maps_to_bins(ctx.fft, shape, &t, m, &mut spec);
            for kk in 0..k {
                let o = (cc * k + kk) * n;
                let s = prob.signals().image(cc, kk);
                let v: Vec<f64> = (0..n).map(|i| self.g1[o + i] + s[i] - self.h1[o + i]).collect();
                maps_to_bins(ctx.fft, shape, &v, 1, &mut th);
                for f in 0..n {
                    for (b, x) in spec[f * m..(f + 1) * m].iter_mut().zip(prob.x_hat().bin(kk, f)) {
                        *b += x.conj() * th[f];
                    }
                }
            }
            info.cg_unconverged += solve_bins(prob, 1.0, &spec, &mut self.d_hat[r.clone()], self.solver, self.cg)?;
            bins_to_maps(ctx.fft, shape, &self.d_hat[r.clone()], m, &mut self.d[r.clone()]);
            for kk in 0..k {
                let o = (cc * k + kk) * n;
                apply_coeffs(ctx, prob, kk, &self.d_hat[r.clone()], &mut xd[o..o + n]);
            }
        }
        check_finite(&self.d, "masked dictionary update")?;
        let g0_old = core::mem::take(&mut self.g0);
        let mut g0: Vec<f64> = self.d.iter().zip(&self.h0).map(|(d, h)| d + h).collect();
        info.degenerate = self.template.cset().project_filters(&mut g0);
        for ((h, d), g) in self.h0.iter_mut().zip(&self.d).zip(&g0) {
            *h += d - g;
        }
        let (mut p, mut q) = (sq_dist(&self.d, &g0), sq_dist(&g0, &g0_old));
        for cc in 0..c {
            for kk in 0..k {
                let o = (cc * k + kk) * n;
                let (a, b) = update_signal_split(
                    &xd[o..o + n],
                    prob.signals().image(cc, kk),
                    w.weights(kk),
                    sigma,
                    &mut self.g1[o..o + n],
                    &mut self.h1[o..o + n],
                );
                p += a;
                q += b;
            }
        }
        self.g0 = g0;
        info.primal = libm::sqrt(p);
        info.dual = sigma * libm::sqrt(q);
        Ok(info)
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.g0.clone())
    }
}

/// Extended consensus. `dk`, `h0k` are `[K][C][M][N]`, `g1`, `h1` are
/// `[K][C][N]`, and the shared `g0` is `[C][M][N]`.
#[derive(Clone, Debug)]
pub struct MaskedConsensus {
    template: Dictionary,
    pub sigma: f64,
    pub parallel: bool,
    pub dk: Vec<f64>,
    pub h0k: Vec<f64>,
    pub g0: Vec<f64>,
    pub g1: Vec<f64>,
    pub h1: Vec<f64>,
}

impl MaskedConsensus {
    pub fn new(init: &Dictionary, images: usize, sigma: f64, parallel: bool) -> Self {
        let len = init.data().len();
        let mut dk = Vec::with_capacity(images * len);
        for _ in 0..images {
            dk.extend_from_slice(init.data());
        }
        let sig = images * init.channels() * init.image_shape().len();
        MaskedConsensus {
            template: init.clone(),
            sigma,
            parallel,
            dk,
            h0k: vec![0.0; images * len],
            g0: init.data().to_vec(),
            g1: vec![0.0; sig],
            h1: vec![0.0; sig],
        }
    }
}

struct ImageJob<'a> {
    d: &'a mut [f64],
    h0: &'a mut [f64],
    g1: &'a mut [f64],
    h1: &'a mut [f64],
    res: (f64, f64),
}

impl DictUpdate for MaskedConsensus {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let w = mask_of(prob)?;
        let shape = prob.shape();
        let (n, m, c, k) = (shape.len(), prob.filters(), prob.channels(), prob.images());
        let len = self.g0.len();
        if self.dk.len() != k * len {
            return Err(CdlError::dim("extended consensus state was built for a different image count"));
        }
        let (mn, cn) = (m * n, c * n);
        let sigma = self.sigma;
        let exec = if self.parallel { ctx.exec } else { ctx.serial().exec };
        let g0 = &self.g0;
        let mut jobs: Vec<ImageJob> = self
            .dk
            .chunks_exact_mut(len)
            .zip(self.h0k.chunks_exact_mut(len))
            .zip(self.g1.chunks_exact_mut(cn).zip(self.h1.chunks_exact_mut(cn)))
            .map(|((d, h0), (g1, h1))| ImageJob { d, h0, g1, h1, res: (0.0, 0.0) })
            .collect();
        for_each_mut(exec, &mut jobs, |kk, job| {
            let mut spec = vec![ZERO; mn];
            let mut out = vec![ZERO; mn];
            let mut th = vec![ZERO; n];
            let mut xd = vec![0.0; n];
            let mut res = (0.0, 0.0);
            for cc in 0..c {
                let r = cc * mn..(cc + 1) * mn;
                let t: Vec<f64> = g0[r.clone()].iter().zip(&job.h0[r.clone()]).map(|(g, h)| g - h).collect();
                maps_to_bins(ctx.fft, shape, &t, m, &mut spec);
                let s = prob.signals().image(cc, kk);
                let o = cc * n;
                let v: Vec<f64> = (0..n).map(|i| job.g1[o + i] + s[i] - job.h1[o + i]).collect();
                maps_to_bins(ctx.fft, shape, &v, 1, &mut th);
                for f in 0..n {
                    let row = prob.x_hat().bin(kk, f);
                    let b = &mut spec[f * m..(f + 1) * m];
                    for (bi, x) in b.iter_mut().zip(row) {
                        *bi += x.conj() * th[f];
                    }
                    rank1_row(row, 1.0, b, &mut out[f * m..(f + 1) * m]);
                }
                bins_to_maps(ctx.fft, shape, &out, m, &mut job.d[r]);
                apply_coeffs(ctx, prob, kk, &out, &mut xd);
                let (a, b) = update_signal_split(&xd, s, w.weights(kk), sigma, &mut job.g1[o..o + n], &mut job.h1[o..o + n]);
                res.0 += a;
                res.1 += b;
            }
            job.res = res;
        });
        let (mut p, mut q) = (0.0, 0.0);
        for job in &jobs {
            p += job.res.0;
            q += job.res.1;
        }
        drop(jobs);
        check_finite(&self.dk, "extended consensus dictionary copies")?;
        let mut g_new = ordered_mean(
            len,
            self.dk.iter().zip(&self.h0k).enumerate().map(|(i, (d, h))| (i % len, d + h)),
            k,
        );
        let degenerate = self.template.cset().project_filters(&mut g_new);
        for (d, h) in self.dk.chunks_exact(len).zip(self.h0k.chunks_exact_mut(len)) {
            for ((hi, di), gi) in h.iter_mut().zip(d).zip(&g_new) {
                *hi += di - gi;
            }
            p += sq_dist(d, &g_new);
        }
        q += k as f64 * sq_dist(&g_new, &self.g0);
        self.g0 = g_new;
        Ok(DictStepInfo { primal: libm::sqrt(p), dual: sigma * libm::sqrt(q), cg_unconverged: 0, degenerate })
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.g0.clone())
    }
}
