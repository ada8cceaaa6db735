//! ADMM consensus: one dictionary copy per image, each with a rank-one
//! system per bin, tied together by averaging in the `g` step.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_finite, sq_dist, DictProblem, DictStepInfo, DictUpdate, ZERO};
use crate::dictionary::Dictionary;
use crate::error::{CdlError, Result};
use crate::exec::{for_each_mut, Ctx};
use crate::fft::{bins_to_maps, maps_to_bins};
use crate::linalg::rank1_row;

/// Sums `parts` (each of length `len`) in ascending order and divides by
/// their count.
pub(crate) fn ordered_mean(len: usize, parts: impl Iterator<Item = (usize, f64)>, count: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len];
    for (i, v) in parts {
        acc[i] += v;
    }
    let k = count as f64;
    for a in acc.iter_mut() {
        *a /= k;
    }
    acc
}

/// Consensus state. `dk`, `hk` are `[K][C][M][N]`; `g` is `[C][M][N]`.
#[derive(Clone, Debug)]
pub struct Consensus {
    template: Dictionary,
    pub sigma: f64,
    pub parallel: bool,
    pub dk: Vec<f64>,
    pub hk: Vec<f64>,
    pub g: Vec<f64>,
}

impl Consensus {
    /// Every copy starts at `init`, duals at zero.
    pub fn new(init: &Dictionary, images: usize, sigma: f64, parallel: bool) -> Self {
        let len = init.data().len();
        let mut dk = Vec::with_capacity(images * len);
        for _ in 0..images {
            dk.extend_from_slice(init.data());
        }
        Consensus { template: init.clone(), sigma, parallel, dk, hk: vec![0.0; images * len], g: init.data().to_vec() }
    }
}

impl DictUpdate for Consensus {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let shape = prob.shape();
        let (n, m, c, k) = (shape.len(), prob.filters(), prob.channels(), prob.images());
        let len = self.g.len();
        if self.dk.len() != k * len {
            return Err(CdlError::dim("consensus state was built for a different image count"));
        }
        let sigma = self.sigma;
        let mn = m * n;
        let exec = if self.parallel { ctx.exec } else { ctx.serial().exec };
        let g = &self.g;
        let fft = ctx.fft;
        let mut jobs: Vec<(&mut [f64], &mut [f64])> =
            self.dk.chunks_exact_mut(len).zip(self.hk.chunks_exact_mut(len)).collect();
        for_each_mut(exec, &mut jobs, |kk, (d, h)| {
            let mut spec = vec![ZERO; mn];
            let mut out = vec![ZERO; mn];
            for cc in 0..c {
                let r = cc * mn..(cc + 1) * mn;
                let t: Vec<f64> = g[r.clone()].iter().zip(&h[r.clone()]).map(|(g, h)| g - h).collect();
                maps_to_bins(fft, shape, &t, m, &mut spec);
                for f in 0..n {
                    let row = prob.x_hat().bin(kk, f);
                    let s = prob.s_hat(cc, kk, f);
                    let b = &mut spec[f * m..(f + 1) * m];
                    for (bi, x) in b.iter_mut().zip(row) {
                        *bi = x.conj() * s + *bi * sigma;
                    }
                    rank1_row(row, sigma, b, &mut out[f * m..(f + 1) * m]);
                }
                bins_to_maps(fft, shape, &out, m, &mut d[r]);
            }
        });
        check_finite(&self.dk, "consensus dictionary copies")?;
        let mut g_new = ordered_mean(
            len,
            self.dk.iter().zip(&self.hk).enumerate().map(|(i, (d, h))| (i % len, d + h)),
            k,
        );
        let degenerate = self.template.cset().project_filters(&mut g_new);
        let mut primal = 0.0;
        for (d, h) in self.dk.chunks_exact(len).zip(self.hk.chunks_exact_mut(len)) {
            for ((hi, di), gi) in h.iter_mut().zip(d).zip(&g_new) {
                *hi += di - gi;
            }
            primal += sq_dist(d, &g_new);
        }
        let dual = sigma * libm::sqrt(k as f64 * sq_dist(&g_new, &self.g));
        self.g = g_new;
        Ok(DictStepInfo { primal: libm::sqrt(primal), dual, cg_unconverged: 0, degenerate })
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.g.clone())
    }
}
