//! The training set as one 3D volume (image index as third axis) with
//! filters confined to the first slice. The `d` step is rank one per bin of
//! the 3D DFT.

use alloc::vec;
use alloc::vec::Vec;

use super::{check_finite, sq_dist, DictProblem, DictStepInfo, DictUpdate};
use crate::dictionary::Dictionary;
use crate::error::{CdlError, Result};
use crate::exec::Ctx;
use crate::fft::{Direction, FreqTensor};
use crate::linalg::rank1_row;

/// 3D state. `d`, `g`, `h` are filter volumes `[C][K][M][N]` (slice `k`
/// of filter `m` at `[c][k][m]`).
#[derive(Clone, Debug)]
pub struct ThreeD {
    template: Dictionary,
    images: usize,
    pub sigma: f64,
    pub d: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl ThreeD {
    /// First slice set to `init`, other slices zero, duals zero.
    pub fn new(init: &Dictionary, images: usize, sigma: f64) -> Self {
        let mn = init.filters() * init.image_shape().len();
        let mut g = vec![0.0; init.data().len() * images];
        for c in 0..init.channels() {
            g[c * images * mn..c * images * mn + mn].copy_from_slice(init.channel(c));
        }
        ThreeD { template: init.clone(), images, sigma, d: g.clone(), h: vec![0.0; g.len()], g }
    }

    /// The slice-0 filters of the consensus variable, `[C][M][N]`.
    fn first_slice(&self, v: &[f64]) -> Vec<f64> {
        let mn = self.template.filters() * self.template.image_shape().len();
        let mut out = Vec::with_capacity(self.template.data().len());
        for c in 0..self.template.channels() {
            out.extend_from_slice(&v[c * self.images * mn..c * self.images * mn + mn]);
        }
        out
    }
}

impl DictUpdate for ThreeD {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let (k, c, m) = (prob.images(), prob.channels(), prob.filters());
        if k != self.images {
            return Err(CdlError::dim("3D state was built for a different image count"));
        }
        let shape = prob.shape();
        let n = shape.len();
        let vol = k * m * n;
        let sigma = self.sigma;
        let mut x3 = prob.x_hat().clone();
        x3.transform_batch_axis(ctx.fft, Direction::Forward);
        for cc in 0..c {
            let mut s3 = FreqTensor::zeros(shape, k, 1);
            for kk in 0..k {
                for f in 0..n {
                    s3.bin_mut(kk, f)[0] = prob.s_hat(cc, kk, f);
                }
            }
            s3.transform_batch_axis(ctx.fft, Direction::Forward);
            let r = cc * vol..(cc + 1) * vol;
            let t: Vec<f64> = self.g[r.clone()].iter().zip(&self.h[r.clone()]).map(|(g, h)| g - h).collect();
            let mut b = FreqTensor::from_maps(ctx.fft, shape, &t, k, m)?;
            b.transform_batch_axis(ctx.fft, Direction::Forward);
            let mut dh = FreqTensor::zeros(shape, k, m);
            for kk in 0..k {
                for f in 0..n {
                    let row = x3.bin(kk, f);
                    let s = s3.bin(kk, f)[0];
                    let bf = b.bin_mut(kk, f);
                    for (bi, x) in bf.iter_mut().zip(row) {
                        *bi = x.conj() * s + *bi * sigma;
                    }
                    rank1_row(row, sigma, b.bin(kk, f), dh.bin_mut(kk, f));
                }
            }
            dh.transform_batch_axis(ctx.fft, Direction::Inverse);
            self.d[r].copy_from_slice(&dh.to_maps(ctx.fft));
        }
        check_finite(&self.d, "3D dictionary")?;
        // slice 0 onto the constraint set, the remaining slices to zero
        let mn = m * n;
        let mut g_new: Vec<f64> = self.d.iter().zip(&self.h).map(|(d, h)| d + h).collect();
        let mut degenerate = 0;
        for cc in 0..c {
            let v = &mut g_new[cc * vol..(cc + 1) * vol];
            degenerate += self.template.cset().project_filters(&mut v[..mn]);
            v[mn..].fill(0.0);
        }
        for ((h, d), g) in self.h.iter_mut().zip(&self.d).zip(&g_new) {
            *h += d - g;
        }
        let primal = libm::sqrt(sq_dist(&self.d, &g_new));
        let dual = sigma * libm::sqrt(sq_dist(&g_new, &self.g));
        self.g = g_new;
        Ok(DictStepInfo { primal, dual, cg_unconverged: 0, degenerate })
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.first_slice(&self.g))
    }
}
