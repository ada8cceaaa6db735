//! FISTA with a constant step `1/L` for the dictionary update, optionally
//! with a masked fidelity term.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite, sq_dist, DictProblem, DictStepInfo, DictUpdate, ZERO};
use crate::dictionary::Dictionary;
use crate::error::{CdlError, Result};
use crate::exec::Ctx;
use crate::fft::{bins_to_maps, maps_to_bins};
use crate::mask::Mask;

/// Spatial-domain gradient of `1/2 sum_k ||W_k (X_k d - s_k)||^2` with respect
/// to the zero-padded filters `d` (`[C][M][N]`). With `mask = None` the whole
/// computation stays in the frequency domain.
pub fn grad_dict_fidelity(ctx: &Ctx, prob: &DictProblem, d: &[f64], mask: Option<&Mask>) -> Result<Vec<f64>> {
    let shape = prob.shape();
    let (n, m, c, k) = (shape.len(), prob.filters(), prob.channels(), prob.images());
    let mn = m * n;
    if d.len() != c * mn {
        return Err(CdlError::dim("filter stack does not match the update problem"));
    }
    if let Some(w) = mask {
        w.check_for(shape, k)?;
    }
    let xh = prob.x_hat();
    let mut out = vec![0.0; c * mn];
    let mut dh = vec![ZERO; mn];
    let mut gh = vec![ZERO; mn];
    let mut r = vec![ZERO; n];
    let mut rs = vec![0.0; n];
    for cc in 0..c {
        maps_to_bins(ctx.fft, shape, &d[cc * mn..(cc + 1) * mn], m, &mut dh);
        gh.fill(ZERO);
        match mask {
            None => {
                for f in 0..n {
                    let df = &dh[f * m..(f + 1) * m];
                    let g = &mut gh[f * m..(f + 1) * m];
                    for kk in 0..k {
                        let row = xh.bin(kk, f);
                        let e: Complex64 = row.iter().zip(df).map(|(x, d)| x * d).sum::<Complex64>() - prob.s_hat(cc, kk, f);
                        for (gi, x) in g.iter_mut().zip(row) {
                            *gi += x.conj() * e;
                        }
                    }
                }
            }
            Some(w) => {
                for kk in 0..k {
                    for (f, rf) in r.iter_mut().enumerate() {
                        let df = &dh[f * m..(f + 1) * m];
                        *rf = xh.bin(kk, f).iter().zip(df).map(|(x, d)| x * d).sum::<Complex64>() - prob.s_hat(cc, kk, f);
                    }
                    bins_to_maps(ctx.fft, shape, &r, 1, &mut rs);
                    for (v, wi) in rs.iter_mut().zip(w.weights(kk)) {
                        *v *= wi * wi;
                    }
                    maps_to_bins(ctx.fft, shape, &rs, 1, &mut r);
                    for f in 0..n {
                        let g = &mut gh[f * m..(f + 1) * m];
                        for (gi, x) in g.iter_mut().zip(xh.bin(kk, f)) {
                            *gi += x.conj() * r[f];
                        }
                    }
                }
            }
        }
        bins_to_maps(ctx.fft, shape, &gh, m, &mut out[cc * mn..(cc + 1) * mn]);
    }
    check_finite(&out, "dictionary gradient")?;
    Ok(out)
}

/// `(1 + sqrt(1 + 4 t^2)) / 2`.
pub fn next_momentum(t: f64) -> f64 {
    0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t))
}

/// FISTA state: extrapolated point `d`, feasible iterate `y` (both
/// `[C][M][N]`), momentum `t` and step parameter `L`.
#[derive(Clone, Debug)]
pub struct Fista {
    template: Dictionary,
    pub l: f64,
    pub t: f64,
    pub d: Vec<f64>,
    pub y: Vec<f64>,
    masked: bool,
    fast_path: bool,
}

impl Fista {
    /// `d = y = init`, `t = 1`. With `masked` the mask of the problem enters
    /// the gradient; `fast_path` uses the unmasked gradient for all-ones masks.
    pub fn new(init: &Dictionary, l: f64, masked: bool, fast_path: bool) -> Self {
        Fista { template: init.clone(), l, t: 1.0, d: init.data().to_vec(), y: init.data().to_vec(), masked, fast_path }
    }
}

impl DictUpdate for Fista {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let mask = if self.masked {
            let w = prob.mask().ok_or_else(|| CdlError::param("masked FISTA needs a mask"))?;
            if self.fast_path && w.is_identity() {
                None
            } else {
                Some(w)
            }
        } else {
            None
        };
        let grad = grad_dict_fidelity(ctx, prob, &self.d, mask)?;
        let inv_l = 1.0 / self.l;
        let mut y_new: Vec<f64> = self.d.iter().zip(&grad).map(|(d, g)| d - g * inv_l).collect();
        let degenerate = self.template.cset().project_filters(&mut y_new);
        let t_new = next_momentum(self.t);
        let beta = (self.t - 1.0) / t_new;
        for ((d, yn), yo) in self.d.iter_mut().zip(&y_new).zip(&self.y) {
            *d = yn + beta * (yn - yo);
        }
        let primal = libm::sqrt(sq_dist(&y_new, &self.y));
        self.y = y_new;
        self.t = t_new;
        Ok(DictStepInfo { primal, dual: 0.0, cg_unconverged: 0, degenerate })
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.y.clone())
    }
}
