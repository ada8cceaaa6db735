//! ADMM with the equality split `d = g`, `g` constrained. The `d` step is a
//! rank-K system per bin solved by CG or iterated Sherman-Morrison.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{check_finite, sq_dist, DictProblem, DictStepInfo, DictUpdate, ZERO};
use crate::dictionary::Dictionary;
use crate::error::Result;
use crate::exec::Ctx;
use crate::fft::{bins_to_maps, maps_to_bins};
use crate::linalg::{apply_gram_shift, ism_rows, solve_cg_with, CgOptions, CgWork, IsmWork};

/// Per-bin solver for `(X^H X + rho I) d = b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearSolver {
    /// Conjugate gradient warm-started from the previous solution.
    Cg,
    /// Iterated Sherman-Morrison.
    Ism,
}

/// Solves every bin of one channel. `b` and `d_hat` are `[bin][M]`; `d_hat`
/// holds the warm start on entry. Returns the number of unconverged CG solves.
pub(crate) fn solve_bins(
    prob: &DictProblem,
    rho: f64,
    b: &[Complex64],
    d_hat: &mut [Complex64],
    solver: LinearSolver,
    cg: CgOptions,
) -> Result<usize> {
    let m = prob.filters();
    let mut rows = Vec::with_capacity(prob.images() * m);
    let mut ism = IsmWork::default();
    let mut cgw = CgWork::default();
    let mut unconverged = 0;
    for (f, (bf, xf)) in b.chunks_exact(m).zip(d_hat.chunks_exact_mut(m)).enumerate() {
        prob.gather_rows(f, &mut rows);
        match solver {
            LinearSolver::Ism => ism_rows(&rows, m, rho, bf, xf, &mut ism),
            LinearSolver::Cg => {
                let out = solve_cg_with(|v, o| apply_gram_shift(&rows, m, rho, v, o), bf, xf, cg, &mut cgw)?;
                unconverged += !out.converged as usize;
            }
        }
    }
    Ok(unconverged)
}

/// Equality-constrained ADMM state; `d`, `g`, `h` are `[C][M][N]`.
#[derive(Clone, Debug)]
pub struct EqAdmm {
    template: Dictionary,
    pub sigma: f64,
    pub solver: LinearSolver,
    pub cg: CgOptions,
    pub d: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    d_hat: Vec<Complex64>,
    warm: bool,
}

impl EqAdmm {
    /// `d = g = init`, `h = 0`.
    pub fn new(init: &Dictionary, sigma: f64, solver: LinearSolver, cg: CgOptions) -> Self {
        let len = init.data().len();
        EqAdmm {
            template: init.clone(),
            sigma,
            solver,
            cg,
            d: init.data().to_vec(),
            g: init.data().to_vec(),
            h: vec![0.0; len],
            d_hat: Vec::new(),
            warm: false,
        }
    }
}

impl DictUpdate for EqAdmm {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let shape = prob.shape();
        let (n, m, c) = (shape.len(), prob.filters(), prob.channels());
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
        for cc in 0..c {
            let r = cc * mn..(cc + 1) * mn;
            let t: Vec<f64> = self.g[r.clone()].iter().zip(&self.h[r.clone()]).map(|(g, h)| g - h).collect();
            maps_to_bins(ctx.fft, shape, &t, m, &mut spec);
            for f in 0..n {
                for (b, x) in spec[f * m..(f + 1) * m].iter_mut().zip(prob.xhs(cc, f)) {
                    *b = x + *b * sigma;
                }
            }
            info.cg_unconverged += solve_bins(prob, sigma, &spec, &mut self.d_hat[r.clone()], self.solver, self.cg)?;
            bins_to_maps(ctx.fft, shape, &self.d_hat[r.clone()], m, &mut self.d[r]);
        }
        check_finite(&self.d, "dictionary update")?;
        let g_old = core::mem::take(&mut self.g);
        let mut g: Vec<f64> = self.d.iter().zip(&self.h).map(|(d, h)| d + h).collect();
        info.degenerate = self.template.cset().project_filters(&mut g);
        for ((h, d), g) in self.h.iter_mut().zip(&self.d).zip(&g) {
            *h += d - g;
        }
        info.primal = libm::sqrt(sq_dist(&self.d, &g));
        info.dual = sigma * libm::sqrt(sq_dist(&g, &g_old));
        self.g = g;
        Ok(info)
    }

    fn dictionary(&self) -> Dictionary {
        self.template.with_data(self.g.clone())
    }
}
