//! Dictionary updates for fixed coefficient maps.
//!
//! Every method keeps its iterates across calls to [`DictUpdate::step`], so
//! the learning loop can alternate single iterations with sparse coding.
//! [`DictUpdate::dictionary`] returns the feasible variable (`g`, `g0` or the
//! FISTA `y`), which is the one handed to sparse coding.
//!
//! Multi-channel dictionaries are updated channel by channel against the
//! shared coefficient maps; channels never interact.

mod consensus;
mod eqadmm;
mod fista;
mod masked;
mod three_d;
mod tiling;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

pub use consensus::Consensus;
pub use eqadmm::{EqAdmm, LinearSolver};
pub use fista::{grad_dict_fidelity, Fista};
pub use masked::{MaskedBlock, MaskedConsensus};
pub use three_d::ThreeD;
pub use tiling::{tile_training_set, tiled_shape, Tiled};

use crate::dictionary::Dictionary;
use crate::dims::Shape2;
use crate::error::{CdlError, Result};
use crate::exec::Ctx;
use crate::fft::FreqTensor;
use crate::linalg::CgOptions;
use crate::mask::Mask;
use crate::signals::Signals;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fixed inputs of a dictionary update: coefficient maps `[K][M][N]`, the
/// training signals and an optional mask, with their spectra.
pub struct DictProblem<'a> {
    coeffs: &'a [f64],
    signals: &'a Signals,
    mask: Option<&'a Mask>,
    filters: usize,
    x_hat: FreqTensor,
    s_hat: FreqTensor,
    /// `sum_k conj(X_k) s_{c,k}`, `[C][bin][M]`.
    xhs: Vec<Complex64>,
}

impl<'a> DictProblem<'a> {
    pub fn new(ctx: &Ctx, coeffs: &'a [f64], filters: usize, signals: &'a Signals, mask: Option<&'a Mask>) -> Result<Self> {
        let shape = signals.shape();
        let (k, c, n) = (signals.images(), signals.channels(), shape.len());
        if filters == 0 || coeffs.len() != k * filters * n {
            return Err(CdlError::dim("coefficient maps do not match K*M*N"));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(CdlError::Numerical("coefficient maps are not finite".into()));
        }
        if let Some(w) = mask {
            w.check_for(shape, k)?;
        }
        let x_hat = FreqTensor::from_maps(ctx.fft, shape, coeffs, k, filters)?;
        let s_hat = FreqTensor::from_maps(ctx.fft, shape, signals.data(), c * k, 1)?;
        let m = filters;
        let mut xhs = vec![ZERO; c * n * m];
        for cc in 0..c {
            for f in 0..n {
                let out = &mut xhs[(cc * n + f) * m..(cc * n + f + 1) * m];
                for kk in 0..k {
                    let s = s_hat.bin(cc * k + kk, f)[0];
                    for (o, x) in out.iter_mut().zip(x_hat.bin(kk, f)) {
                        *o += x.conj() * s;
                    }
                }
            }
        }
        Ok(DictProblem { coeffs, signals, mask, filters, x_hat, s_hat, xhs })
    }

    pub fn shape(&self) -> Shape2 {
        self.signals.shape()
    }

    pub fn images(&self) -> usize {
        self.signals.images()
    }

    pub fn channels(&self) -> usize {
        self.signals.channels()
    }

    pub fn filters(&self) -> usize {
        self.filters
    }

    pub fn coeffs(&self) -> &[f64] {
        self.coeffs
    }

    pub fn signals(&self) -> &Signals {
        self.signals
    }

    pub fn mask(&self) -> Option<&Mask> {
        self.mask
    }

    pub fn x_hat(&self) -> &FreqTensor {
        &self.x_hat
    }

    /// Spectrum of image `k`, channel `c`, at bin `f`.
    #[inline]
    pub fn s_hat(&self, c: usize, k: usize, f: usize) -> Complex64 {
        self.s_hat.bin(c * self.images() + k, f)[0]
    }

    /// `sum_k conj(X_k) s_{c,k}` at bin `f`.
    #[inline]
    pub fn xhs(&self, c: usize, f: usize) -> &[Complex64] {
        let (n, m) = (self.shape().len(), self.filters);
        &self.xhs[(c * n + f) * m..(c * n + f + 1) * m]
    }

    /// Per-bin rows `X_k` for all images, `K x M` row-major.
    pub(crate) fn gather_rows(&self, f: usize, out: &mut Vec<Complex64>) {
        out.clear();
        for kk in 0..self.images() {
            out.extend_from_slice(self.x_hat.bin(kk, f));
        }
    }

    fn check_dict(&self, d: &Dictionary) -> Result<()> {
        if d.image_shape() != self.shape() || d.filters() != self.filters || d.channels() != self.channels() {
            return Err(CdlError::dim("dictionary does not match the update problem"));
        }
        Ok(())
    }
}

/// Diagnostics of one update iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DictStepInfo {
    pub primal: f64,
    pub dual: f64,
    /// Per-bin CG solves that hit the iteration cap.
    pub cg_unconverged: usize,
    /// Zero-norm filters replaced by the impulse fallback.
    pub degenerate: usize,
}

pub trait DictUpdate {
    /// One iteration against fixed coefficient maps.
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo>;

    /// The current feasible dictionary.
    fn dictionary(&self) -> Dictionary;
}

/// Which dictionary update to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictMethod {
    EqAdmm(LinearSolver),
    Tiled,
    Consensus,
    ThreeD,
    Fista,
    MaskedBlock(LinearSolver),
    MaskedConsensus,
    MaskedFista,
}

impl DictMethod {
    pub fn is_masked(self) -> bool {
        matches!(self, DictMethod::MaskedBlock(_) | DictMethod::MaskedConsensus | DictMethod::MaskedFista)
    }
}

/// Tunables shared by the updates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DictOptions {
    /// Penalty `sigma` for ADMM methods, step parameter `L` for FISTA.
    pub sigma_or_l: f64,
    /// Run the per-image work of consensus methods through the executor.
    pub parallel: bool,
    pub cg: CgOptions,
    /// Masked FISTA: use the unmasked gradient when the mask is all ones.
    pub identity_fast_path: bool,
}

impl DictOptions {
    pub fn new(sigma_or_l: f64) -> Self {
        DictOptions { sigma_or_l, parallel: false, cg: CgOptions::default(), identity_fast_path: true }
    }
}

/// Builds the update state for `method`, starting from `init`.
pub fn new_updater(method: DictMethod, init: &Dictionary, images: usize, opts: DictOptions) -> Result<Box<dyn DictUpdate>> {
    let s = opts.sigma_or_l;
    if !(s > 0.0 && s.is_finite()) {
        return Err(CdlError::param("sigma / L must be positive"));
    }
    if images == 0 {
        return Err(CdlError::dim("at least one image is required"));
    }
    Ok(match method {
        DictMethod::EqAdmm(solver) => Box::new(EqAdmm::new(init, s, solver, opts.cg)),
        DictMethod::Tiled => Box::new(Tiled::new(init, images, s)?),
        DictMethod::Consensus => Box::new(Consensus::new(init, images, s, opts.parallel)),
        DictMethod::ThreeD => Box::new(ThreeD::new(init, images, s)),
        DictMethod::Fista => Box::new(Fista::new(init, s, false, opts.identity_fast_path)),
        DictMethod::MaskedFista => Box::new(Fista::new(init, s, true, opts.identity_fast_path)),
        DictMethod::MaskedBlock(solver) => Box::new(MaskedBlock::new(init, images, s, solver, opts.cg)),
        DictMethod::MaskedConsensus => Box::new(MaskedConsensus::new(init, images, s, opts.parallel)),
    })
}

/// Runs `iters` iterations of one update and returns the final state.
pub fn run_updates<U: DictUpdate + ?Sized>(ctx: &Ctx, upd: &mut U, prob: &DictProblem, iters: usize) -> Result<Vec<DictStepInfo>> {
    (0..iters).map(|_| upd.step(ctx, prob)).collect()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CdlError::Numerical(alloc::format!("{what} became non-finite")))
    }
}
