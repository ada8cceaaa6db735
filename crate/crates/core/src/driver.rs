//! The learning loop: one sparse coding iteration and one dictionary update
//! iteration per outer step, coupled through the auxiliary variables (the
//! feasible dictionary goes to sparse coding, the sparse maps `Y` go to the
//! dictionary update). All inner states persist across outer steps.
//!
//! Also provides the parameter rules, grid search and test-set evaluation.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::csc::{cbpdn_objective, CscConfig, CscSolver};
use crate::dictionary::Dictionary;
use crate::dictupd::{new_updater, DictMethod, DictOptions, DictProblem, LinearSolver};
use crate::dims::Shape2;
use crate::error::{CdlError, Result};
use crate::exec::{map_indexed, Ctx};
use crate::linalg::CgOptions;
use crate::mask::Mask;
use crate::prox::NormMode;
use crate::signals::Signals;

/// Learning method: dictionary update plus, for `M*` methods, masked sparse
/// coding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Cg,
    Ism,
    Tiled,
    Cns,
    CnsP,
    ThreeD,
    Fista,
    MCg,
    MIsm,
    MCns,
    MCnsP,
    MFista,
}

impl Method {
    pub const ALL: [Method; 12] = [
        Method::Cg,
        Method::Ism,
        Method::Tiled,
        Method::Cns,
        Method::CnsP,
        Method::ThreeD,
        Method::Fista,
        Method::MCg,
        Method::MIsm,
        Method::MCns,
        Method::MCnsP,
        Method::MFista,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cg => "CG",
            Method::Ism => "ISM",
            Method::Tiled => "Tiled",
            Method::Cns => "Cns",
            Method::CnsP => "CnsP",
            Method::ThreeD => "3D",
            Method::Fista => "FISTA",
            Method::MCg => "M-CG",
            Method::MIsm => "M-ISM",
            Method::MCns => "M-Cns",
            Method::MCnsP => "M-CnsP",
            Method::MFista => "M-FISTA",
        }
    }

    /// Case-insensitive; accepts `-P` for the parallel variants and `ThreeD`.
    pub fn parse(s: &str) -> Option<Method> {
        let key: alloc::string::String = s.chars().filter(|c| *c != '-' && *c != '_').flat_map(|c| c.to_lowercase()).collect();
        Some(match key.as_str() {
            "cg" => Method::Cg,
            "ism" => Method::Ism,
            "tiled" => Method::Tiled,
            "cns" => Method::Cns,
            "cnsp" => Method::CnsP,
            "3d" | "threed" => Method::ThreeD,
            "fista" => Method::Fista,
            "mcg" => Method::MCg,
            "mism" => Method::MIsm,
            "mcns" => Method::MCns,
            "mcnsp" => Method::MCnsP,
            "mfista" => Method::MFista,
            _ => return None,
        })
    }

    pub fn is_masked(self) -> bool {
        matches!(self, Method::MCg | Method::MIsm | Method::MCns | Method::MCnsP | Method::MFista)
    }

    /// Whether the dictionary update spreads per-image work over the executor.
    pub fn is_parallel(self) -> bool {
        matches!(self, Method::CnsP | Method::MCnsP)
    }

    /// FISTA methods take `L` instead of `sigma`.
    pub fn uses_step_size(self) -> bool {
        matches!(self, Method::Fista | Method::MFista)
    }

    pub fn dict_method(self) -> DictMethod {
        match self {
            Method::Cg => DictMethod::EqAdmm(LinearSolver::Cg),
            Method::Ism => DictMethod::EqAdmm(LinearSolver::Ism),
            Method::Tiled => DictMethod::Tiled,
            Method::Cns | Method::CnsP => DictMethod::Consensus,
            Method::ThreeD => DictMethod::ThreeD,
            Method::Fista => DictMethod::Fista,
            Method::MCg => DictMethod::MaskedBlock(LinearSolver::Cg),
            Method::MIsm => DictMethod::MaskedBlock(LinearSolver::Ism),
            Method::MCns | Method::MCnsP => DictMethod::MaskedConsensus,
            Method::MFista => DictMethod::MaskedFista,
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Penalty `rho` for sparse coding and `sigma` (or `L`) for the dictionary
/// update, as used for `k` training images.
///
/// Tiled and 3D reuse the CG rule; the masked block methods reuse the masked
/// consensus `rho` with the CG `sigma` rule. These are starting points rather
/// than tuned values.
pub fn default_params(method: Method, k: usize) -> (f64, f64) {
    let k = k as f64;
    let cg_sigma = 0.5 * k + 7.0;
    match method {
        Method::Cg | Method::Ism | Method::Tiled | Method::ThreeD => (2.2, cg_sigma),
        Method::Fista | Method::MFista => (2.2, 14.0 * k),
        Method::Cns | Method::CnsP => (3.0, 2.2),
        Method::MCns | Method::MCnsP => (2.7, 3.0),
        Method::MCg | Method::MIsm => (2.7, cg_sigma),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CdlConfig {
    pub method: Method,
    pub lambda: f64,
    pub rho: f64,
    pub sigma_or_l: f64,
    /// Replace `rho` and `sigma_or_l` by [`default_params`].
    pub auto_params: bool,
    pub iters: usize,
    pub norm_mode: NormMode,
    /// Over-relaxation of the mask-free sparse coding step.
    pub relax: f64,
    /// Seed for [`CdlConfig::initial_dictionary`].
    pub seed: u64,
    pub cg: CgOptions,
    /// With an all-ones mask, masked methods use the mask-free sparse coding
    /// and gradient computations.
    pub identity_fast_path: bool,
}

impl CdlConfig {
    /// Defaults: `lambda = 0.1`, 1000 iterations, parameter rules on.
    pub fn new(method: Method) -> Self {
        let (rho, s) = default_params(method, 1);
        CdlConfig {
            method,
            lambda: 0.1,
            rho,
            sigma_or_l: s,
            auto_params: true,
            iters: 1000,
            norm_mode: NormMode::UnitEquality,
            relax: 1.0,
            seed: 0,
            cg: CgOptions::default(),
            identity_fast_path: true,
        }
    }

    /// `(rho, sigma_or_l)` in effect for `k` images.
    pub fn params(&self, k: usize) -> (f64, f64) {
        if self.auto_params {
            default_params(self.method, k)
        } else {
            (self.rho, self.sigma_or_l)
        }
    }

    /// Fixed-seed Gaussian dictionary projected onto the constraint set.
    pub fn initial_dictionary(&self, image: Shape2, filter: Shape2, filters: usize, channels: usize) -> Result<Dictionary> {
        Dictionary::random(image, filter, filters, channels, self.norm_mode, self.seed)
    }
}

/// One row per outer iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub time_s: f64,
    pub objective: f64,
    pub fidelity: f64,
    pub l1: f64,
    pub r_primal_x: f64,
    pub r_dual_x: f64,
    pub r_primal_d: f64,
    pub r_dual_d: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.objective).collect()
    }

    pub fn last_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub dictionary: Dictionary,
}

pub struct CdlOutput {
    pub dictionary: Dictionary,
    /// Final sparse coefficient maps `Y`, `[K][M][N]`.
    pub coefficients: Vec<f64>,
    pub trace: ConvergenceTrace,
    pub snapshots: Vec<Snapshot>,
    /// Dictionary-update CG solves that hit their iteration cap, summed.
    pub cg_unconverged: usize,
    /// Zero-norm filter fallbacks, summed.
    pub degenerate: usize,
}

fn validate(cfg: &CdlConfig, signals: &Signals, init: &Dictionary, mask: Option<&Mask>) -> Result<()> {
    if !(cfg.lambda > 0.0 && cfg.lambda.is_finite()) {
        return Err(CdlError::param("lambda must be positive"));
    }
    if cfg.iters == 0 {
        return Err(CdlError::param("iteration count must be >= 1"));
    }
    if cfg.method.is_masked() != mask.is_some() {
        return Err(CdlError::param(format!(
            "method {} {} a mask",
            cfg.method,
            if cfg.method.is_masked() { "requires" } else { "does not take" }
        )));
    }
    if init.image_shape() != signals.shape() || init.channels() != signals.channels() {
        return Err(CdlError::dim("initial dictionary does not match the training images"));
    }
    if !init.is_feasible(1e-9) {
        return Err(CdlError::param("initial dictionary is not feasible"));
    }
    Ok(())
}

/// Learns a dictionary from `signals` starting at `init`. With
/// `snapshot_every = Some(n)` the dictionary is saved every `n` iterations.
///
/// A non-finite objective or iterate aborts with [`CdlError::Diverged`],
/// which carries the rows recorded so far.
pub fn cdl_learn(
    ctx: &Ctx,
    signals: &Signals,
    init: &Dictionary,
    cfg: &CdlConfig,
    mask: Option<&Mask>,
    snapshot_every: Option<usize>,
) -> Result<CdlOutput> {
    validate(cfg, signals, init, mask)?;
    let k = signals.images();
    let (rho, sigma) = cfg.params(k);
    let fast = cfg.identity_fast_path && mask.is_some_and(|w| w.is_identity());
    let csc_mask = if fast { None } else { mask };
    let relax = if csc_mask.is_some() { 1.0 } else { cfg.relax };
    let csc_cfg = CscConfig { iters: 1, rho, relax, stop: None };
    let mut csc = CscSolver::new(ctx, init, signals, cfg.lambda, csc_cfg, csc_mask)?;
    let opts = DictOptions { sigma_or_l: sigma, parallel: cfg.method.is_parallel(), cg: cfg.cg, identity_fast_path: cfg.identity_fast_path };
    let mut upd = new_updater(cfg.method.dict_method(), init, k, opts)?;

    let t0 = ctx.clock.seconds();
    let mut trace = ConvergenceTrace::default();
    let mut snapshots = Vec::new();
    let (mut cg_unconverged, mut degenerate) = (0, 0);
    let mut dict = init.clone();
    let diverged = |iteration: usize, trace: &ConvergenceTrace| CdlError::Diverged { iteration, trace: Box::new(trace.clone()) };
    for it in 1..=cfg.iters {
        if !dict.is_feasible(1e-9) {
            return Err(CdlError::Numerical(format!("infeasible dictionary handed to sparse coding at iteration {it}")));
        }
        if it > 1 {
            csc.set_dictionary(ctx, &dict)?;
        }
        let rx = match csc.iterate(ctx) {
            Ok(r) => r,
            Err(CdlError::Numerical(_)) => return Err(diverged(it, &trace)),
            Err(e) => return Err(e),
        };
        let y = csc.coefficients();
        let prob = DictProblem::new(ctx, y, init.filters(), signals, mask).map_err(|e| match e {
            CdlError::Numerical(_) => diverged(it, &trace),
            e => e,
        })?;
        let rd = match upd.step(ctx, &prob) {
            Ok(r) => r,
            Err(CdlError::Numerical(_)) => return Err(diverged(it, &trace)),
            Err(e) => return Err(e),
        };
        cg_unconverged += rd.cg_unconverged;
        degenerate += rd.degenerate;
        dict = upd.dictionary();
        let obj = match cbpdn_objective(ctx, &dict, y, signals, cfg.lambda, mask) {
            Ok(o) => o,
            Err(CdlError::Numerical(_)) => return Err(diverged(it, &trace)),
            Err(e) => return Err(e),
        };
        if !obj.total.is_finite() {
            return Err(diverged(it, &trace));
        }
        let prev_t = trace.rows.last().map_or(0.0, |r| r.time_s);
        let time_s = (ctx.clock.seconds() - t0).max(prev_t);
        trace.rows.push(TraceRow {
            iter: it,
            time_s,
            objective: obj.total,
            fidelity: obj.fidelity,
            l1: obj.l1,
            r_primal_x: rx.primal,
            r_dual_x: rx.dual,
            r_primal_d: rd.primal,
            r_dual_d: rd.dual,
        });
        if snapshot_every.is_some_and(|n| n > 0 && it % n == 0) {
            snapshots.push(Snapshot { iteration: it, dictionary: dict.clone() });
        }
    }
    Ok(CdlOutput { dictionary: dict, coefficients: csc.coefficients().to_vec(), trace, snapshots, cg_unconverged, degenerate })
}

/// `n` points spaced evenly in `log10` from `lo` to `hi`, endpoints exact.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (libm::log10(lo), libm::log10(hi));
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => libm::pow(10.0, a + (b - a) * i as f64 / (n - 1) as f64),
                })
                .collect()
        }
    }
}

/// `points` log-spaced values in `[0.1 c, 10 c]`.
pub fn refine_around(c: f64, points: usize) -> Vec<f64> {
    logspace(0.1 * c, 10.0 * c, points)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub rho: f64,
    pub sigma_or_l: f64,
    /// Objective after the last iteration; `+inf` if the run diverged.
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    /// Index of the lowest objective (first one on ties).
    pub best: usize,
}

impl GridResult {
    pub fn best_point(&self) -> GridPoint {
        self.points[self.best]
    }
}

/// Runs [`cdl_learn`] for every `(rho, sigma_or_l)` pair from the same initial
/// dictionary. Points run concurrently through `ctx.exec`, each one serially.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    ctx: &Ctx,
    signals: &Signals,
    init: &Dictionary,
    template: &CdlConfig,
    mask: Option<&Mask>,
    rho_grid: &[f64],
    sigma_or_l_grid: &[f64],
    iters: usize,
) -> Result<GridResult> {
    if rho_grid.is_empty() || sigma_or_l_grid.is_empty() {
        return Err(CdlError::param("grids must be non-empty"));
    }
    let pairs: Vec<(f64, f64)> = rho_grid.iter().flat_map(|&r| sigma_or_l_grid.iter().map(move |&s| (r, s))).collect();
    let inner = ctx.serial();
    let results = map_indexed(ctx.exec, pairs.len(), |i| {
        let (rho, s) = pairs[i];
        let cfg = CdlConfig { rho, sigma_or_l: s, auto_params: false, iters, ..template.clone() };
        match cdl_learn(&inner, signals, init, &cfg, mask, None) {
            Ok(out) => Ok(out.trace.last_objective().unwrap_or(f64::INFINITY)),
            Err(CdlError::Diverged { .. }) | Err(CdlError::Numerical(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    });
    let mut points = Vec::with_capacity(pairs.len());
    for ((rho, s), r) in pairs.into_iter().zip(results) {
        points.push(GridPoint { rho, sigma_or_l: s, objective: r? });
    }
    let best = points
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.objective < points[b].objective { i } else { b });
    Ok(GridResult { points, best })
}

/// Coarse search followed by a second search on `refine_points` values in
/// `[0.1 c, 10 c]` around the coarse optimum of each parameter.
#[allow(clippy::too_many_arguments)]
pub fn grid_search_refined(
    ctx: &Ctx,
    signals: &Signals,
    init: &Dictionary,
    template: &CdlConfig,
    mask: Option<&Mask>,
    rho_grid: &[f64],
    sigma_or_l_grid: &[f64],
    iters: usize,
    refine_points: usize,
    refine_iters: usize,
) -> Result<(GridResult, GridResult)> {
    let coarse = grid_search(ctx, signals, init, template, mask, rho_grid, sigma_or_l_grid, iters)?;
    let b = coarse.best_point();
    let fine = grid_search(
        ctx,
        signals,
        init,
        template,
        mask,
        &refine_around(b.rho, refine_points),
        &refine_around(b.sigma_or_l, refine_points),
        refine_iters,
    )?;
    Ok((coarse, fine))
}

/// Sparse codes `test` with every snapshot from zero and returns
/// `(training iteration, objective at Y)`.
pub fn evaluate_on_test_set(
    ctx: &Ctx,
    snapshots: &[Snapshot],
    test: &Signals,
    lambda: f64,
    csc_cfg: CscConfig,
) -> Result<Vec<(usize, f64)>> {
    if snapshots.is_empty() {
        return Err(CdlError::param("no snapshots to evaluate"));
    }
    snapshots
        .iter()
        .map(|s| {
            let mut solver = CscSolver::new(ctx, &s.dictionary, test, lambda, csc_cfg, None)?;
            solver.solve(ctx)?;
            let o = cbpdn_objective(ctx, &s.dictionary, solver.coefficients(), test, lambda, None)?;
            Ok((s.iteration, o.total))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_rules() {
        assert_eq!(default_params(Method::Cg, 20), (2.2, 17.0));
        assert_eq!(default_params(Method::Ism, 20), (2.2, 17.0));
        assert_eq!(default_params(Method::Fista, 40), (2.2, 560.0));
        assert_eq!(default_params(Method::Cns, 5), (3.0, 2.2));
        assert_eq!(default_params(Method::CnsP, 5), (3.0, 2.2));
        assert_eq!(default_params(Method::MCns, 7), (2.7, 3.0));
    }

    #[test]
    fn logspace_endpoints() {
        let g = logspace(1e-1, 1e4, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[9], 10000.0);
        assert!((g[1] - libm::pow(10.0, -1.0 + 5.0 / 9.0)).abs() < 1e-12);
        assert_eq!(logspace(3.0, 7.0, 1), [3.0]);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("Cns-P"), Some(Method::CnsP));
        assert_eq!(Method::parse("m-cns-p"), Some(Method::MCnsP));
        assert_eq!(Method::parse("nope"), None);
    }
}
