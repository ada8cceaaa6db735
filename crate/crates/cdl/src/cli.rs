//! Argument grammar and subcommand drivers for the `cdl` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use cdl_core::csc::{cbpdn_objective, CscConfig, CscSolver};
use cdl_core::driver::{cdl_learn, default_params, evaluate_on_test_set, grid_search, grid_search_refined, logspace, CdlConfig, GridResult, Method};
use cdl_core::mask::make_random_mask;
use cdl_core::preprocess::tikhonov_highpass;
use cdl_core::{CdlError, Ctx, Mask, NormMode, Shape2, Signals};

use crate::backend::Runtime;
use crate::error::{Error, Result};
use crate::io;
use crate::selfcheck;

#[derive(Debug, Parser)]
#[command(name = "cdl", version, about = "Convolutional dictionary learning benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split images into Tikhonov highpass (written) and lowpass parts.
    Preprocess(PreprocessArgs),
    /// Learn a dictionary and write its convergence trace.
    Learn(LearnArgs),
    /// Search penalty / step parameters on logarithmic grids.
    Gridsearch(GridArgs),
    /// Sparse code images with a stored dictionary and report the objective.
    Eval(EvalArgs),
    /// Run the built-in oracle and invariant checks.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory of 8-bit PGM/PNG images, or a tensor file.
    #[arg(long)]
    pub images: PathBuf,
    /// Output tensor file for the highpass images.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional output tensor file for the lowpass images.
    #[arg(long)]
    pub lowpass: Option<PathBuf>,
    /// Weight of the gradient penalty in the lowpass filter.
    #[arg(long, default_value_t = 5.0)]
    pub tikhonov: f64,
    /// Keep colour images as three channels instead of converting to grey.
    #[arg(long)]
    pub colour: bool,
}

/// Training data, dictionary shape and method selection shared by `learn`
/// and `gridsearch`.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Directory of 8-bit PGM/PNG images, or a tensor file.
    #[arg(long)]
    pub images: PathBuf,
    /// Number of filters.
    #[arg(long, default_value_t = 64)]
    pub filters: usize,
    /// Filter side length.
    #[arg(long, default_value_t = 8)]
    pub filter_size: usize,
    /// Sparsity weight.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// CG, ISM, Tiled, Cns, CnsP, 3D, FISTA or a masked variant (M-CG, M-ISM, M-Cns, M-CnsP, M-FISTA).
    #[arg(long, default_value = "Cns")]
    pub method: String,
    /// Use the masked variant of --method.
    #[arg(long)]
    pub masked: bool,
    /// Mask tensor file, `[rows, cols]` or `[K, rows, cols]`.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Generate a random 0/1 mask with this fraction of zeros.
    #[arg(long)]
    pub mask_zero_frac: Option<f64>,
    /// Filter norm constraint: `eq` (unit norm) or `ball` (norm at most one).
    #[arg(long, default_value = "eq")]
    pub norm_mode: String,
    /// Over-relaxation of the mask-free sparse coding step, in [1, 2].
    #[arg(long, default_value_t = 1.0)]
    pub relax: f64,
    /// Seed for the initial dictionary and generated masks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (falls back to CDL_THREADS, then 1).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Apply the Tikhonov highpass with this weight before learning.
    #[arg(long)]
    pub tikhonov: Option<f64>,
    /// Keep colour images as three channels.
    #[arg(long)]
    pub colour: bool,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Test images evaluated with every dictionary snapshot.
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    /// CSV output of the test-set evaluation (stdout if absent).
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    /// Sparse coding iterations per test-set evaluation.
    #[arg(long, default_value_t = 100)]
    pub test_iters: usize,
    /// Outer iterations.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Sparse coding penalty.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Dictionary update penalty (ADMM methods).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Inverse step size (FISTA methods).
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Use the K-dependent parameter rules (the default when no parameter is given).
    #[arg(long)]
    pub auto_params: bool,
    /// Dictionary snapshot interval for test-set evaluation.
    #[arg(long, default_value_t = 50)]
    pub snapshot_every: usize,
    /// Output dictionary file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output trace CSV (stdout if absent).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Sparse coding penalty grid `min:max:points` (log spaced).
    #[arg(long)]
    pub rho_grid: String,
    /// Dictionary penalty grid `min:max:points` (ADMM methods).
    #[arg(long)]
    pub sigma_grid: Option<String>,
    /// Inverse step size grid `min:max:points` (FISTA methods).
    #[arg(long = "L-grid")]
    pub l_grid: Option<String>,
    /// Outer iterations per grid point.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Follow with a finer search in [0.1 c, 10 c] around the coarse optimum.
    #[arg(long)]
    pub refine: bool,
    /// Points per parameter in the refinement stage.
    #[arg(long, default_value_t = 5)]
    pub refine_points: usize,
    /// Outer iterations per refinement point (defaults to --iters).
    #[arg(long)]
    pub refine_iters: Option<usize>,
    /// Output CSV of every grid point (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dictionary file.
    #[arg(long)]
    pub dict: PathBuf,
    /// Directory of 8-bit PGM/PNG images, or a tensor file.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Sparse coding iterations.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 2.2)]
    pub rho: f64,
    /// Mask tensor file for a masked data term.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub tikhonov: Option<f64>,
    #[arg(long)]
    pub colour: bool,
    /// Output tensor file for the coefficient maps `[K, M, rows, cols]`.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Worker threads (falls back to CDL_THREADS, then 1).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("CDL_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| usage(format!("CDL_THREADS must be a positive integer, got {v:?}")))?,
            Err(_) => 1,
        },
    };
    if n == 0 {
        return Err(usage("--threads must be >= 1"));
    }
    Ok(n)
}

fn runtime(threads: usize) -> Result<Runtime> {
    Runtime::new(threads).map_err(|e| usage(format!("cannot start {threads} worker threads: {e}")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be nonnegative, got {v}")))
    }
}

/// Parses a `min:max:points` log-spaced grid.
pub fn parse_grid(flag: &str, spec: &str) -> Result<Vec<f64>> {
    let bad = || usage(format!("{flag} expects min:max:points with 0 < min <= max, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(bad());
    }
    Ok(logspace(lo, hi, n))
}

fn masked_variant(m: Method) -> Option<Method> {
    Some(match m {
        Method::Cg | Method::MCg => Method::MCg,
        Method::Ism | Method::MIsm => Method::MIsm,
        Method::Cns | Method::MCns => Method::MCns,
        Method::CnsP | Method::MCnsP => Method::MCnsP,
        Method::Fista | Method::MFista => Method::MFista,
        Method::Tiled | Method::ThreeD => return None,
    })
}

/// Flag values checked without touching the filesystem.
struct Problem {
    method: Method,
    norm_mode: NormMode,
    threads: usize,
    filter: Shape2,
}

impl ProblemArgs {
    fn validate(&self) -> Result<Problem> {
        let mut method = Method::parse(&self.method).ok_or_else(|| usage(format!("--method: unknown method {:?}", self.method)))?;
        if self.masked {
            method = masked_variant(method).ok_or_else(|| usage(format!("--masked: method {method} has no masked variant")))?;
        }
        let norm_mode = NormMode::parse(&self.norm_mode).ok_or_else(|| usage(format!("--norm-mode must be eq or ball, got {:?}", self.norm_mode)))?;
        if self.filters == 0 {
            return Err(usage("--filters must be >= 1"));
        }
        if self.filter_size == 0 {
            return Err(usage("--filter-size must be >= 1"));
        }
        positive("--lambda", self.lambda)?;
        if !(1.0..=2.0).contains(&self.relax) {
            return Err(usage(format!("--relax must lie in [1, 2], got {}", self.relax)));
        }
        if let Some(f) = self.mask_zero_frac {
            if !(0.0..=1.0).contains(&f) {
                return Err(usage(format!("--mask-zero-frac must lie in [0, 1], got {f}")));
            }
        }
        if self.mask.is_some() && self.mask_zero_frac.is_some() {
            return Err(usage("--mask and --mask-zero-frac are mutually exclusive"));
        }
        if !method.is_masked() && (self.mask.is_some() || self.mask_zero_frac.is_some()) {
            return Err(usage(format!("method {method} does not take a mask; use --masked or an M- method")));
        }
        if let Some(t) = self.tikhonov {
            nonnegative("--tikhonov", t)?;
        }
        let threads = resolve_threads(self.threads)?;
        Ok(Problem { method, norm_mode, threads, filter: Shape2::new(self.filter_size, self.filter_size) })
    }

    /// Loads the training images and builds the mask.
    fn load(&self, ctx: &Ctx, p: &Problem) -> Result<(Signals, Option<Mask>)> {
        let signals = load_prepared(ctx, &self.images, self.colour, self.tikhonov)?;
        if !p.filter.fits_within(signals.shape()) {
            return Err(Error::Core(CdlError::Dimension(format!(
                "filter size {} exceeds the {}x{} images",
                self.filter_size,
                signals.shape().rows,
                signals.shape().cols
            ))));
        }
        let mask = if !p.method.is_masked() {
            None
        } else if let Some(path) = &self.mask {
            Some(io::load_mask(path)?)
        } else if let Some(f) = self.mask_zero_frac {
            Some(make_random_mask(signals.shape(), f, self.seed)?)
        } else {
            Some(Mask::identity(signals.shape()))
        };
        Ok((signals, mask))
    }

    fn config(&self, p: &Problem) -> CdlConfig {
        let mut cfg = CdlConfig::new(p.method);
        cfg.lambda = self.lambda;
        cfg.norm_mode = p.norm_mode;
        cfg.relax = self.relax;
        cfg.seed = self.seed;
        cfg
    }
}

fn load_prepared(ctx: &Ctx, path: &Path, colour: bool, tikhonov: Option<f64>) -> Result<Signals> {
    let s = io::load_signals(path, !colour)?;
    match tikhonov {
        None => Ok(s),
        Some(t) => {
            let (shape, c, k) = (s.shape(), s.channels(), s.images());
            let (high, _) = tikhonov_highpass(ctx, shape, s.data(), t)?;
            Ok(Signals::new(shape, c, k, high)?)
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn preprocess(a: &PreprocessArgs) -> Result<()> {
    nonnegative("--tikhonov", a.tikhonov)?;
    let rt = runtime(1)?;
    let ctx = rt.ctx();
    let s = io::load_signals(&a.images, !a.colour)?;
    let (shape, c, k) = (s.shape(), s.channels(), s.images());
    let (high, low) = tikhonov_highpass(&ctx, shape, s.data(), a.tikhonov)?;
    io::save_tensor(&a.out, &io::signals_to_tensor(&Signals::new(shape, c, k, high)?))?;
    if let Some(p) = &a.lowpass {
        io::save_tensor(p, &io::signals_to_tensor(&Signals::new(shape, c, k, low)?))?;
    }
    Ok(())
}

fn learn(a: &LearnArgs) -> Result<()> {
    let p = a.problem.validate()?;
    if a.iters == 0 {
        return Err(usage("--iters must be >= 1"));
    }
    if a.sigma.is_some() && a.l.is_some() {
        return Err(usage("--sigma and --L are mutually exclusive"));
    }
    if p.method.uses_step_size() && a.sigma.is_some() {
        return Err(usage(format!("method {} takes --L, not --sigma", p.method)));
    }
    if !p.method.uses_step_size() && a.l.is_some() {
        return Err(usage(format!("method {} takes --sigma, not --L", p.method)));
    }
    let explicit = a.rho.or(a.sigma).or(a.l).is_some();
    if a.auto_params && explicit {
        return Err(usage("--auto-params conflicts with explicit --rho/--sigma/--L"));
    }
    for (name, v) in [("--rho", a.rho), ("--sigma", a.sigma), ("--L", a.l)] {
        if let Some(v) = v {
            positive(name, v)?;
        }
    }
    if a.test_images.is_some() && a.snapshot_every == 0 {
        return Err(usage("--snapshot-every must be >= 1 with --test-images"));
    }
    if a.test_iters == 0 {
        return Err(usage("--test-iters must be >= 1"));
    }

    let rt = runtime(p.threads)?;
    let ctx = rt.ctx();
    let (signals, mask) = a.problem.load(&ctx, &p)?;
    let test = match &a.test_images {
        Some(path) => Some(load_prepared(&ctx, path, a.problem.colour, a.problem.tikhonov)?),
        None => None,
    };
    let k = signals.images();
    let mut cfg = a.problem.config(&p);
    let (rho0, s0) = default_params(p.method, k);
    if explicit {
        cfg.auto_params = false;
        cfg.rho = a.rho.unwrap_or(rho0);
        cfg.sigma_or_l = a.sigma.or(a.l).unwrap_or(s0);
    }
    cfg.iters = a.iters;
    let init = cfg.initial_dictionary(signals.shape(), p.filter, a.problem.filters, signals.channels())?;
    let snap = test.as_ref().map(|_| a.snapshot_every);
    let out = match cdl_learn(&ctx, &signals, &init, &cfg, mask.as_ref(), snap) {
        Ok(o) => o,
        Err(CdlError::Diverged { iteration, trace }) => {
            write_text(a.trace.as_deref(), &io::format_trace(&trace))?;
            return Err(Error::Core(CdlError::Diverged { iteration, trace }));
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &a.out {
        io::save_dictionary(path, &out.dictionary)?;
    }
    write_text(a.trace.as_deref(), &io::format_trace(&out.trace))?;
    if out.cg_unconverged > 0 {
        eprintln!("cdl: warning: {} conjugate gradient solves hit their iteration cap", out.cg_unconverged);
    }
    if out.degenerate > 0 {
        eprintln!("cdl: warning: {} zero-norm filters were left unnormalised", out.degenerate);
    }
    if let Some(test) = test {
        let (rho, _) = cfg.params(k);
        let csc = CscConfig { iters: a.test_iters, rho, relax: cfg.relax, stop: None };
        let rows = evaluate_on_test_set(&ctx, &out.snapshots, &test, cfg.lambda, csc)?;
        let mut text = String::from("iter,test_objective\n");
        for (it, obj) in rows {
            text.push_str(&format!("{it},{obj:.16e}\n"));
        }
        write_text(a.test_out.as_deref(), &text)?;
    }
    Ok(())
}

fn grid_csv(stages: &[(&str, &GridResult)]) -> String {
    let mut s = String::from("stage,rho,sigma_or_l,objective\n");
    for (name, g) in stages {
        for p in &g.points {
            s.push_str(&format!("{name},{:.16e},{:.16e},{:.16e}\n", p.rho, p.sigma_or_l, p.objective));
        }
    }
    s
}

fn gridsearch(a: &GridArgs) -> Result<()> {
    let p = a.problem.validate()?;
    if a.iters == 0 || a.refine_iters == Some(0) {
        return Err(usage("iteration counts must be >= 1"));
    }
    let rho_grid = parse_grid("--rho-grid", &a.rho_grid)?;
    let s_grid = match (p.method.uses_step_size(), &a.sigma_grid, &a.l_grid) {
        (true, None, Some(g)) => parse_grid("--L-grid", g)?,
        (false, Some(g), None) => parse_grid("--sigma-grid", g)?,
        (true, _, _) => return Err(usage(format!("method {} needs --L-grid (and no --sigma-grid)", p.method))),
        (false, _, _) => return Err(usage(format!("method {} needs --sigma-grid (and no --L-grid)", p.method))),
    };
    if a.refine && a.refine_points == 0 {
        return Err(usage("--refine-points must be >= 1"));
    }
    let rt = runtime(p.threads)?;
    let ctx = rt.ctx();
    let (signals, mask) = a.problem.load(&ctx, &p)?;
    let cfg = a.problem.config(&p);
    let init = cfg.initial_dictionary(signals.shape(), p.filter, a.problem.filters, signals.channels())?;
    let (text, best) = if a.refine {
        let (coarse, fine) = grid_search_refined(
            &ctx,
            &signals,
            &init,
            &cfg,
            mask.as_ref(),
            &rho_grid,
            &s_grid,
            a.iters,
            a.refine_points,
            a.refine_iters.unwrap_or(a.iters),
        )?;
        (grid_csv(&[("coarse", &coarse), ("refine", &fine)]), fine.best_point())
    } else {
        let g = grid_search(&ctx, &signals, &init, &cfg, mask.as_ref(), &rho_grid, &s_grid, a.iters)?;
        (grid_csv(&[("coarse", &g)]), g.best_point())
    };
    write_text(a.out.as_deref(), &text)?;
    eprintln!("cdl: best rho {:.6e} sigma_or_l {:.6e} objective {:.6e}", best.rho, best.sigma_or_l, best.objective);
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    positive("--lambda", a.lambda)?;
    positive("--rho", a.rho)?;
    if a.iters == 0 {
        return Err(usage("--iters must be >= 1"));
    }
    if let Some(t) = a.tikhonov {
        nonnegative("--tikhonov", t)?;
    }
    let rt = runtime(1)?;
    let ctx = rt.ctx();
    let signals = load_prepared(&ctx, &a.images, a.colour, a.tikhonov)?;
    let dict = io::load_dictionary(&a.dict, signals.shape())?;
    let mask = a.mask.as_deref().map(io::load_mask).transpose()?;
    let cfg = CscConfig { iters: a.iters, rho: a.rho, relax: 1.0, stop: None };
    let mut solver = CscSolver::new(&ctx, &dict, &signals, a.lambda, cfg, mask.as_ref())?;
    solver.solve(&ctx)?;
    let o = cbpdn_objective(&ctx, &dict, solver.coefficients(), &signals, a.lambda, mask.as_ref())?;
    if let Some(path) = &a.coeffs {
        let sh = signals.shape();
        let t = io::Tensor::new(vec![signals.images(), dict.filters(), sh.rows, sh.cols], solver.coefficients().to_vec())?;
        io::save_tensor(path, &t)?;
    }
    write_text(None, &format!("objective,fidelity,l1\n{:.16e},{:.16e},{:.16e}\n", o.total, o.fidelity, o.l1))
}

/// Runs the suite and prints one line per check; `Ok(false)` if any failed.
fn run_selfcheck(a: &SelfcheckArgs) -> Result<bool> {
    let rt = runtime(resolve_threads(a.threads)?)?;
    let ctx = rt.ctx();
    let mut ok = true;
    for c in selfcheck::run_all(&ctx) {
        ok &= c.passed;
        println!("{} {}: {} [{:.2}s]", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail, c.seconds);
    }
    Ok(ok)
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Preprocess(a) => preprocess(a)?,
        Command::Learn(a) => learn(a)?,
        Command::Gridsearch(a) => gridsearch(a)?,
        Command::Eval(a) => eval(a)?,
        Command::Selfcheck(a) => return Ok(if run_selfcheck(a)? { 0 } else { 1 }),
    }
    Ok(0)
}

/// Parses `argv`, runs it, and reports failures as one stderr line.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let text = e.render().to_string();
            let body = text.split("\n\nUsage:").next().unwrap_or_default();
            let words: Vec<&str> = body.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
            eprintln!("cdl: error[usage]: {}", words.join(" ").trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cdl: error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
