//! Std implementations of the core traits: rustfft transforms, a rayon
//! worker pool and a wall clock.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use cdl_core::exec::{Clock, Ctx, Executor};
use cdl_core::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

type Plan = Arc<dyn rustfft::Fft<f64>>;
type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Plan>);

/// rustfft with a cache of plans per (length, direction).
pub struct RustFft {
    planner: Mutex<PlanCache>,
}

impl Default for RustFft {
    fn default() -> Self {
        RustFft { planner: Mutex::new((FftPlanner::new(), HashMap::new())) }
    }
}

impl RustFft {
    fn plan(&self, len: usize, inverse: bool) -> Plan {
        let mut guard = self.planner.lock().expect("fft planner lock poisoned");
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse { FftDirection::Inverse } else { FftDirection::Forward };
                planner.plan_fft(len, dir)
            })
            .clone()
    }
}

impl cdl_core::Fft for RustFft {
    fn process(&self, buf: &mut [Complex64], len: usize, inverse: bool) {
        if len <= 1 || buf.is_empty() {
            return;
        }
        self.plan(len, inverse).process(buf);
    }
}

/// Runs jobs on a private rayon pool.
pub struct ThreadPool {
    pool: rayon::ThreadPool,
    threads: usize,
}

impl ThreadPool {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let threads = threads.max(1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(ThreadPool { pool, threads })
    }
}

impl Executor for ThreadPool {
    fn run(&self, jobs: &mut [&mut (dyn FnMut() + Send)]) {
        if self.threads == 1 {
            jobs.iter_mut().for_each(|j| j());
        } else {
            self.pool.install(|| jobs.par_iter_mut().for_each(|j| j()));
        }
    }

    fn threads(&self) -> usize {
        self.threads
    }
}

/// Seconds since construction.
pub struct WallClock(Instant);

impl Default for WallClock {
    fn default() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Owns a backend set and hands out [`Ctx`] views of it.
pub struct Runtime {
    pub fft: RustFft,
    pub pool: ThreadPool,
    pub clock: WallClock,
}

impl Runtime {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        Ok(Runtime { fft: RustFft::default(), pool: ThreadPool::new(threads)?, clock: WallClock::default() })
    }

    pub fn ctx(&self) -> Ctx<'_> {
        Ctx::new(&self.fft, &self.pool, &self.clock)
    }
}
