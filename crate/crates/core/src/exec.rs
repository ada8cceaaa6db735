//! Execution context: the FFT backend, the worker pool and a clock.

use alloc::vec::Vec;

use crate::fft::{Fft, NaiveDft};

/// Runs a batch of independent jobs, possibly concurrently.
///
/// Implementations must run every job exactly once and return only after all
/// of them finished. Jobs never share mutable state, so any schedule yields the
/// same results.
pub trait Executor: Sync {
    fn run(&self, jobs: &mut [&mut (dyn FnMut() + Send)]);

    /// Upper bound on the number of jobs in flight.
    fn threads(&self) -> usize {
        1
    }
}

/// Runs jobs one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn run(&self, jobs: &mut [&mut (dyn FnMut() + Send)]) {
        for job in jobs.iter_mut() {
            job();
        }
    }
}

/// Monotonic seconds since an arbitrary origin.
pub trait Clock: Sync {
    fn seconds(&self) -> f64;
}

/// Clock that always reads zero (no time source in `no_std`).
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

pub static SERIAL: Serial = Serial;
pub static NAIVE_DFT: NaiveDft = NaiveDft;
pub static NO_CLOCK: NoClock = NoClock;

/// Everything a solver needs from its environment.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub fft: &'a dyn Fft,
    pub exec: &'a dyn Executor,
    pub clock: &'a dyn Clock,
}

impl<'a> Ctx<'a> {
    pub fn new(fft: &'a dyn Fft, exec: &'a dyn Executor, clock: &'a dyn Clock) -> Self {
        Ctx { fft, exec, clock }
    }

    /// Same backend and clock, serial execution.
    pub fn serial(&self) -> Ctx<'a> {
        Ctx { exec: &SERIAL, ..*self }
    }

    /// `self` when `parallel`, otherwise [`Ctx::serial`].
    pub fn with_parallelism(&self, parallel: bool) -> Ctx<'a> {
        if parallel {
            *self
        } else {
            self.serial()
        }
    }
}

impl Ctx<'static> {
    /// Naive DFT, serial execution, no clock.
    pub fn reference() -> Self {
        Ctx { fft: &NAIVE_DFT, exec: &SERIAL, clock: &NO_CLOCK }
    }
}

/// Applies `f(index, item)` to every item through `exec`.
pub fn for_each_mut<T, F>(exec: &dyn Executor, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    let f = &f;
    let mut closures: Vec<_> = items
        .iter_mut()
        .enumerate()
        .map(|(i, item)| move || f(i, item))
        .collect();
    let mut jobs: Vec<&mut (dyn FnMut() + Send)> = closures
        .iter_mut()
        .map(|c| c as &mut (dyn FnMut() + Send))
        .collect();
    exec.run(&mut jobs);
}

/// Evaluates `f(i)` for `i in 0..n` through `exec`, results in index order.
pub fn map_indexed<T, F>(exec: &dyn Executor, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for_each_mut(exec, &mut slots, |i, slot| *slot = Some(f(i)));
    slots.into_iter().map(|s| s.expect("executor skipped a job")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_visits_every_item_in_order() {
        let mut v = alloc::vec![0usize; 5];
        for_each_mut(&Serial, &mut v, |i, x| *x = i * i);
        assert_eq!(v, [0, 1, 4, 9, 16]);
        assert_eq!(map_indexed(&Serial, 3, |i| i + 1), [1, 2, 3]);
    }
}
