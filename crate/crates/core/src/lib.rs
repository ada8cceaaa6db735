//! Convolutional sparse coding (CSC) and batch convolutional dictionary
//! learning (CDL).
//!
//! All solvers work in the DFT domain with circular boundary conditions. The
//! crate is `no_std` (it needs `alloc`): the FFT and the worker pool are
//! supplied by the caller through the [`Fft`] and [`Executor`] traits, bundled
//! in a [`Ctx`]. [`NaiveDft`] and [`Serial`] are dependency-free reference
//! implementations.
//!
//! Module map:
//! - [`fft`], [`linalg`], [`prox`]: frequency-domain kernel, per-bin linear
//!   solvers and the two proximal maps.
//! - [`csc`]: sparse coding (mask-free, masked, multi-channel).
//! - [`dictupd`]: every dictionary update (equality ADMM with CG/ISM/tiling,
//!   consensus, 3D, FISTA and the masked variants).
//! - [`driver`]: the outer learning loop, parameter rules and grid search.
//! - [`preprocess`], [`mask`]: input preparation.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod csc;
pub mod dictionary;
pub mod dictupd;
pub mod dims;
pub mod driver;
pub mod error;
pub mod exec;
pub mod fft;
pub mod linalg;
pub mod mask;
pub mod preprocess;
pub mod prox;
pub mod signals;

pub use num_complex::Complex64;

pub use dictionary::Dictionary;
pub use dims::{ProblemDims, Shape2};
pub use error::{CdlError, Result};
pub use exec::{Clock, Ctx, Executor, NoClock, Serial};
pub use fft::{Fft, FreqTensor, NaiveDft};
pub use mask::Mask;
pub use prox::{ConstraintSet, NormMode};
pub use signals::Signals;
