//! Std companion to `cdl-core`: rustfft and rayon backends, tensor /
//! dictionary / trace file formats, image loading, the self-check suite and
//! the `cdl` command line.

pub mod backend;
pub mod cli;
pub mod error;
pub mod io;
pub mod selfcheck;
pub mod synth;

pub use backend::Runtime;
pub use error::{Error, Result};
