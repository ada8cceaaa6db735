//! Input preparation: intensity scaling and Tikhonov highpass filtering.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dims::Shape2;
use crate::error::{CdlError, Result};
use crate::exec::Ctx;
use crate::fft::{forward_real, inverse_real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub tikhonov_lambda: f64,
    /// Divide 8-bit intensities by 255.
    pub scale_to_unit: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig { tikhonov_lambda: 5.0, scale_to_unit: true }
    }
}

/// Maps 8-bit intensities to `[0, 1]`.
pub fn scale_unit(pixels: &[u8]) -> Vec<f64> {
    pixels.iter().map(|&p| p as f64 / 255.0).collect()
}

/// `|G|^2` of a periodic forward difference of length `n` at frequency `f`.
fn diff_gain(f: usize, n: usize) -> f64 {
    2.0 - 2.0 * libm::cos(2.0 * PI * f as f64 / n as f64)
}

/// Splits each image of a stack into `(highpass, lowpass)`, where the
/// lowpass part minimises `1/2 ||l - s||^2 + lambda/2 (||G_r l||^2 + ||G_c l||^2)`
/// with periodic forward differences `G_r`, `G_c`.
pub fn tikhonov_highpass(ctx: &Ctx, shape: Shape2, s: &[f64], lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(CdlError::param("Tikhonov weight must be nonnegative"));
    }
    if shape.is_empty() || !s.len().is_multiple_of(shape.len()) {
        return Err(CdlError::dim("input is not a stack of images of the given shape"));
    }
    if lambda == 0.0 {
        return Ok((alloc::vec![0.0; s.len()], s.to_vec()));
    }
    let mut spec = forward_real(ctx.fft, shape, s)?;
    let n = shape.len();
    for img in spec.chunks_exact_mut(n) {
        for r in 0..shape.rows {
            let gr = diff_gain(r, shape.rows);
            for c in 0..shape.cols {
                let g = gr + diff_gain(c, shape.cols);
                img[r * shape.cols + c] /= 1.0 + lambda * g;
            }
        }
    }
    let low = inverse_real(ctx.fft, shape, &spec)?;
    let high = s.iter().zip(&low).map(|(a, b)| a - b).collect();
    Ok((high, low))
}

/// Gradient of the Tikhonov objective at `l` (used to check optimality).
pub fn tikhonov_gradient(shape: Shape2, s: &[f64], l: &[f64], lambda: f64) -> Vec<f64> {
    // (l - s) + lambda (G_r^T G_r + G_c^T G_c) l; G^T G is the periodic
    // second difference 2 l_i - l_{i-1} - l_{i+1} along each axis
    let (rows, cols) = (shape.rows, shape.cols);
    let n = shape.len();
    let mut out = Vec::with_capacity(l.len());
    for (img, src) in l.chunks_exact(n).zip(s.chunks_exact(n)) {
        for r in 0..rows {
            for c in 0..cols {
                let v = img[r * cols + c];
                let lap_r = if rows > 1 {
                    2.0 * v - img[((r + rows - 1) % rows) * cols + c] - img[((r + 1) % rows) * cols + c]
                } else {
                    0.0
                };
                let lap_c = if cols > 1 {
                    2.0 * v - img[r * cols + (c + cols - 1) % cols] - img[r * cols + (c + 1) % cols]
                } else {
                    0.0
                };
                out.push(v - src[r * cols + c] + lambda * (lap_r + lap_c));
            }
        }
    }
    out
}
