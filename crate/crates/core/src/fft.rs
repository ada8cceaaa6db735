//! DFT plumbing: a pluggable 1D transform, separable 2D transforms built on
//! it, and the bin-major [`FreqTensor`] layout used by every per-bin solver.
//!
//! Forward transforms are unnormalised and inverse transforms carry the `1/N`
//! factor, so products of spectra are circular convolutions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dims::Shape2;
use crate::error::{CdlError, Result};

/// Unnormalised in-place 1D DFT of every consecutive `len`-point chunk of
/// `buf` (`buf.len()` is a multiple of `len`). `inverse` flips the sign of the
/// exponent; callers apply the `1/len` scaling.
pub trait Fft: Sync {
    fn process(&self, buf: &mut [Complex64], len: usize, inverse: bool);
}

/// Direct `O(len^2)` DFT. Exact enough to serve as a reference backend.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaiveDft;

impl Fft for NaiveDft {
    fn process(&self, buf: &mut [Complex64], len: usize, inverse: bool) {
        if len <= 1 {
            return;
        }
        let sign = if inverse { 1.0 } else { -1.0 };
        let twiddle: Vec<Complex64> = (0..len)
            .map(|t| {
                let a = sign * 2.0 * PI * (t as f64) / (len as f64);
                Complex64::new(libm::cos(a), libm::sin(a))
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for chunk in buf.chunks_exact_mut(len) {
            for (k, o) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                for x in chunk.iter() {
                    acc += x * twiddle[idx];
                    idx += k;
                    if idx >= len {
                        idx -= len;
                    }
                }
                *o = acc;
            }
            chunk.copy_from_slice(&out);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn check_batch(shape: Shape2, len: usize) -> Result<usize> {
    let n = shape.len();
    if n == 0 || !len.is_multiple_of(n) {
        return Err(CdlError::dim(format!(
            "buffer of {len} values is not a stack of {}x{} images",
            shape.rows, shape.cols
        )));
    }
    Ok(len / n)
}

/// In-place 2D DFT of a stack of images.
pub fn dft2(fft: &dyn Fft, shape: Shape2, buf: &mut [Complex64], dir: Direction) -> Result<()> {
    check_batch(shape, buf.len())?;
    dft2_unchecked(fft, shape, buf, dir);
    Ok(())
}

pub(crate) fn dft2_unchecked(fft: &dyn Fft, shape: Shape2, buf: &mut [Complex64], dir: Direction) {
    let inverse = dir == Direction::Inverse;
    let (rows, cols) = (shape.rows, shape.cols);
    let n = shape.len();
    if cols > 1 {
        fft.process(buf, cols, inverse);
    }
    if rows > 1 {
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        for (img, tim) in buf.chunks_exact(n).zip(t.chunks_exact_mut(n)) {
            for r in 0..rows {
                for c in 0..cols {
                    tim[c * rows + r] = img[r * cols + c];
                }
            }
        }
        fft.process(&mut t, rows, inverse);
        for (img, tim) in buf.chunks_exact_mut(n).zip(t.chunks_exact(n)) {
            for r in 0..rows {
                for c in 0..cols {
                    img[r * cols + c] = tim[c * rows + r];
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward 2D DFT of a stack of real images.
pub fn forward_real(fft: &dyn Fft, shape: Shape2, x: &[f64]) -> Result<Vec<Complex64>> {
    check_batch(shape, x.len())?;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft2_unchecked(fft, shape, &mut buf, Direction::Forward);
    Ok(buf)
}

/// Inverse 2D DFT of a stack of spectra, keeping the real part.
pub fn inverse_real(fft: &dyn Fft, shape: Shape2, xh: &[Complex64]) -> Result<Vec<f64>> {
    check_batch(shape, xh.len())?;
    let mut buf = xh.to_vec();
    dft2_unchecked(fft, shape, &mut buf, Direction::Inverse);
    Ok(buf.into_iter().map(|v| v.re).collect())
}

/// Transforms `width` real maps (`[width][N]`) into bin-major spectra
/// `[N][width]`.
pub(crate) fn maps_to_bins(
    fft: &dyn Fft,
    shape: Shape2,
    maps: &[f64],
    width: usize,
    out: &mut [Complex64],
) {
    let n = shape.len();
    debug_assert_eq!(maps.len(), n * width);
    debug_assert_eq!(out.len(), n * width);
    let mut buf: Vec<Complex64> = maps.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft2_unchecked(fft, shape, &mut buf, Direction::Forward);
    for j in 0..width {
        let src = &buf[j * n..(j + 1) * n];
        for (f, v) in src.iter().enumerate() {
            out[f * width + j] = *v;
        }
    }
}

/// Inverse of [`maps_to_bins`]: bin-major spectra back to real maps.
pub(crate) fn bins_to_maps(
    fft: &dyn Fft,
    shape: Shape2,
    spec: &[Complex64],
    width: usize,
    out: &mut [f64],
) {
    let n = shape.len();
    debug_assert_eq!(spec.len(), n * width);
    debug_assert_eq!(out.len(), n * width);
    let mut buf = vec![Complex64::new(0.0, 0.0); n * width];
    for j in 0..width {
        let dst = &mut buf[j * n..(j + 1) * n];
        for (f, v) in dst.iter_mut().enumerate() {
            *v = spec[f * width + j];
        }
    }
    dft2_unchecked(fft, shape, &mut buf, Direction::Inverse);
    for (o, v) in out.iter_mut().zip(buf.iter()) {
        *o = v.re;
    }
}

/// Complex spectra stored as `[batch][bin][width]`.
///
/// `width` is the axis a per-bin solve runs over (filters M, or 1 for
/// signals), `batch` indexes images or channels. Bins cover the full complex
/// spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqTensor {
    shape: Shape2,
    batch: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl FreqTensor {
    pub fn zeros(shape: Shape2, batch: usize, width: usize) -> Self {
        FreqTensor {
            shape,
            batch,
            width,
            data: vec![Complex64::new(0.0, 0.0); shape.len() * batch * width],
        }
    }

    /// Spectra of real maps laid out `[batch][width][N]`.
    pub fn from_maps(
        fft: &dyn Fft,
        shape: Shape2,
        maps: &[f64],
        batch: usize,
        width: usize,
    ) -> Result<Self> {
        let n = shape.len();
        if maps.len() != n * batch * width {
            return Err(CdlError::dim(format!(
                "expected {} values for [{batch}][{width}][{}x{}], got {}",
                n * batch * width,
                shape.rows,
                shape.cols,
                maps.len()
            )));
        }
        let mut t = FreqTensor::zeros(shape, batch, width);
        let stride = n * width;
        for (src, dst) in maps.chunks_exact(stride).zip(t.data.chunks_exact_mut(stride)) {
            maps_to_bins(fft, shape, src, width, dst);
        }
        Ok(t)
    }

    /// Real maps `[batch][width][N]` (imaginary residue discarded).
    pub fn to_maps(&self, fft: &dyn Fft) -> Vec<f64> {
        let stride = self.shape.len() * self.width;
        let mut out = vec![0.0; self.data.len()];
        for (src, dst) in self.data.chunks_exact(stride).zip(out.chunks_exact_mut(stride)) {
            bins_to_maps(fft, self.shape, src, self.width, dst);
        }
        out
    }

    pub fn shape(&self) -> Shape2 {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bins(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn bin(&self, b: usize, f: usize) -> &[Complex64] {
        let o = (b * self.bins() + f) * self.width;
        &self.data[o..o + self.width]
    }

    #[inline]
    pub fn bin_mut(&mut self, b: usize, f: usize) -> &mut [Complex64] {
        let o = (b * self.bins() + f) * self.width;
        let w = self.width;
        &mut self.data[o..o + w]
    }

    /// All bins of one batch element, `[bin][width]`.
    pub fn batch_slice(&self, b: usize) -> &[Complex64] {
        let s = self.bins() * self.width;
        &self.data[b * s..(b + 1) * s]
    }

    pub fn batch_slice_mut(&mut self, b: usize) -> &mut [Complex64] {
        let s = self.bins() * self.width;
        &mut self.data[b * s..(b + 1) * s]
    }

    /// DFT along the batch axis, turning a stack of 2D spectra into a 3D
    /// spectrum (inverse applies the `1/batch` factor).
    pub fn transform_batch_axis(&mut self, fft: &dyn Fft, dir: Direction) {
        let k = self.batch;
        if k <= 1 {
            return;
        }
        let stride = self.bins() * self.width;
        let mut line = vec![Complex64::new(0.0, 0.0); stride * k];
        // gather to [position][batch] so each line is contiguous
        for b in 0..k {
            for p in 0..stride {
                line[p * k + b] = self.data[b * stride + p];
            }
        }
        let inverse = dir == Direction::Inverse;
        fft.process(&mut line, k, inverse);
        let scale = if inverse { 1.0 / k as f64 } else { 1.0 };
        for b in 0..k {
            for p in 0..stride {
                self.data[b * stride + p] = line[p * k + b] * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn circular_conv(shape: Shape2, a: &[f64], b: &[f64]) -> Vec<f64> {
        let (r, c) = (shape.rows, shape.cols);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                let mut acc = 0.0;
                for p in 0..r {
                    for q in 0..c {
                        acc += a[p * c + q] * b[((i + r - p) % r) * c + (j + c - q) % c];
                    }
                }
                out[i * c + j] = acc;
            }
        }
        out
    }

    #[test]
    fn zeros_transform_to_zeros() {
        let s = Shape2::new(8, 8);
        let xh = forward_real(&NaiveDft, s, &[0.0; 64]).unwrap();
        assert!(xh.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let s = Shape2::new(8, 8);
        let mut x = [0.0; 64];
        x[0] = 1.0;
        let xh = forward_real(&NaiveDft, s, &x).unwrap();
        for v in xh {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn roundtrip_16x16() {
        let s = Shape2::new(16, 16);
        let x = random(256, 3);
        let back = inverse_real(&NaiveDft, s, &forward_real(&NaiveDft, s, &x).unwrap()).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let r = forward_real(&NaiveDft, Shape2::new(8, 8), &[0.0; 63]);
        assert!(matches!(r, Err(CdlError::Dimension(_))));
    }

    #[test]
    fn product_of_spectra_is_circular_convolution() {
        for (s, seed) in [(Shape2::new(8, 8), 1), (Shape2::new(5, 7), 2)] {
            let a = random(s.len(), seed);
            let b = random(s.len(), seed + 10);
            let ah = forward_real(&NaiveDft, s, &a).unwrap();
            let bh = forward_real(&NaiveDft, s, &b).unwrap();
            let prod: Vec<_> = ah.iter().zip(&bh).map(|(x, y)| x * y).collect();
            let got = inverse_real(&NaiveDft, s, &prod).unwrap();
            let want = circular_conv(s, &a, &b);
            let err = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "{err}");
        }
    }

    #[test]
    fn freq_tensor_layout_roundtrip() {
        let s = Shape2::new(4, 6);
        let maps = random(2 * 3 * 24, 9);
        let t = FreqTensor::from_maps(&NaiveDft, s, &maps, 2, 3).unwrap();
        // bin 0 of (batch 1, map 2) is the sum of that map
        let sum: f64 = maps[(3 + 2) * 24..(3 + 3) * 24].iter().sum();
        assert!((t.bin(1, 0)[2].re - sum).abs() < 1e-12);
        let back = t.to_maps(&NaiveDft);
        let err = maps.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn batch_axis_roundtrip_and_k2_butterfly() {
        let s = Shape2::new(3, 3);
        let maps = random(2 * 9, 4);
        let mut t = FreqTensor::from_maps(&NaiveDft, s, &maps, 2, 1).unwrap();
        let orig = t.clone();
        t.transform_batch_axis(&NaiveDft, Direction::Forward);
        for f in 0..9 {
            let (a, b) = (orig.bin(0, f)[0], orig.bin(1, f)[0]);
            assert!((t.bin(0, f)[0] - (a + b)).norm() < 1e-13);
            assert!((t.bin(1, f)[0] - (a - b)).norm() < 1e-13);
        }
        t.transform_batch_axis(&NaiveDft, Direction::Inverse);
        for (x, y) in t.data().iter().zip(orig.data()) {
            assert!((x - y).norm() < 1e-13);
        }
    }
}
