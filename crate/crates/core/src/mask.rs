//! Diagonal spatial weighting of the data fidelity term.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dims::Shape2;
use crate::error::{CdlError, Result};

/// Nonnegative finite weights, either shared by all images or one map per image.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    shape: Shape2,
    images: Option<usize>,
    w: Vec<f64>,
}

impl Mask {
    fn check(w: &[f64]) -> Result<()> {
        if w.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(CdlError::param("mask entries must be finite and nonnegative"))
        }
    }

    /// One map used for every image.
    pub fn shared(shape: Shape2, w: Vec<f64>) -> Result<Self> {
        if w.len() != shape.len() {
            return Err(CdlError::dim("mask size differs from image size"));
        }
        Self::check(&w)?;
        Ok(Mask { shape, images: None, w })
    }

    /// Maps `[K][N]`, one per image.
    pub fn per_image(shape: Shape2, images: usize, w: Vec<f64>) -> Result<Self> {
        if images == 0 || w.len() != shape.len() * images {
            return Err(CdlError::dim("per-image mask must hold K maps of the image size"));
        }
        Self::check(&w)?;
        Ok(Mask { shape, images: Some(images), w })
    }

    pub fn identity(shape: Shape2) -> Self {
        Mask { shape, images: None, w: vec![1.0; shape.len()] }
    }

    pub fn shape(&self) -> Shape2 {
        self.shape
    }

    /// `Some(K)` for per-image masks.
    pub fn images(&self) -> Option<usize> {
        self.images
    }

    pub fn is_identity(&self) -> bool {
        self.w.iter().all(|&v| v == 1.0)
    }

    /// Weights applied to image `k`.
    pub fn weights(&self, k: usize) -> &[f64] {
        let n = self.shape.len();
        match self.images {
            None => &self.w,
            Some(_) => &self.w[k * n..(k + 1) * n],
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.w
    }

    /// Checks compatibility with `images` images of `shape`.
    pub fn check_for(&self, shape: Shape2, images: usize) -> Result<()> {
        if self.shape != shape {
            return Err(CdlError::dim("mask shape differs from image shape"));
        }
        match self.images {
            Some(k) if k != images => Err(CdlError::dim("per-image mask count differs from image count")),
            _ => Ok(()),
        }
    }
}

/// 0/1 mask with exactly `floor(zero_fraction * N)` zeros at uniformly random,
/// seed-determined positions.
pub fn make_random_mask(shape: Shape2, zero_fraction: f64, seed: u64) -> Result<Mask> {
    if !(0.0..=1.0).contains(&zero_fraction) {
        return Err(CdlError::param("zero fraction must lie in [0, 1]"));
    }
    let n = shape.len();
    let zeros = libm::floor(zero_fraction * n as f64) as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (chosen, _) = idx.partial_shuffle(&mut rng, zeros);
    let mut w = vec![1.0; n];
    for &i in chosen.iter() {
        w[i] = 0.0;
    }
    Mask::shared(shape, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(m: &Mask) -> usize {
        m.data().iter().filter(|&&v| v == 0.0).count()
    }

    #[test]
    fn extreme_fractions() {
        let s = Shape2::new(5, 3);
        assert!(make_random_mask(s, 0.0, 1).unwrap().is_identity());
        assert_eq!(zeros(&make_random_mask(s, 1.0, 1).unwrap()), 15);
    }

    #[test]
    fn exact_count_and_reproducible() {
        let s = Shape2::new(16, 16);
        let a = make_random_mask(s, 0.25, 42).unwrap();
        assert_eq!(zeros(&a), 64);
        assert_eq!(a, make_random_mask(s, 0.25, 42).unwrap());
        assert_ne!(a, make_random_mask(s, 0.25, 43).unwrap());
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(Mask::shared(Shape2::new(1, 2), vec![1.0, -1.0]).is_err());
        assert!(make_random_mask(Shape2::new(2, 2), 1.5, 0).is_err());
    }

    #[test]
    fn per_image_weights() {
        let m = Mask::per_image(Shape2::new(1, 2), 2, vec![1.0, 0.0, 0.5, 2.0]).unwrap();
        assert_eq!(m.weights(1), &[0.5, 2.0]);
        assert!(m.check_for(Shape2::new(1, 2), 3).is_err());
    }
}
