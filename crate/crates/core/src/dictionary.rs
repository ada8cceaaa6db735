//! Zero-padded filter banks.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dims::Shape2;
use crate::error::{CdlError, Result};
use crate::prox::{ConstraintSet, NormMode};

/// `M` filters per channel, each zero-padded to the image size and stored
/// `[C][M][N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    cset: ConstraintSet,
    filters: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Dictionary {
    /// Wraps existing filter data, which must lie in the constraint set.
    pub fn new(cset: ConstraintSet, filters: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let d = Self::new_unchecked(cset, filters, channels, data)?;
        if !d.is_feasible(1e-9) {
            return Err(CdlError::param("dictionary filters violate the support/norm constraint"));
        }
        Ok(d)
    }

    /// Like [`Dictionary::new`] without the feasibility check.
    pub fn new_unchecked(cset: ConstraintSet, filters: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if filters == 0 || channels == 0 {
            return Err(CdlError::dim("dictionary needs >= 1 filter and channel"));
        }
        if data.len() != cset.image_shape().len() * filters * channels {
            return Err(CdlError::dim("dictionary data length differs from C*M*N"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CdlError::Numerical("dictionary data is not finite".into()));
        }
        Ok(Dictionary { cset, filters, channels, data })
    }

    /// Gaussian filters on the support, projected onto the constraint set.
    pub fn random(
        image: Shape2,
        filter: Shape2,
        filters: usize,
        channels: usize,
        mode: NormMode,
        seed: u64,
    ) -> Result<Self> {
        let cset = ConstraintSet::new(image, filter, mode)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = image.len();
        let mut data = alloc::vec![0.0; n * filters * channels];
        for f in data.chunks_exact_mut(n) {
            for r in 0..filter.rows {
                for c in 0..filter.cols {
                    f[image.index(r, c)] = StandardNormal.sample(&mut rng);
                }
            }
        }
        cset.project_filters(&mut data);
        Ok(Dictionary { cset, filters, channels, data })
    }

    /// Builds from compact filters `[C][M][filter.rows][filter.cols]`.
    pub fn from_compact(cset: ConstraintSet, filters: usize, channels: usize, compact: &[f64]) -> Result<Self> {
        let (image, filter) = (cset.image_shape(), cset.filter_shape());
        if compact.len() != filter.len() * filters * channels {
            return Err(CdlError::dim("compact filter data length differs from C*M*n"));
        }
        let mut data = alloc::vec![0.0; image.len() * filters * channels];
        for (src, dst) in compact.chunks_exact(filter.len()).zip(data.chunks_exact_mut(image.len())) {
            for r in 0..filter.rows {
                dst[image.index(r, 0)..image.index(r, 0) + filter.cols]
                    .copy_from_slice(&src[r * filter.cols..(r + 1) * filter.cols]);
            }
        }
        Self::new_unchecked(cset, filters, channels, data)
    }

    /// Filters cropped to their support, `[C][M][filter.rows][filter.cols]`.
    pub fn to_compact(&self) -> Vec<f64> {
        let (image, filter) = (self.cset.image_shape(), self.cset.filter_shape());
        let mut out = Vec::with_capacity(filter.len() * self.filters * self.channels);
        for f in self.data.chunks_exact(image.len()) {
            for r in 0..filter.rows {
                out.extend_from_slice(&f[image.index(r, 0)..image.index(r, 0) + filter.cols]);
            }
        }
        out
    }

    pub fn cset(&self) -> &ConstraintSet {
        &self.cset
    }

    pub fn image_shape(&self) -> Shape2 {
        self.cset.image_shape()
    }

    pub fn filter_shape(&self) -> Shape2 {
        self.cset.filter_shape()
    }

    pub fn norm_mode(&self) -> NormMode {
        self.cset.mode()
    }

    pub fn filters(&self) -> usize {
        self.filters
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Filters of channel `c`, `[M][N]`.
    pub fn channel(&self, c: usize) -> &[f64] {
        let s = self.filters * self.image_shape().len();
        &self.data[c * s..(c + 1) * s]
    }

    pub fn filter(&self, c: usize, m: usize) -> &[f64] {
        let n = self.image_shape().len();
        &self.channel(c)[m * n..(m + 1) * n]
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.cset.contains(&self.data, tol)
    }

    /// Same constraint set and sizes, different filter data.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Dictionary {
        debug_assert_eq!(data.len(), self.data.len());
        Dictionary { cset: self.cset.clone(), filters: self.filters, channels: self.channels, data }
    }

    /// Channel `c` as a single-channel dictionary.
    pub fn select_channel(&self, c: usize) -> Dictionary {
        self.with_channels(1, self.channel(c).to_vec())
    }

    pub(crate) fn with_channels(&self, channels: usize, data: Vec<f64>) -> Dictionary {
        Dictionary { cset: self.cset.clone(), filters: self.filters, channels, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_feasible_and_seeded() {
        let a = Dictionary::random(Shape2::new(8, 8), Shape2::new(3, 3), 4, 2, NormMode::UnitEquality, 3).unwrap();
        assert!(a.is_feasible(1e-12));
        let b = Dictionary::random(Shape2::new(8, 8), Shape2::new(3, 3), 4, 2, NormMode::UnitEquality, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.filter(1, 3).len(), 64);
    }

    #[test]
    fn compact_roundtrip() {
        let a = Dictionary::random(Shape2::new(6, 5), Shape2::new(2, 3), 3, 1, NormMode::UnitBall, 9).unwrap();
        let c = a.to_compact();
        assert_eq!(c.len(), 18);
        let b = Dictionary::from_compact(a.cset().clone(), 3, 1, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn new_rejects_infeasible() {
        let cset = ConstraintSet::new(Shape2::new(2, 2), Shape2::new(1, 1), NormMode::UnitEquality).unwrap();
        assert!(Dictionary::new(cset.clone(), 1, 1, alloc::vec![1.0, 0.0, 0.0, 0.0]).is_ok());
        assert!(Dictionary::new(cset, 1, 1, alloc::vec![1.0, 0.5, 0.0, 0.0]).is_err());
    }
}
