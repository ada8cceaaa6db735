//! Training images.

use alloc::vec::Vec;

use crate::dims::Shape2;
use crate::error::{CdlError, Result};

/// Real images stored `[C][K][N]` (channel-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Signals {
    shape: Shape2,
    channels: usize,
    images: usize,
    data: Vec<f64>,
}

impl Signals {
    pub fn new(shape: Shape2, channels: usize, images: usize, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || channels == 0 || images == 0 {
            return Err(CdlError::dim("signals need a non-empty shape and >= 1 channel and image"));
        }
        if data.len() != shape.len() * channels * images {
            return Err(CdlError::dim("signal data length differs from C*K*N"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CdlError::Numerical("signal data is not finite".into()));
        }
        Ok(Signals { shape, channels, images, data })
    }

    /// Single-channel images `[K][N]`.
    pub fn greyscale(shape: Shape2, images: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(shape, 1, images, data)
    }

    pub fn shape(&self) -> Shape2 {
        self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn images(&self) -> usize {
        self.images
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// All images of channel `c`, `[K][N]`.
    pub fn channel(&self, c: usize) -> &[f64] {
        let s = self.shape.len() * self.images;
        &self.data[c * s..(c + 1) * s]
    }

    pub fn image(&self, c: usize, k: usize) -> &[f64] {
        let n = self.shape.len();
        &self.channel(c)[k * n..(k + 1) * n]
    }

    /// Channel `c` as a single-channel set.
    pub fn select_channel(&self, c: usize) -> Signals {
        Signals { shape: self.shape, channels: 1, images: self.images, data: self.channel(c).to_vec() }
    }

    /// Images `first..first+count` of every channel.
    pub fn select_images(&self, first: usize, count: usize) -> Result<Signals> {
        if count == 0 || first + count > self.images {
            return Err(CdlError::dim("image range out of bounds"));
        }
        let n = self.shape.len();
        let mut data = Vec::with_capacity(self.channels * count * n);
        for c in 0..self.channels {
            data.extend_from_slice(&self.channel(c)[first * n..(first + count) * n]);
        }
        Ok(Signals { shape: self.shape, channels: self.channels, images: count, data })
    }
}
