use alloc::format;

use crate::error::{CdlError, Result};

/// Row-major 2D extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape2 {
    pub rows: usize,
    pub cols: usize,
}

impl Shape2 {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Shape2 { rows, cols }
    }

    /// Number of pixels.
    pub const fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn fits_within(&self, outer: Shape2) -> bool {
        self.rows <= outer.rows && self.cols <= outer.cols
    }
}

/// Sizes of a learning problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemDims {
    pub image: Shape2,
    pub filter: Shape2,
    /// Number of filters (M).
    pub filters: usize,
    /// Number of images (K).
    pub images: usize,
    /// Number of channels (C), 1 for greyscale.
    pub channels: usize,
}

impl ProblemDims {
    pub fn new(
        image: Shape2,
        filter: Shape2,
        filters: usize,
        images: usize,
        channels: usize,
    ) -> Result<Self> {
        if image.is_empty() || filter.is_empty() {
            return Err(CdlError::dim("image and filter shapes must be non-empty"));
        }
        if !filter.fits_within(image) {
            return Err(CdlError::dim(format!(
                "filter {}x{} larger than image {}x{}",
                filter.rows, filter.cols, image.rows, image.cols
            )));
        }
        if filters == 0 || images == 0 || channels == 0 {
            return Err(CdlError::dim("filter, image and channel counts must be >= 1"));
        }
        Ok(ProblemDims { image, filter, filters, images, channels })
    }

    /// Pixels per image (N).
    pub fn pixels(&self) -> usize {
        self.image.len()
    }

    /// Length of a coefficient tensor `[K][M][N]`.
    pub fn coeff_len(&self) -> usize {
        self.images * self.filters * self.pixels()
    }
}
