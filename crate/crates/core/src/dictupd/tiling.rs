//! Equality ADMM on a training set tiled into one large image, which makes
//! the `d` step rank one per bin.
//!
//! Tiling adds circular wrap-around between neighbouring tiles, so the
//! problem solved differs slightly from the untiled one.

use alloc::vec;
use alloc::vec::Vec;

use super::eqadmm::{EqAdmm, LinearSolver};
use super::{DictProblem, DictStepInfo, DictUpdate};
use crate::dictionary::Dictionary;
use crate::dims::Shape2;
use crate::error::Result;
use crate::exec::Ctx;
use crate::linalg::CgOptions;
use crate::prox::ConstraintSet;
use crate::signals::Signals;

/// Grid used for `k` tiles: `(rows, cols)` with `cols = ceil(sqrt(k))`.
pub fn tile_grid(k: usize) -> (usize, usize) {
    let mut cols = 1;
    while cols * cols < k {
        cols += 1;
    }
    (k.div_ceil(cols).max(1), cols)
}

/// Shape of the tiled image for `k` images of `shape`.
pub fn tiled_shape(shape: Shape2, k: usize) -> Shape2 {
    let (gr, gc) = tile_grid(k);
    Shape2::new(gr * shape.rows, gc * shape.cols)
}

fn tile_maps(shape: Shape2, k: usize, width: usize, maps: &[f64], out: &mut [f64]) {
    // maps [K][width][N] -> out [width][Nt], tile k at grid (k / cols, k % cols)
    let (_, gc) = tile_grid(k);
    let big = tiled_shape(shape, k);
    let n = shape.len();
    for kk in 0..k {
        let (br, bc) = (kk / gc, kk % gc);
        for j in 0..width {
            let src = &maps[(kk * width + j) * n..(kk * width + j + 1) * n];
            let dst = &mut out[j * big.len()..(j + 1) * big.len()];
            for r in 0..shape.rows {
                let o = big.index(br * shape.rows + r, bc * shape.cols);
                dst[o..o + shape.cols].copy_from_slice(&src[r * shape.cols..(r + 1) * shape.cols]);
            }
        }
    }
}

/// Tiles coefficient maps `[K][M][N]` and signals into a single image:
/// returns maps `[1][M][Nt]`, signals with one image per channel, and the
/// tiled shape. Empty grid cells are zero.
pub fn tile_training_set(coeffs: &[f64], filters: usize, signals: &Signals) -> Result<(Vec<f64>, Signals, Shape2)> {
    let shape = signals.shape();
    let (k, c) = (signals.images(), signals.channels());
    let big = tiled_shape(shape, k);
    let mut xt = vec![0.0; filters * big.len()];
    tile_maps(shape, k, filters, coeffs, &mut xt);
    let mut st = vec![0.0; c * big.len()];
    for cc in 0..c {
        tile_maps(shape, k, 1, signals.channel(cc), &mut st[cc * big.len()..(cc + 1) * big.len()]);
    }
    Ok((xt, Signals::new(big, c, 1, st)?, big))
}

fn embed(src: &[f64], small: Shape2, big: Shape2, out: &mut [f64]) {
    for (s, d) in src.chunks_exact(small.len()).zip(out.chunks_exact_mut(big.len())) {
        for r in 0..small.rows {
            let o = big.index(r, 0);
            d[o..o + small.cols].copy_from_slice(&s[r * small.cols..(r + 1) * small.cols]);
        }
    }
}

fn crop(src: &[f64], big: Shape2, small: Shape2, out: &mut [f64]) {
    for (s, d) in src.chunks_exact(big.len()).zip(out.chunks_exact_mut(small.len())) {
        for r in 0..small.rows {
            let o = big.index(r, 0);
            d[r * small.cols..(r + 1) * small.cols].copy_from_slice(&s[o..o + small.cols]);
        }
    }
}

/// Tiled equality ADMM; the inner state lives in the tiled shape.
#[derive(Clone, Debug)]
pub struct Tiled {
    template: Dictionary,
    big: Shape2,
    inner: EqAdmm,
}

impl Tiled {
    pub fn new(init: &Dictionary, images: usize, sigma: f64) -> Result<Self> {
        let small = init.image_shape();
        let big = tiled_shape(small, images);
        let cset = ConstraintSet::new(big, init.filter_shape(), init.norm_mode())?;
        let mut data = vec![0.0; big.len() * init.filters() * init.channels()];
        embed(init.data(), small, big, &mut data);
        let tiled = Dictionary::new_unchecked(cset, init.filters(), init.channels(), data)?;
        Ok(Tiled { template: init.clone(), big, inner: EqAdmm::new(&tiled, sigma, LinearSolver::Ism, CgOptions::default()) })
    }
}

impl DictUpdate for Tiled {
    fn step(&mut self, ctx: &Ctx, prob: &DictProblem) -> Result<DictStepInfo> {
        prob.check_dict(&self.template)?;
        let (xt, st, _) = tile_training_set(prob.coeffs(), prob.filters(), prob.signals())?;
        let tiled = DictProblem::new(ctx, &xt, prob.filters(), &st, None)?;
        self.inner.step(ctx, &tiled)
    }

    fn dictionary(&self) -> Dictionary {
        let small = self.template.image_shape();
        let mut data = vec![0.0; self.template.data().len()];
        crop(&self.inner.g, self.big, small, &mut data);
        self.template.with_data(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(tile_grid(1), (1, 1));
        assert_eq!(tile_grid(2), (1, 2));
        assert_eq!(tile_grid(3), (2, 2));
        assert_eq!(tile_grid(4), (2, 2));
        assert_eq!(tile_grid(5), (2, 3));
        assert_eq!(tile_grid(10), (3, 4));
    }

    fn images(k: usize) -> Signals {
        let shape = Shape2::new(8, 8);
        let data = (0..k * 64).map(|i| i as f64 + 1.0).collect();
        Signals::greyscale(shape, k, data).unwrap()
    }

    #[test]
    fn single_image_is_unchanged() {
        let s = images(1);
        let x: Vec<f64> = (0..2 * 64).map(|i| i as f64).collect();
        let (xt, st, big) = tile_training_set(&x, 2, &s).unwrap();
        assert_eq!(big, Shape2::new(8, 8));
        assert_eq!(xt, x);
        assert_eq!(st, s);
    }

    #[test]
    fn four_images_fill_the_grid_row_major() {
        let s = images(4);
        let x = vec![0.0; 4 * 64];
        let (_, st, big) = tile_training_set(&x, 1, &s).unwrap();
        assert_eq!(big, Shape2::new(16, 16));
        let t = st.image(0, 0);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(t[big.index(r, c)], s.image(0, 0)[r * 8 + c]);
                assert_eq!(t[big.index(r, c + 8)], s.image(0, 1)[r * 8 + c]);
                assert_eq!(t[big.index(r + 8, c)], s.image(0, 2)[r * 8 + c]);
                assert_eq!(t[big.index(r + 8, c + 8)], s.image(0, 3)[r * 8 + c]);
            }
        }
    }

    #[test]
    fn three_images_leave_last_block_zero() {
        let s = images(3);
        let (_, st, big) = tile_training_set(&vec![0.0; 3 * 64], 1, &s).unwrap();
        assert_eq!(big, Shape2::new(16, 16));
        let t = st.image(0, 0);
        for r in 8..16 {
            for c in 8..16 {
                assert_eq!(t[big.index(r, c)], 0.0);
            }
        }
    }
}
