//! Deterministic synthetic data for checks and benchmarks.

use cdl_core::{Shape2, Signals};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Piecewise-smooth images in `[0, 1]`: a few discs and rectangles of random
/// intensity over a linear ramp, plus mild noise.
pub fn piecewise_images(shape: Shape2, images: usize, seed: u64) -> Signals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, w) = (shape.rows as f64, shape.cols as f64);
    let mut data = Vec::with_capacity(images * shape.len());
    for _ in 0..images {
        let mut img = vec![0.0; shape.len()];
        let (gr, gc, base) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(0.3..0.7));
        for r in 0..shape.rows {
            for c in 0..shape.cols {
                img[shape.index(r, c)] = base + gr * (r as f64 / h - 0.5) + gc * (c as f64 / w - 0.5);
            }
        }
        for _ in 0..6 {
            let (cr, cc) = (rng.random_range(0.0..h), rng.random_range(0.0..w));
            let size = rng.random_range(0.08..0.3) * h.min(w);
            let level = rng.random_range(-0.4..0.4);
            let disc = rng.random_bool(0.5);
            for r in 0..shape.rows {
                for c in 0..shape.cols {
                    let (dr, dc) = (r as f64 - cr, c as f64 - cc);
                    let inside = if disc { dr * dr + dc * dc <= size * size } else { dr.abs() <= size && dc.abs() <= 0.6 * size };
                    if inside {
                        img[shape.index(r, c)] += level;
                    }
                }
            }
        }
        for v in img.iter_mut() {
            *v = (*v + rng.random_range(-0.02..0.02)).clamp(0.0, 1.0);
        }
        data.extend_from_slice(&img);
    }
    Signals::greyscale(shape, images, data).expect("synthetic images are well formed")
}

/// Uniform noise in `[-1, 1]`, `[C][K][N]`.
pub fn noise_signals(shape: Shape2, channels: usize, images: usize, seed: u64) -> Signals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..channels * images * shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signals::new(shape, channels, images, data).expect("noise signals are well formed")
}

/// Sparse coefficient maps `[K][M][N]` with roughly `density` nonzeros.
pub fn sparse_maps(shape: Shape2, images: usize, filters: usize, density: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..images * filters * shape.len())
        .map(|_| if rng.random_bool(density) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect()
}
