#![allow(dead_code)]

use cdl_core::{Dictionary, NormMode, Shape2, Signals};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn noise(shape: Shape2, images: usize, seed: u64) -> Signals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..images * shape.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Signals::greyscale(shape, images, data).unwrap()
}

pub fn sparse(len: usize, density: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| if rng.random_bool(density) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect()
}

pub fn dict(shape: Shape2, filter: usize, m: usize, seed: u64) -> Dictionary {
    Dictionary::random(shape, Shape2::new(filter, filter), m, 1, NormMode::UnitEquality, seed).unwrap()
}

/// Direct circular convolution.
pub fn conv(shape: Shape2, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (r, c) = (shape.rows, shape.cols);
    let mut out = vec![0.0; r * c];
    for p in 0..r {
        for q in 0..c {
            let av = a[p * c + q];
            if av == 0.0 {
                continue;
            }
            for i in 0..r {
                for j in 0..c {
                    out[((i + p) % r) * c + (j + q) % c] += av * b[i * c + j];
                }
            }
        }
    }
    out
}

/// Direct circular correlation `sum_i a[i] b[i + t]`.
pub fn corr(shape: Shape2, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (r, c) = (shape.rows, shape.cols);
    let mut out = vec![0.0; r * c];
    for ti in 0..r {
        for tj in 0..c {
            let mut acc = 0.0;
            for i in 0..r {
                for j in 0..c {
                    acc += a[i * c + j] * b[((i + ti) % r) * c + (j + tj) % c];
                }
            }
            out[ti * c + tj] = acc;
        }
    }
    out
}

/// `sum_m d_m * x_{k,m}` for image `k` of a single-channel problem.
pub fn reconstruct(shape: Shape2, d: &Dictionary, x: &[f64], k: usize) -> Vec<f64> {
    let n = shape.len();
    let m = d.filters();
    let mut out = vec![0.0; n];
    for j in 0..m {
        let xm = &x[(k * m + j) * n..(k * m + j + 1) * n];
        for (o, v) in out.iter_mut().zip(conv(shape, d.filter(0, j), xm)) {
            *o += v;
        }
    }
    out
}

/// `1/2 sum_k ||sum_m d_m * x_{k,m} - s_k||^2` by direct convolution.
pub fn fidelity(d: &Dictionary, x: &[f64], s: &Signals) -> f64 {
    (0..s.images())
        .map(|k| {
            let r = reconstruct(s.shape(), d, x, k);
            r.iter().zip(s.image(0, k)).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum::<f64>()
        })
        .sum()
}
