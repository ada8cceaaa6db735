//! Soft thresholding and projection onto the filter constraint set.

use alloc::vec;
use alloc::vec::Vec;

use crate::dims::Shape2;
use crate::error::{CdlError, Result};

/// `sign(v) * max(0, |v| - gamma)`.
#[inline]
pub fn soft_threshold(v: f64, gamma: f64) -> f64 {
    v.signum() * (v.abs() - gamma).max(0.0)
}

/// Elementwise [`soft_threshold`] in place.
pub fn soft_threshold_slice(v: &mut [f64], gamma: f64) {
    for x in v {
        *x = soft_threshold(*x, gamma);
    }
}

/// Norm constraint applied after the support projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum NormMode {
    /// `||d|| = 1`.
    #[default]
    UnitEquality,
    /// `||d|| <= 1`.
    UnitBall,
}

impl NormMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::UnitEquality => "eq",
            NormMode::UnitBall => "ball",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eq" | "unit-equality" | "UnitEquality" => Some(NormMode::UnitEquality),
            "ball" | "unit-ball" | "UnitBall" => Some(NormMode::UnitBall),
            _ => None,
        }
    }
}

/// Filters that vanish outside the top-left `filter` corner of an `image`
/// sized array and satisfy the norm constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    image: Shape2,
    filter: Shape2,
    mode: NormMode,
    support: Vec<bool>,
}

impl ConstraintSet {
    pub fn new(image: Shape2, filter: Shape2, mode: NormMode) -> Result<Self> {
        if filter.is_empty() || !filter.fits_within(image) {
            return Err(CdlError::dim("filter support must be non-empty and fit in the image"));
        }
        let mut support = vec![false; image.len()];
        for r in 0..filter.rows {
            for c in 0..filter.cols {
                support[image.index(r, c)] = true;
            }
        }
        Ok(ConstraintSet { image, filter, mode, support })
    }

    pub fn image_shape(&self) -> Shape2 {
        self.image
    }

    pub fn filter_shape(&self) -> Shape2 {
        self.filter
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn support_mask(&self) -> &[bool] {
        &self.support
    }

    /// Projects one zero-padded filter in place. Returns `true` when the
    /// supported part was zero (in equality mode the filter is then replaced
    /// by a unit impulse at the origin).
    pub fn project_in_place(&self, y: &mut [f64]) -> bool {
        debug_assert_eq!(y.len(), self.image.len());
        let mut ss = 0.0;
        for (v, &keep) in y.iter_mut().zip(&self.support) {
            if keep {
                ss += *v * *v;
            } else {
                *v = 0.0;
            }
        }
        let norm = libm::sqrt(ss);
        match self.mode {
            NormMode::UnitEquality if norm == 0.0 => {
                y[0] = 1.0;
                true
            }
            NormMode::UnitBall if norm <= 1.0 => norm == 0.0,
            _ => {
                if norm != 1.0 {
                    for v in y.iter_mut() {
                        *v /= norm;
                    }
                }
                false
            }
        }
    }

    /// Projects a stack of filters `[..][N]`, returning the number of
    /// degenerate (zero-norm) filters.
    pub fn project_filters(&self, y: &mut [f64]) -> usize {
        y.chunks_exact_mut(self.image.len())
            .map(|f| self.project_in_place(f) as usize)
            .sum()
    }

    /// Whether every filter in the stack is supported exactly and meets the
    /// norm constraint within `tol`.
    pub fn contains(&self, filters: &[f64], tol: f64) -> bool {
        filters.chunks_exact(self.image.len()).all(|f| {
            let mut ss = 0.0;
            for (v, &keep) in f.iter().zip(&self.support) {
                if !keep && *v != 0.0 {
                    return false;
                }
                ss += v * v;
            }
            let norm = libm::sqrt(ss);
            match self.mode {
                NormMode::UnitEquality => (norm - 1.0).abs() <= tol,
                NormMode::UnitBall => norm <= 1.0 + tol,
            }
        })
    }
}

/// Projection of a stack of zero-padded filters onto the constraint set.
/// Returns the projected filters and the count of degenerate filters.
pub fn project_cpn(y: &[f64], cset: &ConstraintSet) -> Result<(Vec<f64>, usize)> {
    if !y.len().is_multiple_of(cset.image.len()) {
        return Err(CdlError::dim("filter stack length is not a multiple of the image size"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CdlError::Numerical("projection input is not finite".into()));
    }
    let mut out = y.to_vec();
    let n = cset.project_filters(&mut out);
    Ok((out, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cset(mode: NormMode) -> ConstraintSet {
        ConstraintSet::new(Shape2::new(4, 4), Shape2::new(2, 2), mode).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(1.2, 0.5), 1.2 - 0.5);
        assert!((soft_threshold(1.2, 0.5) - 0.7).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.3, 1.0), 0.0);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
        for v in [-3.0, -1e-300, 0.0, 2.5, 1e10] {
            assert_eq!(soft_threshold(v, 0.0), v);
        }
    }

    #[test]
    fn support_has_corner_entries() {
        let c = cset(NormMode::UnitEquality);
        assert_eq!(c.support_mask().iter().filter(|&&b| b).count(), 4);
        assert!(c.support_mask()[0] && c.support_mask()[1] && c.support_mask()[4] && c.support_mask()[5]);
    }

    #[test]
    fn feasible_input_is_unchanged() {
        let c = cset(NormMode::UnitEquality);
        let mut y = vec![0.0; 16];
        y[0] = 0.6;
        y[5] = 0.8;
        let (p, n) = project_cpn(&y, &c).unwrap();
        assert_eq!(n, 0);
        assert!(p.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-15));
    }

    #[test]
    fn supported_norm_four_is_scaled() {
        let c = cset(NormMode::UnitEquality);
        let mut y = vec![0.0; 16];
        y[1] = 4.0;
        let (p, _) = project_cpn(&y, &c).unwrap();
        assert_eq!(p[1], 1.0);
        let mut y = vec![0.0; 16];
        y[0] = 2.4;
        y[4] = 3.2;
        let (p, _) = project_cpn(&y, &c).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[4] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn energy_outside_support_falls_back_to_impulse() {
        let c = cset(NormMode::UnitEquality);
        let mut y = vec![0.0; 16];
        y[15] = 3.0;
        y[2] = -1.0;
        let (p, n) = project_cpn(&y, &c).unwrap();
        assert_eq!(n, 1);
        let mut want = vec![0.0; 16];
        want[0] = 1.0;
        assert_eq!(p, want);
    }

    #[test]
    fn ball_mode_keeps_short_filters() {
        let c = cset(NormMode::UnitBall);
        let mut y = vec![0.0; 16];
        y[0] = 0.5;
        y[3] = 7.0;
        let (p, n) = project_cpn(&y, &c).unwrap();
        assert_eq!(n, 0);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[3], 0.0);
        let (p, n) = project_cpn(&[0.0; 16], &c).unwrap();
        assert_eq!((p, n.min(1)), (vec![0.0; 16], 1));
        y[0] = 3.0;
        let (p, _) = project_cpn(&y, &c).unwrap();
        assert_eq!(p[0], 1.0);
    }

    #[test]
    fn rejects_non_finite() {
        let c = cset(NormMode::UnitEquality);
        let mut y = vec![0.0; 16];
        y[0] = f64::NAN;
        assert!(matches!(project_cpn(&y, &c), Err(CdlError::Numerical(_))));
    }
}
