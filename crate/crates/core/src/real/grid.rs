use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::lattice::RectLattice;
use super::window::{CompiledWindow, Window};
use super::zak::{FrameBounds, Walnut};
use crate::error::{Error, Result};

/// Uniform sample points `start + i step`, `i < len`, arranged so that every
/// shift by `1/beta` maps grid points to grid points (`1/beta = fiber_stride * step`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub fiber_stride: usize,
}

impl ReferenceGrid {
    /// Spacing at most `min(alpha, 1/beta) / 16`, covering the window support
    /// plus `4 max(alpha, 1/beta)` on each side.
    pub fn for_window(g: &Window, lat: &RectLattice) -> ReferenceGrid {
        let period = 1.0 / lat.beta;
        let fiber_stride = (16.0 * period / lat.alpha.min(period)).ceil() as usize;
        let step = period / fiber_stride as f64;
        let (lo, hi) = g.support().unwrap_or((0.0, 0.0));
        let margin = 4.0 * lat.alpha.max(period);
        let fibers = (((hi - lo) + 2.0 * margin) / period).ceil() as usize + 1;
        ReferenceGrid {
            start: lo - margin,
            step,
            len: fibers * fiber_stride,
            fiber_stride,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    pub fn sample(&self, w: &Window) -> Vec<Complex64> {
        (0..self.len).map(|i| w.eval(self.point(i))).collect()
    }

    /// Riemann-sum L2 norm of samples on this grid.
    pub fn l2_norm(&self, v: &[Complex64]) -> f64 {
        (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.step).sqrt()
    }

    fn fiber_len(&self) -> usize {
        self.len / self.fiber_stride
    }
}

/// The frame operator restricted to the grid, one dense block per fiber
/// `x0 + (1/beta) Z`, on which the Walnut representation acts exactly.
pub struct GridFrameOperator {
    pub grid: ReferenceGrid,
    blocks: Vec<DMatrix<Complex64>>,
}

impl GridFrameOperator {
    pub fn new(g: &Window, lat: &RectLattice, grid: ReferenceGrid) -> Self {
        let walnut = Walnut::new(g, *lat);
        let kmax = walnut.kmax();
        let m = grid.fiber_len();
        let blocks = (0..grid.fiber_stride)
            .map(|r| {
                let mut b = DMatrix::<Complex64>::zeros(m, m);
                for j in 0..m {
                    let x = grid.point(r + j * grid.fiber_stride);
                    for k in -kmax..=kmax {
                        let col = j as i64 - k;
                        if col < 0 || col >= m as i64 {
                            continue;
                        }
                        b[(j, col as usize)] = walnut.g_k(k, x) / lat.beta;
                    }
                }
                b
            })
            .collect();
        GridFrameOperator { grid, blocks }
    }

    /// Solves `S h = g` on the grid, fiber by fiber.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let stride = self.grid.fiber_stride;
        let m = self.grid.fiber_len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len];
        for (r, block) in self.blocks.iter().enumerate() {
            let b = DVector::from_iterator(m, (0..m).map(|j| rhs[r + j * stride]));
            let x = block
                .clone()
                .lu()
                .solve(&b)
                .ok_or(Error::NotAFrame { lower: 0.0, upper: f64::NAN })?;
            for j in 0..m {
                out[r + j * stride] = x[j];
            }
        }
        Ok(out)
    }

    /// Extreme eigenvalues over all fiber blocks. Each block is a compression
    /// of the frame operator, so its spectrum lies inside the optimal bounds.
    pub fn bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in &self.blocks {
            let h = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
            for e in h.symmetric_eigenvalues().iter() {
                lo = lo.min(*e);
                hi = hi.max(*e);
            }
        }
        (lo, hi)
    }
}

/// Frame bounds for arbitrary `alpha, beta` from the grid compressions.
pub fn frame_bounds_grid(g: &Window, lat: &RectLattice) -> Result<FrameBounds> {
    let grid = ReferenceGrid::for_window(g, lat);
    let op = GridFrameOperator::new(g, lat, grid.clone());
    let (lower, upper) = op.bounds();
    let expected = super::inner::norm_sq(g, 1e-12)? / lat.density();
    Ok(FrameBounds {
        lower,
        upper,
        mean_eigenvalue: f64::NAN,
        expected_mean: expected,
        zak_zero: lower <= 1e-10 * upper.abs(),
        density_numerator: 0,
        density_denominator: 0,
        grid_density: grid.fiber_stride,
        method: "walnut-compression",
    })
}

/// `||S_g f - f|| / ||f||` as a Riemann sum with spacing `step` over the
/// support of `f`, using the exact pointwise Walnut form of the frame operator of `g`.
pub fn frame_operator_deviation(g: &Window, lat: &RectLattice, f: &Window, step: f64) -> f64 {
    let walnut = Walnut::new(g, *lat);
    let fc = CompiledWindow::new(f);
    let (lo, hi) = f.support().unwrap_or((0.0, 0.0));
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let mut diff = 0.0;
    let mut orig = 0.0;
    for i in 0..n {
        let x = lo + i as f64 * step;
        let fx = fc.eval(x);
        diff += (walnut.apply(|t| fc.eval(t), x) - fx).norm_sqr();
        orig += fx.norm_sqr();
    }
    (diff / orig).sqrt()
}

/// Least-squares coefficients `b` with `sum_j b_j columns_j ~ target` (via SVD).
pub fn least_squares(columns: &[Vec<Complex64>], target: &[Complex64]) -> Result<Vec<Complex64>> {
    let rows = target.len();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let b = DVector::from_column_slice(target);
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Internal(format!("least squares failed: {e}")))?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn grid_resolves_both_lattices() {
        let lat = RectLattice::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let grid = ReferenceGrid::for_window(&Window::Gaussian, &lat);
        assert!(grid.step <= lat.alpha.min(1.0 / lat.beta) / 16.0 + 1e-15);
        assert!(((1.0 / lat.beta) - grid.fiber_stride as f64 * grid.step).abs() < 1e-12);
        assert_eq!(grid.len % grid.fiber_stride, 0);
    }

    #[test]
    fn compression_bounds_bracket_zak_bounds() {
        let lat = RectLattice::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let z = super::super::zak::frame_bounds_rational(&Window::Gaussian, &lat, 33).unwrap();
        let g = frame_bounds_grid(&Window::Gaussian, &lat).unwrap();
        assert!(g.lower >= z.lower - 0.01 && g.upper <= z.upper + 0.01);
        let irr = RectLattice::new(0.6, 2f64.sqrt() / 2.0).unwrap();
        let b = frame_bounds_grid(&Window::Gaussian, &irr).unwrap();
        assert!(b.lower > 0.0 && b.upper > b.lower);
    }

    #[test]
    fn box_is_tight() {
        let lat = RectLattice::new(1.0, 1.0).unwrap();
        let d = frame_operator_deviation(&Window::Box(1.0), &lat, &Window::Gaussian.tf_shift(0.3, 0.0), 0.01);
        assert!(d < 1e-14);
    }
}
