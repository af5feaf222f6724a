use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::inner::norm_sq;
use super::lattice::RectLattice;
use super::window::{CompiledWindow, Window};
use crate::error::{Error, Result};

/// Lower bound estimates at or below this fraction of the upper bound are
/// treated as zero: the window is declared not to generate a frame.
pub const NOT_A_FRAME_RATIO: f64 = 1e-9;

/// The correlation functions `G_k(x) = sum_n g(x - n alpha) conj(g(x - n alpha - k/beta))`
/// that make up the frame operator `S f(x) = (1/beta) sum_k G_k(x) f(x - k/beta)`.
pub struct Walnut {
    g: CompiledWindow,
    lat: RectLattice,
    lo: f64,
    hi: f64,
    kmax: i64,
}

impl Walnut {
    pub fn new(g: &Window, lat: RectLattice) -> Self {
        let (lo, hi) = g.support().unwrap_or((0.0, 0.0));
        let kmax = ((hi - lo) * lat.beta).ceil() as i64;
        Walnut { g: CompiledWindow::new(g), lat, lo, hi, kmax }
    }

    pub fn kmax(&self) -> i64 {
        self.kmax
    }

    pub fn g_k(&self, k: i64, x: f64) -> Complex64 {
        let a = self.lat.alpha;
        let shift = k as f64 / self.lat.beta;
        let n0 = ((x - self.hi).max(x - shift - self.hi) / a).floor() as i64;
        let n1 = ((x - self.lo).min(x - shift - self.lo) / a).ceil() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in n0..=n1 {
            let t = x - n as f64 * a;
            let u = self.g.eval(t);
            if u.norm_sqr() == 0.0 {
                continue;
            }
            acc += u * self.g.eval(t - shift).conj();
        }
        acc
    }

    /// `(S f)(x)` for the frame operator of the window.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -self.kmax..=self.kmax {
            let gk = self.g_k(k, x);
            if gk.norm_sqr() != 0.0 {
                acc += gk * f(x - k as f64 / self.lat.beta);
            }
        }
        acc / self.lat.beta
    }
}

/// Frame bound estimates together with the data needed to judge them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    /// Mean eigenvalue over the sample grid.
    pub mean_eigenvalue: f64,
    /// `||g||^2 / (alpha beta)`, which must lie between the bounds.
    pub expected_mean: f64,
    pub zak_zero: bool,
    pub density_numerator: u64,
    pub density_denominator: u64,
    pub grid_density: usize,
    pub method: &'static str,
}

impl FrameBounds {
    pub fn trace_identity_holds(&self) -> bool {
        let slack = 1e-9 * self.expected_mean.abs() + 1e-12;
        self.lower <= self.expected_mean + slack && self.expected_mean <= self.upper + slack
    }

    pub fn is_frame(&self) -> bool {
        self.lower > NOT_A_FRAME_RATIO * self.upper
    }
}

/// Frame bounds for `alpha beta = p/q` from the extreme eigenvalues of the
/// `p x p` Zibulski-Zeevi matrices, sampled on a `grid_density x grid_density`
/// midpoint grid of the fiber domain `[0, alpha/p) x [0, 1)`.
///
/// The reported lower bound is the sampled minimum, which can only
/// overestimate the optimal bound; odd grid densities include the centre of
/// the fiber domain, where symmetric windows have their Zak zeros.
pub fn frame_bounds_rational(g: &Window, lat: &RectLattice, grid_density: usize) -> Result<FrameBounds> {
    let (p, q) = lat.rational_density().ok_or_else(|| {
        Error::Unsupported(format!(
            "alpha*beta = {} is not a fraction with denominator <= {}",
            lat.density(),
            super::lattice::MAX_DENSITY_DENOMINATOR
        ))
    })?;
    if grid_density == 0 {
        return Err(Error::InvalidArgument("grid density must be positive".into()));
    }
    let walnut = Walnut::new(g, *lat);
    let kmax = walnut.kmax();
    let (pi, qi) = (p as i64, q as i64);
    let u = lat.alpha / p as f64;
    let n = grid_density;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut total = 0.0;
    for ix in 0..n {
        let x0 = (ix as f64 + 0.5) * u / n as f64;
        // gk[a][k + kmax] = G_k(x0 + a u)
        let gk: Vec<Vec<Complex64>> = (0..pi)
            .map(|a| (-kmax..=kmax).map(|k| walnut.g_k(k, x0 + a as f64 * u)).collect())
            .collect();
        for it in 0..n {
            let theta = (it as f64 + 0.5) / n as f64;
            let mut m = DMatrix::<Complex64>::zeros(p as usize, p as usize);
            for a in 0..pi {
                for b in 0..pi {
                    let d = a - b;
                    // k = (d + s p) / q must be an integer with |k| <= kmax
                    let smin = (-kmax * qi - d).div_euclid(pi) - 1;
                    let smax = (kmax * qi - d).div_euclid(pi) + 1;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s in smin..=smax {
                        let num = d + s * pi;
                        if num.rem_euclid(qi) != 0 {
                            continue;
                        }
                        let k = num / qi;
                        if k.abs() > kmax {
                            continue;
                        }
                        acc += gk[a as usize][(k + kmax) as usize] * Complex64::from_polar(1.0, -TAU * s as f64 * theta);
                    }
                    m[(a as usize, b as usize)] = acc / lat.beta;
                }
            }
            let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = if p == 1 {
                vec![herm[(0, 0)].re]
            } else {
                herm.symmetric_eigenvalues().iter().copied().collect()
            };
            for e in eig {
                lower = lower.min(e);
                upper = upper.max(e);
                total += e;
            }
        }
    }
    let mean = total / (n * n * p as usize) as f64;
    let expected = norm_sq(g, 1e-12)? / lat.density();
    Ok(FrameBounds {
        lower,
        upper,
        mean_eigenvalue: mean,
        expected_mean: expected,
        zak_zero: lower <= 1e-10 * upper.abs(),
        density_numerator: p,
        density_denominator: q,
        grid_density,
        method: "zibulski-zeevi",
    })
}
