use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{frame_bounds_grid, least_squares, GridFrameOperator, ReferenceGrid};
use super::inner::{tf_inner_product_real, tf_tail_bound};
use super::lattice::{lattice_order, neumaier_sum, square, CoefficientSequence, RectLattice};
use super::window::Window;
use super::zak::{frame_bounds_rational, FrameBounds};
use crate::error::{Error, Result};

/// Default grid density for frame bound estimates (odd, see `frame_bounds_rational`).
pub const DEFAULT_GRID_DENSITY: usize = 9;

const MAX_SYMBOL_RADIUS: i64 = 30;
const MAX_NEUMANN_ITERATIONS: usize = 20_000;
const MAX_NEWTON_ITERATIONS: usize = 500;
const GRID_FIT_RADIUS: i64 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DualMethod {
    Neumann,
    Grid,
}

impl std::str::FromStr for DualMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(DualMethod::Neumann),
            "grid" => Ok(DualMethod::Grid),
            _ => Err(Error::InvalidArgument(format!("unknown dual method '{s}'"))),
        }
    }
}

/// Frame bounds by the Zibulski-Zeevi method when `alpha beta` is a small
/// fraction, otherwise from grid compressions of the frame operator.
pub fn frame_bounds(g: &Window, lat: &RectLattice, grid_density: usize) -> Result<FrameBounds> {
    if lat.rational_density().is_some() {
        frame_bounds_rational(g, lat, grid_density)
    } else {
        frame_bounds_grid(g, lat)
    }
}

fn require_frame(g: &Window, lat: &RectLattice) -> Result<FrameBounds> {
    let fb = frame_bounds(g, lat, DEFAULT_GRID_DENSITY)?;
    if !fb.is_frame() {
        return Err(Error::NotAFrame { lower: fb.lower, upper: fb.upper });
    }
    Ok(fb)
}

type Seq = BTreeMap<(i64, i64), Complex64>;

/// Twisted convolution on the adjoint lattice: with `pi(k, l) = E_{l/alpha} T_{k/beta}`,
/// `pi(m) pi(n) = e^{-2 pi i l_n k_m / (alpha beta)} pi(m + n)`.
pub(crate) struct AdjointAlgebra {
    density: f64,
    exact: Option<(i64, i64)>,
    table: Vec<Complex64>,
}

impl AdjointAlgebra {
    pub(crate) fn new(lat: &RectLattice) -> Self {
        let exact = lat.rational_density().map(|(p, q)| (p as i64, q as i64));
        let table = match exact {
            Some((p, _)) => (0..p).map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / p as f64)).collect(),
            None => Vec::new(),
        };
        AdjointAlgebra { density: lat.density(), exact, table }
    }

    pub(crate) fn cocycle(&self, m: (i64, i64), n: (i64, i64)) -> Complex64 {
        let prod = n.1 * m.0;
        match self.exact {
            // 1/(alpha beta) = q/p
            Some((p, q)) => self.table[(prod.rem_euclid(p) * q).rem_euclid(p) as usize],
            None => {
                let t = prod as f64 / self.density;
                Complex64::from_polar(1.0, -TAU * (t - t.floor()))
            }
        }
    }

    pub(crate) fn mul(&self, a: &Seq, b: &Seq, prune: f64) -> Seq {
        let mut out: Seq = BTreeMap::new();
        for (m, x) in a {
            for (n, y) in b {
                let key = (m.0 + n.0, m.1 + n.1);
                *out.entry(key).or_default() += x * y * self.cocycle(*m, *n);
            }
        }
        out.retain(|_, v| v.norm() > prune);
        out
    }
}

fn l1(a: &Seq) -> f64 {
    let mut v: Vec<(&(i64, i64), &Complex64)> = a.iter().collect();
    v.sort_by(|x, y| lattice_order(x.0, y.0));
    neumaier_sum(v.into_iter().map(|(_, c)| c.norm()))
}

fn axpy(y: &mut Seq, a: Complex64, x: &Seq) {
    for (k, v) in x {
        *y.entry(*k).or_default() += a * v;
    }
}

fn delta() -> Seq {
    let mut d = BTreeMap::new();
    d.insert((0, 0), Complex64::new(1.0, 0.0));
    d
}

/// The frame operator in the adjoint-lattice algebra,
/// `S = (alpha beta)^{-1} sum <g, pi(l) g> pi(l)`, truncated where the
/// envelope tail drops below `tail_target`.
pub(crate) fn frame_symbol(g: &Window, lat: &RectLattice, tail_target: f64, tol: f64) -> Result<CoefficientSequence> {
    let adj = lat.adjoint();
    let mut radius = 1;
    while radius < MAX_SYMBOL_RADIUS && tf_tail_bound(g, g, adj.alpha, adj.beta, radius) / lat.density() > tail_target {
        radius += 1;
    }
    let pts = square(radius);
    let vals: Vec<Result<Complex64>> = pts
        .par_iter()
        .map(|&(k, l)| tf_inner_product_real(g, g, k as f64 * adj.alpha, l as f64 * adj.beta, tol))
        .collect();
    let mut seq = CoefficientSequence::new(adj.alpha, adj.beta);
    for (pt, v) in pts.into_iter().zip(vals) {
        let v = v? / lat.density();
        if v.norm() > 0.0 {
            seq.coeffs.insert(pt, v);
        }
    }
    seq.tail_bound = tf_tail_bound(g, g, adj.alpha, adj.beta, radius) / lat.density();
    Ok(seq)
}

/// `sum_l b(l) pi(l) g` as a finite combination window.
pub fn synthesize(g: &Window, coeffs: &CoefficientSequence) -> Window {
    let terms: Vec<(Complex64, f64, f64, &Window)> = coeffs
        .ordered()
        .into_iter()
        .map(|((k, l), c)| (c, k as f64 * coeffs.time_step, l as f64 * coeffs.freq_step, g))
        .collect();
    Window::combo(&terms)
}

/// A window computed from `g` as `sum_l b(l) pi(l) g` over the adjoint lattice.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedWindow {
    #[serde(skip)]
    pub window: Window,
    pub coefficients: CoefficientSequence,
    pub bounds: FrameBounds,
    pub iterations: usize,
    pub last_update: f64,
    pub method: &'static str,
}

/// The canonical dual window `S^{-1} g`.
pub fn canonical_dual(g: &Window, lat: &RectLattice, method: DualMethod, tol: f64) -> Result<Window> {
    canonical_dual_detailed(g, lat, method, tol).map(|d| d.window)
}

pub fn canonical_dual_detailed(g: &Window, lat: &RectLattice, method: DualMethod, tol: f64) -> Result<DerivedWindow> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let bounds = require_frame(g, lat)?;
    match method {
        DualMethod::Neumann => neumann_dual(g, lat, bounds, tol),
        DualMethod::Grid => grid_dual(g, lat, bounds, tol),
    }
}

fn neumann_dual(g: &Window, lat: &RectLattice, bounds: FrameBounds, tol: f64) -> Result<DerivedWindow> {
    let alg = AdjointAlgebra::new(lat);
    let symbol = frame_symbol(g, lat, tol * 1e-3, tol * 1e-3)?;
    let s: Seq = symbol.coeffs.clone();
    let mu = 2.0 / (bounds.lower + bounds.upper);
    let ratio = (bounds.upper - bounds.lower) / (bounds.upper + bounds.lower);
    let prune = tol * 1e-7;
    let d = delta();
    let mut x: Seq = BTreeMap::new();
    x.insert((0, 0), Complex64::new(mu, 0.0));
    let mut last = f64::INFINITY;
    let mut first = None;
    for it in 1..=MAX_NEUMANN_ITERATIONS {
        let mut r = d.clone();
        axpy(&mut r, Complex64::new(-1.0, 0.0), &alg.mul(&s, &x, prune));
        let update = mu * l1(&r);
        let start = *first.get_or_insert(update);
        axpy(&mut x, Complex64::new(mu, 0.0), &r);
        x.retain(|_, v| v.norm() > prune);
        last = update;
        if update < tol * 1e-2 {
            return Ok(finish(g, lat, x, bounds, it, last, symbol.tail_bound, "neumann"));
        }
        if !update.is_finite() || update > 1e3 * start.max(1.0) {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEUMANN_ITERATIONS,
        spectral_ratio: ratio,
        last_update: last,
    })
}

fn finish(
    g: &Window,
    lat: &RectLattice,
    x: Seq,
    bounds: FrameBounds,
    iterations: usize,
    last_update: f64,
    symbol_tail: f64,
    method: &'static str,
) -> DerivedWindow {
    let adj = lat.adjoint();
    let mut coefficients = CoefficientSequence::new(adj.alpha, adj.beta);
    coefficients.coeffs = x;
    coefficients.tail_bound = symbol_tail;
    let window = synthesize(g, &coefficients);
    DerivedWindow {
        window,
        coefficients,
        bounds,
        iterations,
        last_update,
        method,
    }
}

fn grid_dual(g: &Window, lat: &RectLattice, bounds: FrameBounds, _tol: f64) -> Result<DerivedWindow> {
    let grid = ReferenceGrid::for_window(g, lat);
    let op = GridFrameOperator::new(g, lat, grid.clone());
    let h = op.solve(&grid.sample(g))?;
    let adj = lat.adjoint();
    let pts = square(GRID_FIT_RADIUS);
    let columns: Vec<Vec<Complex64>> = pts
        .iter()
        .map(|&(k, l)| grid.sample(&g.tf_shift(k as f64 * adj.alpha, l as f64 * adj.beta)))
        .collect();
    let b = least_squares(&columns, &h)?;
    let x: Seq = pts.into_iter().zip(b).filter(|(_, v)| v.norm() > 0.0).collect();
    Ok(finish(g, lat, x, bounds, 1, 0.0, f64::NAN, "grid"))
}

/// The canonical tight window `S^{-1/2} g`.
pub fn tight_window(g: &Window, lat: &RectLattice, tol: f64) -> Result<Window> {
    tight_window_detailed(g, lat, tol).map(|d| d.window)
}

/// Newton-Schulz iteration `y <- y (3 - s' y^2) / 2` for the inverse square
/// root of the normalized symbol `s' = mu s` in the adjoint-lattice algebra.
pub fn tight_window_detailed(g: &Window, lat: &RectLattice, tol: f64) -> Result<DerivedWindow> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let bounds = require_frame(g, lat)?;
    let alg = AdjointAlgebra::new(lat);
    let symbol = frame_symbol(g, lat, tol * 1e-3, tol * 1e-3)?;
    let mu = 2.0 / (bounds.lower + bounds.upper);
    let ratio = (bounds.upper - bounds.lower) / (bounds.upper + bounds.lower);
    let sn: Seq = symbol.coeffs.iter().map(|(k, v)| (*k, v * mu)).collect();
    let prune = tol * 1e-7;
    let mut y = delta();
    let mut last = f64::INFINITY;
    for it in 1..=MAX_NEWTON_ITERATIONS {
        let y2 = alg.mul(&y, &y, prune);
        let mut t: Seq = BTreeMap::new();
        t.insert((0, 0), Complex64::new(3.0, 0.0));
        axpy(&mut t, Complex64::new(-1.0, 0.0), &alg.mul(&sn, &y2, prune));
        let next: Seq = alg
            .mul(&y, &t, prune)
            .into_iter()
            .map(|(k, v)| (k, v * 0.5))
            .collect();
        let mut diff = next.clone();
        axpy(&mut diff, Complex64::new(-1.0, 0.0), &y);
        last = l1(&diff);
        y = next;
        if last < tol * 1e-2 {
            let x: Seq = y.into_iter().map(|(k, v)| (k, v * mu.sqrt())).collect();
            return Ok(finish(g, lat, x, bounds, it, last, symbol.tail_bound, "newton-schulz"));
        }
        if !last.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        spectral_ratio: ratio,
        last_update: last,
    })
}

/// Largest `|<h, pi(l) g> - alpha beta delta_l|` over the adjoint lattice points
/// with `|k|, |l| <= radius`.
pub fn wexler_raz_residual_real(g: &Window, h: &Window, lat: &RectLattice, radius: i64, tol: f64) -> Result<f64> {
    let adj = lat.adjoint();
    let mut worst: f64 = 0.0;
    for (k, l) in square(radius) {
        let v = tf_inner_product_real(h, g, k as f64 * adj.alpha, l as f64 * adj.beta, tol)?;
        let expected = if (k, l) == (0, 0) { lat.density() } else { 0.0 };
        worst = worst.max((v - expected).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::grid::frame_operator_deviation;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn half() -> RectLattice {
        RectLattice::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap()
    }

    #[test]
    fn box_is_self_dual() {
        let lat = RectLattice::new(1.0, 1.0).unwrap();
        let h = canonical_dual(&Window::Box(1.0), &lat, DualMethod::Neumann, 1e-10).unwrap();
        for t in [0.1, 0.5, 0.9, 1.5] {
            assert!((h.eval(t) - Window::Box(1.0).eval(t)).norm() < 1e-12);
        }
        let gamma = tight_window(&Window::Box(1.0), &lat, 1e-10).unwrap();
        assert!((gamma.eval(0.4).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_dual_satisfies_wexler_raz() {
        let lat = half();
        let d = canonical_dual_detailed(&Window::Gaussian, &lat, DualMethod::Neumann, 1e-8).unwrap();
        let res = wexler_raz_residual_real(&Window::Gaussian, &d.window, &lat, 5, 1e-12).unwrap();
        assert!(res < 1e-8, "residual {res}");
        // duality is symmetric
        let back = wexler_raz_residual_real(&d.window, &Window::Gaussian, &lat, 5, 1e-12).unwrap();
        assert!(back < 1e-8, "residual {back}");
    }

    #[test]
    fn dual_methods_agree() {
        let lat = half();
        let tol = 1e-8;
        let a = canonical_dual(&Window::Gaussian, &lat, DualMethod::Neumann, tol).unwrap();
        let b = canonical_dual(&Window::Gaussian, &lat, DualMethod::Grid, tol).unwrap();
        let grid = ReferenceGrid::for_window(&Window::Gaussian, &lat);
        let diff: Vec<Complex64> = grid.points().iter().map(|&t| a.eval(t) - b.eval(t)).collect();
        let d = grid.l2_norm(&diff);
        assert!(d < 10.0 * tol, "L2 difference {d}");
    }

    #[test]
    fn not_a_frame_is_reported() {
        let s = 1.2f64.sqrt();
        let lat = RectLattice::new(s, s).unwrap();
        assert!(matches!(
            canonical_dual(&Window::Gaussian, &lat, DualMethod::Neumann, 1e-8),
            Err(Error::NotAFrame { .. })
        ));
        let lat = RectLattice::new(1.0, 1.0).unwrap();
        assert!(matches!(tight_window(&Window::Gaussian, &lat, 1e-8), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn tight_window_is_tight_and_scale_invariant() {
        let lat = half();
        let gamma = tight_window(&Window::Gaussian, &lat, 1e-9).unwrap();
        let f = Window::Gaussian.tf_shift(0.37, 0.2);
        let dev = frame_operator_deviation(&gamma, &lat, &f, 0.05);
        assert!(dev < 1e-6, "deviation {dev}");
        let scaled = tight_window(&Window::Gaussian.scale(Complex64::new(3.0, 0.0)), &lat, 1e-9).unwrap();
        for t in [-0.5, 0.0, 0.8] {
            assert!((scaled.eval(t) - gamma.eval(t)).norm() < 1e-8);
        }
    }
}
