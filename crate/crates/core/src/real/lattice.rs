use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::inner::{tf_inner_product_real, tf_tail_bound};
use super::window::Window;
use crate::arith::approximate_rational;
use crate::error::{Error, Result};

/// Largest denominator accepted when recognizing a rational density `alpha * beta`.
pub const MAX_DENSITY_DENOMINATOR: u64 = 128;

/// The lattice `alpha Z x beta Z` in the time-frequency plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RectLattice {
    pub alpha: f64,
    pub beta: f64,
}

impl RectLattice {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lattice parameters must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(RectLattice { alpha, beta })
    }

    pub fn density(&self) -> f64 {
        self.alpha * self.beta
    }

    /// `(1/beta) Z x (1/alpha) Z`.
    pub fn adjoint(&self) -> RectLattice {
        RectLattice {
            alpha: 1.0 / self.beta,
            beta: 1.0 / self.alpha,
        }
    }

    /// `alpha * beta = p / q` in lowest terms, when it is a small fraction.
    pub fn rational_density(&self) -> Option<(u64, u64)> {
        let r = approximate_rational(self.density(), MAX_DENSITY_DENOMINATOR, 1e-12)?;
        Some((r.numer().to_u64()?, r.denom().to_u64()?))
    }
}

/// Order used for every lattice enumeration: by `max(|k|, |l|)`, then `k`, then `l`.
pub fn lattice_order(a: &(i64, i64), b: &(i64, i64)) -> Ordering {
    let h = |p: &(i64, i64)| p.0.abs().max(p.1.abs());
    (h(a), a.0, a.1).cmp(&(h(b), b.0, b.1))
}

/// All `(k, l)` with `|k|, |l| <= r` in lattice order.
pub fn square(r: i64) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = (-r..=r).flat_map(|k| (-r..=r).map(move |l| (k, l))).collect();
    pts.sort_by(lattice_order);
    pts
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn neumaier_sum_complex<I: IntoIterator<Item = Complex64>>(xs: I) -> Complex64 {
    let v: Vec<Complex64> = xs.into_iter().collect();
    Complex64::new(neumaier_sum(v.iter().map(|z| z.re)), neumaier_sum(v.iter().map(|z| z.im)))
}

/// Complex coefficients on the lattice points `(k time_step, l freq_step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    pub time_step: f64,
    pub freq_step: f64,
    pub coeffs: BTreeMap<(i64, i64), Complex64>,
    /// Bound on the l1 norm of all coefficients not stored.
    pub tail_bound: f64,
}

impl CoefficientSequence {
    pub fn new(time_step: f64, freq_step: f64) -> Self {
        CoefficientSequence {
            time_step,
            freq_step,
            coeffs: BTreeMap::new(),
            tail_bound: 0.0,
        }
    }

    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        self.coeffs.get(&(k, l)).copied().unwrap_or_default()
    }

    /// Entries in lattice order.
    pub fn ordered(&self) -> Vec<((i64, i64), Complex64)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_by(|a, b| lattice_order(&a.0, &b.0));
        v
    }

    pub fn l1_norm(&self) -> f64 {
        neumaier_sum(self.ordered().into_iter().map(|(_, c)| c.norm()))
    }
}

impl Serialize for CoefficientSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows: Vec<(i64, i64, f64, f64)> = self.ordered().into_iter().map(|((k, l), c)| (k, l, c.re, c.im)).collect();
        let mut st = s.serialize_struct("CoefficientSequence", 4)?;
        st.serialize_field("coefficients", &rows)?;
        st.serialize_field("freq_step", &self.freq_step)?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        st.serialize_field("time_step", &self.time_step)?;
        st.end()
    }
}

/// `c(k, l) = <h, E_{l/alpha} T_{k/beta} g>` for `|k|, |l| <= radius`.
pub fn janssen_coefficients(
    g: &Window,
    h: &Window,
    lat: &RectLattice,
    radius: i64,
    tol: f64,
) -> Result<CoefficientSequence> {
    let adj = lat.adjoint();
    let pts = square(radius);
    let values: Vec<Result<Complex64>> = pts
        .par_iter()
        .map(|&(k, l)| tf_inner_product_real(h, g, k as f64 * adj.alpha, l as f64 * adj.beta, tol))
        .collect();
    let mut seq = CoefficientSequence::new(adj.alpha, adj.beta);
    for (pt, v) in pts.into_iter().zip(values) {
        seq.coeffs.insert(pt, v?);
    }
    seq.tail_bound = if h.is_zero() || g.is_zero() {
        0.0
    } else {
        tf_tail_bound(h, g, adj.alpha, adj.beta, radius)
    };
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn gaussian_janssen_entries() {
        let lat = RectLattice::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let c = janssen_coefficients(&Window::Gaussian, &Window::Gaussian, &lat, 3, 1e-12).unwrap();
        assert!((c.get(0, 0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((c.get(1, 0).re - FRAC_1_SQRT_2 * (-PI).exp()).abs() < 1e-15);
        assert!(c.tail_bound > 0.0 && c.tail_bound < 1e-20);
        let z = janssen_coefficients(&Window::Gaussian, &Window::zero(), &lat, 2, 1e-12).unwrap();
        assert!(z.coeffs.values().all(|v| v.norm() == 0.0) && z.tail_bound == 0.0);
    }

    #[test]
    fn tail_bound_covers_radius_extension() {
        let lat = RectLattice::new(0.8, 0.9).unwrap();
        let g = Window::Gaussian.tf_shift(0.1, 0.2);
        let small = janssen_coefficients(&g, &Window::Gaussian, &lat, 1, 1e-13).unwrap();
        let big = janssen_coefficients(&g, &Window::Gaussian, &lat, 3, 1e-13).unwrap();
        assert!(big.l1_norm() - small.l1_norm() <= small.tail_bound);
    }

    #[test]
    fn order_and_density() {
        let pts = square(1);
        assert_eq!(pts[0], (0, 0));
        assert_eq!(pts[1], (-1, -1));
        assert_eq!(pts.len(), 9);
        assert_eq!(RectLattice::new(0.5_f64.sqrt(), 0.5_f64.sqrt()).unwrap().rational_density(), Some((1, 2)));
        assert_eq!(RectLattice::new(0.99_f64.sqrt(), 0.99_f64.sqrt()).unwrap().rational_density(), Some((99, 100)));
        assert_eq!(RectLattice::new(1.0, 2f64.sqrt()).unwrap().rational_density(), None);
    }

    #[test]
    fn compensated_sum() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(xs), 2.0);
    }
}
