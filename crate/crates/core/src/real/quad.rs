use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

struct Piece {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> Piece {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    Piece {
        lo,
        hi,
        value: k * h,
        error: ((k - g) * h).norm(),
    }
}

/// Integrates `f` over `[lo, hi]` with a globally adaptive 7/15-point
/// Gauss-Kronrod rule, splitting first at the given breakpoints.
///
/// Returns the estimate and its error estimate, or an accuracy error carrying
/// the best estimate when `tol` (absolute) cannot be reached.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<(Complex64, f64)> {
    if hi <= lo {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap: BinaryHeap<Piece> = cuts.windows(2).map(|w| kronrod(&f, w[0], w[1])).collect();
    loop {
        let value: Complex64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= tol {
            return Ok((value, error));
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Accuracy {
                estimate_re: value.re,
                estimate_im: value.im,
                error,
                requested: tol,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            heap.push(worst);
            let value: Complex64 = heap.iter().map(|p| p.value).sum();
            return Err(Error::Accuracy {
                estimate_re: value.re,
                estimate_im: value.im,
                error,
                requested: tol,
            });
        }
        heap.push(kronrod(&f, worst.lo, mid));
        heap.push(kronrod(&f, mid, worst.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_gaussian() {
        let (v, _) = integrate(|x| Complex64::new(x * x, 0.0), 0.0, 3.0, &[], 1e-13).unwrap();
        assert!((v.re - 9.0).abs() < 1e-12);
        let (v, _) = integrate(|x| Complex64::new((-PI * x * x).exp(), 0.0), -8.0, 8.0, &[], 1e-14).unwrap();
        assert!((v.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_and_kinked() {
        let (v, _) = integrate(|x| Complex64::from_polar(1.0, 2.0 * PI * 7.5 * x), 0.0, 1.0, &[], 1e-13).unwrap();
        let exact = (Complex64::from_polar(1.0, 2.0 * PI * 7.5) - 1.0) / Complex64::new(0.0, 2.0 * PI * 7.5);
        assert!((v - exact).norm() < 1e-12);
        let (v, _) = integrate(|x| Complex64::new(x.abs(), 0.0), -1.0, 2.0, &[0.0], 1e-14).unwrap();
        assert!((v.re - 2.5).abs() < 1e-14);
    }

    #[test]
    fn reports_failure_with_estimate() {
        let r = integrate(|x| Complex64::new((1.0 / x).sin(), 0.0), 1e-9, 1.0, &[], 1e-15);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
