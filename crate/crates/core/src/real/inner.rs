use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use num_complex::Complex64;

use super::quad::integrate;
use super::window::{Atom, Shape, Window};
use crate::error::Result;

/// `<s1, E_b T_a s2> = int s1(u) s2(u - a) e^{-2 pi i b u} du` for two shapes.
pub fn shape_correlation(s1: Shape, s2: Shape, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    match (s1, s2) {
        (Shape::Gaussian, Shape::Gaussian) => Ok(Complex64::from_polar(
            FRAC_1_SQRT_2 * (-PI * (a * a + b * b) / 2.0).exp(),
            -PI * a * b,
        )),
        (Shape::Box(g1), Shape::Box(g2)) => {
            let lo = a.max(0.0);
            let hi = g1.min(a + g2);
            if hi <= lo {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let len = hi - lo;
            let x = PI * b * len;
            let mag = if x.abs() < 1e-8 { len * (1.0 - x * x / 6.0) } else { x.sin() / (PI * b) };
            Ok(Complex64::from_polar(mag, -PI * b * (lo + hi)))
        }
        _ => {
            let (l1, h1) = s1.support();
            let (l2, h2) = s2.support();
            let lo = l1.max(l2 + a);
            let hi = h1.min(h2 + a);
            let mut bps = s1.breakpoints();
            bps.extend(s2.breakpoints().iter().map(|x| x + a));
            integrate(
                |u| {
                    let v = s1.eval(u) * s2.eval(u - a);
                    if v == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar(v, -TAU * b * u)
                    }
                },
                lo,
                hi,
                &bps,
                tol,
            )
            .map(|(v, _)| v)
        }
    }
}

/// `<a1, a2>` for two atoms.
fn atom_inner(a1: &Atom, a2: &Atom, tol: f64) -> Result<Complex64> {
    let dt = a2.shift - a1.shift;
    let dw = a2.freq - a1.freq;
    let v = shape_correlation(a1.shape, a2.shape, dt, dw, tol)?;
    Ok(a1.coeff * a2.coeff.conj() * Complex64::from_polar(1.0, -TAU * a1.shift * dw) * v)
}

/// `<w1, E_b T_a w2>`, accurate to `tol`.
pub fn tf_inner_product_real(w1: &Window, w2: &Window, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let left = w1.atoms();
    let right: Vec<Atom> = w2.atoms().iter().map(|x| x.tf_shift(a, b)).collect();
    let pairs = (left.len() * right.len()).max(1) as f64;
    // A Gaussian pair is skipped when its closed-form modulus is below tol / pairs.
    let log_budget = (tol / pairs).ln() - FRAC_1_SQRT_2.ln();
    let log_coeff = |a: &Atom| a.coeff.norm().ln();
    let right_logs: Vec<f64> = right.iter().map(log_coeff).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in &left {
        let lx = log_coeff(x);
        for (y, ly) in right.iter().zip(&right_logs) {
            if let (Shape::Gaussian, Shape::Gaussian) = (x.shape, y.shape) {
                let (dt, dw) = (y.shift - x.shift, y.freq - x.freq);
                if lx + ly - PI * (dt * dt + dw * dw) / 2.0 < log_budget {
                    continue;
                }
            }
            let weight = (x.coeff.norm() * y.coeff.norm()).max(1e-300);
            acc += atom_inner(x, y, tol / (pairs * weight))?;
        }
    }
    Ok(acc)
}

/// `<w1, w2>`.
pub fn inner_product_real(w1: &Window, w2: &Window, tol: f64) -> Result<Complex64> {
    tf_inner_product_real(w1, w2, 0.0, 0.0, tol)
}

pub fn norm_sq(w: &Window, tol: f64) -> Result<f64> {
    inner_product_real(w, w, tol).map(|v| v.re.max(0.0))
}

fn gauss_full_1d(step: f64) -> f64 {
    1.0 + SQRT_2 / step
}

/// Bound on `sum_{|k| > r} e^{-pi (k step + c)^2 / 2}`.
fn gauss_tail_1d(step: f64, c: f64, r: i64) -> f64 {
    let side = |d: f64| {
        if d <= 0.0 {
            return f64::INFINITY;
        }
        (-PI * d * d / 2.0).exp() / (1.0 - (-PI * d * step).exp())
    };
    let t = side((r as f64 + 1.0) * step + c) + side((r as f64 + 1.0) * step - c);
    t.min(gauss_full_1d(step))
}

fn shape_order(s: Shape) -> Option<u32> {
    match s {
        Shape::Gaussian => None,
        Shape::Box(_) => Some(1),
        Shape::BSpline(n) => Some(n),
    }
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// Bound on `sum_{(k,l) outside [-r, r]^2} |V(s1, s2; k dt + a0, l dw + b0)|`.
fn shape_tail(s1: Shape, s2: Shape, dt: f64, a0: f64, dw: f64, b0: f64, r: i64) -> f64 {
    if let (Shape::Gaussian, Shape::Gaussian) = (s1, s2) {
        let ft = gauss_full_1d(dt);
        let fw = gauss_full_1d(dw);
        let tt = gauss_tail_1d(dt, a0, r);
        let tw = gauss_tail_1d(dw, b0, r);
        return FRAC_1_SQRT_2 * (tt * fw + ft * tw);
    }
    let (Some(o1), Some(o2)) = (shape_order(s1), shape_order(s2)) else {
        return f64::INFINITY;
    };
    let (l1, h1) = s1.support();
    let (l2, h2) = s2.support();
    let kmin = ((l1 - h2 - a0) / dt).floor() as i64;
    let kmax = ((h1 - l2 - a0) / dt).ceil() as i64;
    let q = o1.min(o2) - 1;
    let mut total = 0.0;
    for k in kmin..=kmax {
        let u = k as f64 * dt + a0;
        let len = h1.min(h2 + u) - l1.max(l2 + u);
        if len <= 0.0 {
            continue;
        }
        let all_l = k.abs() > r;
        if let (Shape::Box(_), Shape::Box(_)) = (s1, s2) {
            // |V| = |sin(pi B len)| / (pi |B|): vanishes on the whole frequency
            // lattice only when len * dw and len * b0 are integers.
            if !(near_integer(len * dw) && near_integer(len * b0)) {
                return f64::INFINITY;
            }
            let l0 = -b0 / dw;
            if near_integer(l0) && (all_l || (l0.round() as i64).abs() > r) {
                total += len;
            }
            continue;
        }
        if q == 0 {
            return f64::INFINITY;
        }
        let c = 4f64.powi(q as i32 + 1) / TAU.powi(q as i32 + 1);
        let bound = |bw: f64| {
            if bw == 0.0 {
                len
            } else {
                len.min(c / bw.abs().powi(q as i32 + 1))
            }
        };
        let lmax = r + 400;
        let mut s = 0.0;
        for l in -lmax..=lmax {
            if all_l || l.abs() > r {
                s += bound(l as f64 * dw + b0);
            }
        }
        let w = (lmax as f64 + 1.0) * dw - b0.abs();
        if w <= 0.0 {
            return f64::INFINITY;
        }
        s += 2.0 * c * (w.powi(-(q as i32) - 1) + w.powi(-(q as i32)) / (q as f64 * dw));
        total += s;
    }
    total
}

/// Rigorous bound on `sum |<w1, E_{l dw} T_{k dt} w2>|` over lattice points
/// with `max(|k|, |l|) > r`. Infinite when no summable envelope is known.
pub fn tf_tail_bound(w1: &Window, w2: &Window, dt: f64, dw: f64, r: i64) -> f64 {
    let mut total = 0.0;
    for x in w1.atoms() {
        for y in w2.atoms() {
            let weight = x.coeff.norm() * y.coeff.norm();
            if weight == 0.0 {
                continue;
            }
            total += weight * shape_tail(x.shape, y.shape, dt, y.shift - x.shift, dw, y.freq - x.freq, r);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_inner(w1: &Window, w2: &Window, a: f64, b: f64) -> Complex64 {
        let w2s = w2.tf_shift(a, b);
        let (s1, e1) = w1.support().unwrap();
        let (s2, e2) = w2s.support().unwrap();
        let mut bps: Vec<f64> = w1.atoms().iter().flat_map(|x| x.shape.breakpoints().into_iter().map(move |p| p + x.shift)).collect();
        bps.extend(w2s.atoms().iter().flat_map(|x| x.shape.breakpoints().into_iter().map(move |p| p + x.shift)));
        integrate(|t| w1.eval(t) * w2s.eval(t).conj(), s1.max(s2), e1.min(e2), &bps, 1e-13).unwrap().0
    }

    #[test]
    fn gaussian_examples() {
        let g = Window::Gaussian;
        let v = tf_inner_product_real(&g, &g, 0.0, 0.0, 1e-12).unwrap();
        assert!((v - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let v = tf_inner_product_real(&g, &g, 1.0, 1.0, 1e-12).unwrap();
        assert!((v.re + FRAC_1_SQRT_2 * (-PI).exp()).abs() < 1e-16 && v.im.abs() < 1e-15);
        assert!((v.re + 0.030_557_0).abs() < 1e-6);
        let b = Window::Box(1.0);
        for m in [-3.0, 1.0, 2.0] {
            assert!(tf_inner_product_real(&b, &b, 0.0, m, 1e-12).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_closed_form_matches_quadrature() {
        let g = Window::Gaussian;
        for i in 0..7 {
            for j in 0..7 {
                let (a, b) = (-3.0 + i as f64, -3.0 + j as f64);
                let closed = tf_inner_product_real(&g, &g, a, b, 1e-12).unwrap();
                assert!((closed - quad_inner(&g, &g, a, b)).norm() < 1e-10, "({a}, {b})");
            }
        }
    }

    #[test]
    fn mixed_pairs_match_quadrature() {
        let ws = [
            Window::Box(1.0),
            Window::Box(0.7),
            Window::BSpline(3),
            Window::Gaussian.tf_shift(0.2, -0.4).add(&Window::BSpline(2).scale(Complex64::new(0.0, 0.5))),
        ];
        for w1 in &ws {
            for w2 in &ws {
                for (a, b) in [(0.0, 0.0), (0.3, 1.7), (-0.45, -2.2)] {
                    let v = tf_inner_product_real(w1, w2, a, b, 1e-12).unwrap();
                    assert!((v - quad_inner(w1, w2, a, b)).norm() < 1e-10, "{w1} {w2} ({a}, {b})");
                }
            }
        }
    }

    #[test]
    fn covariance_relation() {
        let w1 = Window::Gaussian.tf_shift(0.3, 0.1);
        let w2 = Window::BSpline(3).tf_shift(-0.2, 0.5);
        for (a, b) in [(0.4, 1.3), (-1.1, 0.6)] {
            let lhs = tf_inner_product_real(&w1, &w2, a, b, 1e-12).unwrap();
            let rhs = tf_inner_product_real(&w2, &w1, -a, -b, 1e-12).unwrap().conj()
                * Complex64::from_polar(1.0, -TAU * a * b);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn norms() {
        assert!((norm_sq(&Window::BSpline(2), 1e-12).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((norm_sq(&Window::Box(0.5), 1e-12).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_bounds_dominate_omitted_sums() {
        let cases = [
            (Window::Gaussian, Window::Gaussian, FRAC_1_SQRT_2 * 2.0, SQRT_2, 2),
            (Window::Gaussian.tf_shift(0.3, -0.2), Window::Gaussian, 1.0, 0.5, 3),
            (Window::BSpline(3), Window::BSpline(2), 1.0, 1.0, 2),
            (Window::Box(1.0), Window::Box(1.0), 1.0, 1.0, 0),
        ];
        for (w1, w2, dt, dw, r) in cases {
            let bound = tf_tail_bound(&w1, &w2, dt, dw, r);
            assert!(bound.is_finite(), "{w1} {w2}");
            let big: i64 = 25;
            let mut omitted = 0.0;
            for k in -big..=big {
                for l in -big..=big {
                    if k.abs().max(l.abs()) > r {
                        omitted += tf_inner_product_real(&w1, &w2, k as f64 * dt, l as f64 * dw, 1e-13).unwrap().norm();
                    }
                }
            }
            assert!(omitted <= bound + 1e-12, "{w1} {w2}: {omitted} > {bound}");
        }
        assert!(tf_tail_bound(&Window::Box(1.0), &Window::Box(1.0), 1.0, 2.0, 1).is_finite());
        assert!(tf_tail_bound(&Window::Box(1.0), &Window::Box(1.0), 1.0, 0.7, 1).is_infinite());
        assert!(tf_tail_bound(&Window::Box(1.0), &Window::Gaussian, 1.0, 1.0, 1).is_infinite());
    }
}
