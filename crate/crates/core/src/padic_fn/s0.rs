use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{fmt_rational, pruefer_char_eval, Prime, PrueferElement, Rational};
use crate::error::Result;

/// A finite Fourier series `x -> sum_z c(z) e^{2 pi i {x z}_p}` on `Z_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct S0ZpSeries {
    p: Prime,
    coeffs: BTreeMap<PrueferElement, Complex64>,
}

impl S0ZpSeries {
    pub fn new(p: Prime) -> Self {
        S0ZpSeries { p, coeffs: BTreeMap::new() }
    }

    /// `1_{Z_p}`: the single coefficient `c(0) = 1`.
    pub fn unit_indicator(p: Prime) -> Self {
        let mut s = Self::new(p);
        s.coeffs.insert(PrueferElement::zero(p), Complex64::new(1.0, 0.0));
        s
    }

    pub fn with(mut self, z: PrueferElement, c: Complex64) -> Self {
        assert_eq!(z.prime(), self.p, "Pruefer element over a different prime");
        *self.coeffs.entry(z).or_default() += c;
        self
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn coefficients(&self) -> &BTreeMap<PrueferElement, Complex64> {
        &self.coeffs
    }

    /// Evaluates at `x` in `Z_p`.
    pub fn eval(&self, x: &Rational) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, c) in &self.coeffs {
            acc += c * pruefer_char_eval(z, x)?.to_complex();
        }
        Ok(acc)
    }
}

impl Serialize for S0ZpSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs: Vec<(String, f64, f64)> = self
            .coeffs
            .iter()
            .map(|(z, c)| (fmt_rational(&z.to_rational()), c.re, c.im))
            .collect();
        let mut st = s.serialize_struct("S0ZpSeries", 2)?;
        st.serialize_field("coefficients", &coeffs)?;
        st.serialize_field("prime", &self.p)?;
        st.end()
    }
}

/// `||f||_{S_0(Z_p)}`: the l1 norm of the Fourier coefficients.
pub fn s0_norm(series: &S0ZpSeries) -> f64 {
    series.coeffs.values().map(|c| c.norm()).sum()
}

/// The S_0 norm on `Q_p` of a function given by one series per coset `y + Z_p`.
pub fn s0_norm_qp(family: &BTreeMap<Rational, S0ZpSeries>) -> f64 {
    family.values().map(s0_norm).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let p = Prime::new(3).unwrap();
        let z = PrueferElement::new(p, 1, 1).unwrap();
        let s = S0ZpSeries::new(p).with(z, Complex64::new(3.0, 4.0));
        assert_eq!(s0_norm(&s), 5.0);
        assert_eq!(s0_norm(&S0ZpSeries::unit_indicator(p)), 1.0);
        let two = S0ZpSeries::unit_indicator(p).with(z, Complex64::new(0.0, 1.0));
        let mut fam = BTreeMap::new();
        fam.insert(Rational::new(0.into(), 1.into()), two.clone());
        fam.insert(Rational::new(1.into(), 3.into()), two);
        assert_eq!(s0_norm_qp(&fam), 4.0);
    }

    #[test]
    fn evaluation() {
        let p = Prime::new(2).unwrap();
        let half = PrueferElement::new(p, 1, 1).unwrap();
        // 1 + e^{2 pi i x/2} is 2 on 2Z_2 and 0 on 1 + 2Z_2
        let s = S0ZpSeries::unit_indicator(p).with(half, Complex64::new(1.0, 0.0));
        let at = |n: i64| s.eval(&Rational::from_integer(n.into())).unwrap();
        assert!((at(4) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(at(3).norm() < 1e-15);
        assert!(s.eval(&Rational::new(1.into(), 2.into())).is_err());
    }
}
