use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use super::primes::Prime;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::rational::{fmt_rational, frac_mod1, Rational};
use crate::error::{Error, Result};

/// Exact element of `Q(zeta_{p^n})`, the field generated by p-power roots of unity.
///
/// Stored sparsely in the power basis `1, z, ..., z^{phi(p^n)-1}` with
/// `z = e^{2 pi i / p^n}`, and always normalized to the smallest `n` that
/// contains the value. Equal numbers therefore have equal representations,
/// which is what makes exact comparison of p-adic integrals possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicNumber {
    p: Prime,
    level: u32,
    coeffs: BTreeMap<u64, Rational>,
}

fn order(p: u64, level: u32) -> u64 {
    p.pow(level)
}

fn degree(p: u64, level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        (p - 1) * p.pow(level - 1)
    }
}

impl CyclotomicNumber {
    pub fn zero(p: Prime) -> Self {
        CyclotomicNumber {
            p,
            level: 0,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_rational(p: Prime, r: Rational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0, r);
        }
        CyclotomicNumber { p, level: 0, coeffs }
    }

    pub fn one(p: Prime) -> Self {
        Self::from_rational(p, Rational::one())
    }

    /// `e^{2 pi i t}` for a rational `t` whose reduced denominator is a power of `p`.
    pub fn root_of_unity(p: Prime, turns: &Rational) -> Result<Self> {
        let t = frac_mod1(turns);
        let mut den = t.denom().clone();
        let pb = BigInt::from(p.get());
        let mut level = 0u32;
        while !den.is_one() {
            if !(&den % &pb).is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "turns {t} do not have a {p}-power denominator"
                )));
            }
            den /= &pb;
            level += 1;
        }
        let k = t
            .numer()
            .to_u64()
            .ok_or_else(|| Error::Unsupported("root of unity order exceeds 64 bits".into()))?;
        let mut raw = BTreeMap::new();
        raw.insert(k, Rational::one());
        Ok(Self::from_exponents(p, level, raw))
    }

    /// `sum_j c_j z^j` with `z = e^{2 pi i / p^level}`; exponents are taken mod `p^level`.
    pub fn from_exponents(p: Prime, level: u32, raw: BTreeMap<u64, Rational>) -> Self {
        let pv = p.get();
        let n = order(pv, level);
        let phi = degree(pv, level);
        let mut acc: BTreeMap<u64, Rational> = BTreeMap::new();
        for (j, c) in raw {
            if c.is_zero() {
                continue;
            }
            *acc.entry(j % n).or_insert_with(Rational::zero) += c;
        }
        if level > 0 {
            let m = pv.pow(level - 1);
            let high: Vec<u64> = acc.range(phi..).map(|(j, _)| *j).collect();
            for j in high.into_iter().rev() {
                let c = acc.remove(&j).unwrap();
                // z^{(p-1)m} = -(1 + z^m + ... + z^{(p-2)m})
                for i in 0..(pv - 1) {
                    let t = j - (pv - 1) * m + i * m;
                    *acc.entry(t).or_insert_with(Rational::zero) -= &c;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        let mut out = CyclotomicNumber {
            p,
            level,
            coeffs: acc,
        };
        out.lower();
        out
    }

    fn lower(&mut self) {
        let pv = self.p.get();
        while self.level > 0 && self.coeffs.keys().all(|j| j % pv == 0) {
            self.coeffs = std::mem::take(&mut self.coeffs)
                .into_iter()
                .map(|(j, c)| (j / pv, c))
                .collect();
            self.level -= 1;
        }
        if self.coeffs.is_empty() {
            self.level = 0;
        }
    }

    fn lifted(&self, level: u32) -> BTreeMap<u64, Rational> {
        let f = self.p.get().pow(level - self.level);
        self.coeffs.iter().map(|(j, c)| (j * f, c.clone())).collect()
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "cyclotomic numbers over different primes");
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.level == 0 && self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// The rational value, if this number is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.level == 0 {
            Some(self.coeffs.get(&0).cloned().unwrap_or_else(Rational::zero))
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_prime(other);
        let level = self.level.max(other.level);
        let mut raw = self.lifted(level);
        for (j, c) in other.lifted(level) {
            *raw.entry(j).or_insert_with(Rational::zero) += c;
        }
        Self::from_exponents(self.p, level, raw)
    }

    pub fn neg(&self) -> Self {
        CyclotomicNumber {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs.iter().map(|(j, c)| (*j, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.p);
        }
        CyclotomicNumber {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs.iter().map(|(j, c)| (*j, c * r)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_prime(other);
        let level = self.level.max(other.level);
        let a = self.lifted(level);
        let b = other.lifted(level);
        let mut raw: BTreeMap<u64, Rational> = BTreeMap::new();
        for (i, x) in &a {
            for (j, y) in &b {
                *raw.entry(i + j).or_insert_with(Rational::zero) += x * y;
            }
        }
        Self::from_exponents(self.p, level, raw)
    }

    pub fn conj(&self) -> Self {
        let n = order(self.p.get(), self.level);
        let raw = self
            .coeffs
            .iter()
            .map(|(j, c)| ((n - j) % n, c.clone()))
            .collect();
        Self::from_exponents(self.p, self.level, raw)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = order(self.p.get(), self.level) as f64;
        self.coeffs
            .iter()
            .map(|(j, c)| {
                Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), TAU * (*j as f64) / n)
            })
            .sum()
    }
}

impl Serialize for CyclotomicNumber {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let basis: Vec<(u64, String)> = self
            .coeffs
            .iter()
            .map(|(j, c)| (*j, fmt_rational(c)))
            .collect();
        let z = self.to_complex();
        let mut st = s.serialize_struct("CyclotomicNumber", 4)?;
        st.serialize_field("order", &order(self.p.get(), self.level))?;
        st.serialize_field("power_basis", &basis)?;
        st.serialize_field("im", &z.im)?;
        st.serialize_field("re", &z.re)?;
        st.end()
    }
}
