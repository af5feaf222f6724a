use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::padic::{in_zp, padic_fractional_part, padic_valuation, Valuation};
use super::phase::Phase;
use super::primes::Prime;
use super::rational::{fmt_rational, Rational};
use crate::error::{Error, Result};

/// An element `k / p^n mod 1` of the Pruefer group, i.e. the root of unity
/// `e^{2 pi i k / p^n}`, stored in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrueferElement {
    p: Prime,
    k: u64,
    n: u32,
}

impl PrueferElement {
    /// Reduces `k / p^n` to lowest terms modulo 1.
    pub fn new(p: Prime, k: u64, n: u32) -> Result<Self> {
        let pv = p.get();
        let order = pv
            .checked_pow(n)
            .ok_or_else(|| Error::Unsupported(format!("{p}^{n} exceeds 64 bits")))?;
        let (mut k, mut n) = (k % order, n);
        if k == 0 {
            n = 0;
        }
        while n > 0 && k % pv == 0 {
            k /= pv;
            n -= 1;
        }
        Ok(PrueferElement { p, k, n })
    }

    pub fn zero(p: Prime) -> Self {
        PrueferElement { p, k: 0, n: 0 }
    }

    /// The element represented by a rational with p-power denominator.
    pub fn from_rational(p: Prime, x: &Rational) -> Result<Self> {
        let f = padic_fractional_part(x, p);
        if x.denom() != f.denom() && !(x - &f).is_integer() {
            return Err(Error::InvalidArgument(format!(
                "{} has a denominator that is not a power of {p}",
                fmt_rational(x)
            )));
        }
        let n = match padic_valuation(&f, p) {
            Valuation::Infinite => 0,
            Valuation::Finite(v) => (-v) as u32,
        };
        let k = f
            .numer()
            .to_u64()
            .ok_or_else(|| Error::Unsupported("Pruefer numerator exceeds 64 bits".into()))?;
        Self::new(p, k, n)
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn numerator(&self) -> u64 {
        self.k
    }

    pub fn exponent(&self) -> u32 {
        self.n
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(
            BigInt::from(self.k),
            BigInt::from(self.p.get()).pow(self.n),
        )
    }
}

impl fmt::Display for PrueferElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.k, self.p, self.n)
    }
}

impl Serialize for PrueferElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PrueferElement", 3)?;
        st.serialize_field("exponent", &self.n)?;
        st.serialize_field("numerator", &self.k)?;
        st.serialize_field("prime", &self.p)?;
        st.end()
    }
}

/// The character `x -> e^{2 pi i {x z}_p}` of `Z_p` attached to `z`.
pub fn pruefer_char_eval(z: &PrueferElement, x: &Rational) -> Result<Phase> {
    if !in_zp(x, z.p) {
        return Err(Error::Precondition(format!(
            "{} is not a {}-adic integer",
            fmt_rational(x),
            z.p
        )));
    }
    if z.k == 0 || x.is_zero() {
        return Ok(Phase::one());
    }
    Ok(Phase::from_turns(padic_fractional_part(
        &(x * z.to_rational()),
        z.p,
    )))
}
