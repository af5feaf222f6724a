use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number; always stored in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Parses `"a/b"`, `"a"` or a short decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse rational from {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let mag = int_part.abs() * &scale + frac_part;
        let num = if neg { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

/// `"num/den"`, the serialized form used in every report.
pub fn fmt_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Representative of `x` modulo 1 in `[0, 1)`.
pub fn frac_mod1(x: &Rational) -> Rational {
    let fl = x.numer().div_floor(x.denom());
    x - Rational::from_integer(fl)
}

/// The exact binary value of a finite double.
pub fn rational_from_f64_exact(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Best rational approximation with denominator at most `max_den`, returned
/// only if it lies within `tol` of `x` (continued-fraction convergents).
pub fn approximate_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let target = x.abs();
    let mut y = target;
    // h_{-2}/k_{-2} = 0/1, h_{-1}/k_{-1} = 1/0
    let (mut hm2, mut hm1) = (0i128, 1i128);
    let (mut km2, mut km1) = (1i128, 0i128);
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let hn = a * hm1 + hm2;
        let kn = a * km1 + km2;
        if kn as u128 > max_den as u128 {
            break;
        }
        best = Some((hn, kn));
        if (hn as f64 / kn as f64 - target).abs() <= tol {
            break;
        }
        (hm2, hm1) = (hm1, hn);
        (km2, km1) = (km1, kn);
        let frac = y - y.floor();
        if frac < 1e-300 {
            break;
        }
        y = 1.0 / frac;
    }
    let (hn, kn) = best?;
    if (hn as f64 / kn as f64 - target).abs() > tol {
        return None;
    }
    let r = Rational::new(BigInt::from(hn), BigInt::from(kn));
    Some(if x < 0.0 { -r } else { r })
}

/// A real coordinate that is exact when it can be, and a double otherwise.
///
/// Lattice parameters given as doubles are promoted to `Exact` when they sit
/// within `1e-12` of a fraction with small denominator.
#[derive(Clone, Debug, PartialEq)]
pub enum RealCoord {
    Exact(Rational),
    Approx(f64),
}

impl RealCoord {
    pub const PROMOTION_TOL: f64 = 1e-12;
    pub const PROMOTION_MAX_DEN: u64 = 10_000;

    pub fn promote(x: f64) -> RealCoord {
        match approximate_rational(x, Self::PROMOTION_MAX_DEN, Self::PROMOTION_TOL) {
            Some(r) if (r.to_f64().unwrap_or(f64::NAN) - x).abs() <= Self::PROMOTION_TOL => {
                RealCoord::Exact(r)
            }
            _ => RealCoord::Approx(x),
        }
    }

    pub fn zero() -> RealCoord {
        RealCoord::Exact(Rational::zero())
    }

    pub fn one() -> RealCoord {
        RealCoord::Exact(Rational::one())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealCoord::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            RealCoord::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RealCoord::Exact(_))
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            RealCoord::Exact(r) => Some(r),
            RealCoord::Approx(_) => None,
        }
    }

    pub fn mul(&self, other: &RealCoord) -> RealCoord {
        match (self, other) {
            (RealCoord::Exact(a), RealCoord::Exact(b)) => RealCoord::Exact(a * b),
            _ => RealCoord::Approx(self.to_f64() * other.to_f64()),
        }
    }

    pub fn mul_rational(&self, q: &Rational) -> RealCoord {
        match self {
            RealCoord::Exact(a) => RealCoord::Exact(a * q),
            RealCoord::Approx(x) => RealCoord::Approx(x * q.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn add(&self, other: &RealCoord) -> RealCoord {
        match (self, other) {
            (RealCoord::Exact(a), RealCoord::Exact(b)) => RealCoord::Exact(a + b),
            _ => RealCoord::Approx(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &RealCoord) -> RealCoord {
        match (self, other) {
            (RealCoord::Exact(a), RealCoord::Exact(b)) => RealCoord::Exact(a - b),
            _ => RealCoord::Approx(self.to_f64() - other.to_f64()),
        }
    }

    pub fn recip(&self) -> Result<RealCoord> {
        match self {
            RealCoord::Exact(a) if a.is_zero() => {
                Err(Error::InvalidArgument("reciprocal of zero".into()))
            }
            RealCoord::Exact(a) => Ok(RealCoord::Exact(a.recip())),
            RealCoord::Approx(x) if *x == 0.0 => {
                Err(Error::InvalidArgument("reciprocal of zero".into()))
            }
            RealCoord::Approx(x) => Ok(RealCoord::Approx(1.0 / x)),
        }
    }

    pub fn abs(&self) -> RealCoord {
        match self {
            RealCoord::Exact(a) => RealCoord::Exact(a.abs()),
            RealCoord::Approx(x) => RealCoord::Approx(x.abs()),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            RealCoord::Exact(a) => a.is_positive(),
            RealCoord::Approx(x) => *x > 0.0,
        }
    }
}

impl fmt::Display for RealCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealCoord::Exact(r) => write!(f, "{}", fmt_rational(r)),
            RealCoord::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for RealCoord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RealCoord::Exact(r) => s.serialize_str(&fmt_rational(r)),
            RealCoord::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for RealCoord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => parse_rational(&s)
                .map(RealCoord::Exact)
                .map_err(serde::de::Error::custom),
            Raw::F(x) => Ok(RealCoord::Approx(x)),
        }
    }
}
