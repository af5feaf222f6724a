use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::primes::{prime_factors, Prime};
use super::rational::{frac_mod1, Rational};
use crate::error::{Error, Result};

/// p-adic valuation; `Infinite` exactly for the input 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("+inf"),
        }
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `p^k` as an exact rational; `k` may be negative.
pub fn prime_pow(p: Prime, k: i64) -> Rational {
    let base = BigInt::from(p.get()).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

pub fn padic_valuation(x: &Rational, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    let pb = BigInt::from(p.get());
    Valuation::Finite(int_valuation(x.numer(), &pb) - int_valuation(x.denom(), &pb))
}

/// `|x|_p = p^{-v}` with `|0|_p = 0`.
pub fn padic_abs(x: &Rational, p: Prime) -> Rational {
    match padic_valuation(x, p) {
        Valuation::Infinite => Rational::zero(),
        Valuation::Finite(v) => prime_pow(p, -v),
    }
}

/// Whether `x` lies in `Z_p`, i.e. `p` does not divide the reduced denominator.
pub fn in_zp(x: &Rational, p: Prime) -> bool {
    !(x.denom() % BigInt::from(p.get())).is_zero()
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(m)
}

/// The p-adic fractional part `{x}_p`: the unique `r` in `[0, 1)` with
/// p-power denominator such that `x - r` lies in `Z_p`.
///
/// Closed form: writing the denominator as `m * p^k` with `p` not dividing `m`,
/// `{x}_p = (a * m^{-1} mod p^k) / p^k`.
pub fn padic_fractional_part(x: &Rational, p: Prime) -> Rational {
    let pb = BigInt::from(p.get());
    let den = x.denom();
    let k = int_valuation(den, &pb);
    if k == 0 {
        return Rational::zero();
    }
    let pk = pb.pow(k as u32);
    let m = den / &pk;
    let inv = mod_inverse(&(&m % &pk), &pk);
    let num = (x.numer() * inv).mod_floor(&pk);
    Rational::new(num, pk)
}

/// `x - sum_{p | den x} {x}_p`, which is always an integer.
pub fn product_formula_defect(x: &Rational) -> Result<BigInt> {
    let mut rest = x.clone();
    for p in prime_factors(x.denom())? {
        rest -= padic_fractional_part(x, p);
    }
    if !rest.is_integer() {
        return Err(Error::Internal(format!(
            "product formula defect of {x} is not integral: {rest}"
        )));
    }
    Ok(rest.to_integer())
}

/// Solves `q = x_p (mod Z_p)` for every listed prime and `q in Z_p` for all
/// other primes, returning the unique solution in `[0, 1)`.
pub fn crt_congruence_solve(targets: &BTreeMap<Prime, Rational>) -> Rational {
    let mut q = Rational::zero();
    for (&p, x) in targets {
        q += padic_fractional_part(x, p);
    }
    frac_mod1(&q)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    pub(crate) fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    /// Digit-by-digit p-adic expansion: collects the digits at negative
    /// positions, one modular reduction per digit.
    pub(crate) fn fractional_part_by_digits(x: &Rational, pr: Prime) -> Rational {
        let pb = BigInt::from(pr.get());
        let mut acc = Rational::zero();
        let mut y = x.clone();
        loop {
            let v = match padic_valuation(&y, pr) {
                Valuation::Infinite => break,
                Valuation::Finite(v) if v >= 0 => break,
                Valuation::Finite(v) => v,
            };
            // unit part u = y / p^v; lowest digit = u mod p
            let u = &y * prime_pow(pr, -v);
            let num = u.numer().mod_floor(&pb);
            let den = u.denom().mod_floor(&pb);
            let digit = (num * mod_inverse(&den, &pb)).mod_floor(&pb);
            let term = Rational::from_integer(digit) * prime_pow(pr, v);
            acc += &term;
            y -= term;
        }
        acc
    }

    #[test]
    fn valuation_and_abs_examples() {
        assert_eq!(padic_valuation(&r(12, 1), p(2)), Valuation::Finite(2));
        assert_eq!(padic_abs(&r(12, 1), p(2)), r(1, 4));
        assert_eq!(padic_valuation(&r(3, 4), p(2)), Valuation::Finite(-2));
        assert_eq!(padic_abs(&r(3, 4), p(2)), r(4, 1));
        for q in [2u64, 3, 5] {
            assert_eq!(padic_valuation(&r(0, 1), p(q)), Valuation::Infinite);
            assert_eq!(padic_abs(&r(0, 1), p(q)), r(0, 1));
        }
    }

    #[test]
    fn fractional_part_examples() {
        assert_eq!(padic_fractional_part(&r(3, 1), p(2)), r(0, 1));
        assert_eq!(padic_fractional_part(&r(7, 4), p(2)), r(3, 4));
        assert_eq!(padic_fractional_part(&r(5, 6), p(3)), r(1, 3));
        assert_eq!(padic_fractional_part(&r(-1, 2), p(2)), r(1, 2));
        // the digit oracle agrees on the same inputs
        for (x, q) in [(r(7, 4), 2), (r(5, 6), 3), (r(-1, 2), 2), (r(-355, 1125), 5)] {
            assert_eq!(padic_fractional_part(&x, p(q)), fractional_part_by_digits(&x, p(q)));
        }
    }

    #[test]
    fn product_formula_examples() {
        assert_eq!(product_formula_defect(&r(3, 1)).unwrap(), BigInt::from(3));
        assert_eq!(product_formula_defect(&r(5, 6)).unwrap(), BigInt::from(0));
        assert_eq!(product_formula_defect(&r(7, 4)).unwrap(), BigInt::from(1));
    }

    #[test]
    fn crt_examples() {
        let mut m = BTreeMap::new();
        assert_eq!(crt_congruence_solve(&m), r(0, 1));
        m.insert(p(2), r(1, 2));
        assert_eq!(crt_congruence_solve(&m), r(1, 2));
        m.insert(p(3), r(1, 3));
        let q = crt_congruence_solve(&m);
        assert_eq!(q, r(5, 6));
        assert!(in_zp(&(&q - r(1, 2)), p(2)));
        assert!(in_zp(&(&q - r(1, 3)), p(3)));
    }
}
