use std::collections::BTreeMap;

use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::ball::PAdicBall;
use crate::arith::{
    fmt_rational, padic_fractional_part, padic_valuation, prime_pow, CyclotomicNumber, Prime,
    Rational, Valuation,
};
use crate::error::{Error, Result};

/// `e^{2 pi i {x}_p}` as an exact cyclotomic number.
pub(crate) fn char_value(p: Prime, x: &Rational) -> CyclotomicNumber {
    CyclotomicNumber::root_of_unity(p, &padic_fractional_part(x, p))
        .expect("p-adic fractional parts have p-power denominators")
}

/// One summand `coeff * e^{-2 pi i {freq t}_p} * 1_ball(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAdicTerm {
    pub coeff: CyclotomicNumber,
    pub freq: Rational,
    pub ball: PAdicBall,
}

impl Serialize for PAdicTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PAdicTerm", 3)?;
        st.serialize_field("ball", &self.ball)?;
        st.serialize_field("coeff", &self.coeff)?;
        st.serialize_field("freq", &fmt_rational(&self.freq))?;
        st.end()
    }
}

/// A locally constant compactly supported function on `Q_p`, kept in a
/// canonical form: disjoint balls, frequencies reduced to the resolution of
/// their ball, one term per (ball, frequency), no zero terms.
#[derive(Clone, Debug)]
pub struct PAdicTestFunction {
    p: Prime,
    terms: Vec<PAdicTerm>,
}

impl PAdicTestFunction {
    pub fn zero(p: Prime) -> Self {
        PAdicTestFunction { p, terms: Vec::new() }
    }

    /// `1_{Z_p}`.
    pub fn unit_indicator(p: Prime) -> Self {
        Self::indicator(PAdicBall::unit(p))
    }

    pub fn indicator(ball: PAdicBall) -> Self {
        let p = ball.prime();
        PAdicTestFunction {
            p,
            terms: vec![PAdicTerm {
                coeff: CyclotomicNumber::one(p),
                freq: Rational::zero(),
                ball,
            }],
        }
    }

    pub fn from_terms(p: Prime, terms: Vec<PAdicTerm>) -> Result<Self> {
        for t in &terms {
            if t.ball.prime() != p || t.coeff.prime() != p {
                return Err(Error::InvalidArgument(format!(
                    "term over a different prime in a {p}-adic test function"
                )));
            }
        }
        Ok(PAdicTestFunction { p, terms }.canonical())
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn terms(&self) -> &[PAdicTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_unit_indicator(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0].ball == PAdicBall::unit(self.p)
            && self.terms[0].freq.is_zero()
            && self.terms[0].coeff.is_one()
    }

    pub fn eval(&self, t: &Rational) -> CyclotomicNumber {
        let mut acc = CyclotomicNumber::zero(self.p);
        for term in &self.terms {
            if term.ball.contains(t) {
                let phase = char_value(self.p, &-(&term.freq * t));
                acc = acc.add(&term.coeff.mul(&phase));
            }
        }
        acc
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PAdicTerm {
                coeff: t.coeff.mul(c),
                ..t.clone()
            })
            .collect();
        PAdicTestFunction { p: self.p, terms }.canonical()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PAdicTestFunction { p: self.p, terms }.canonical())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&CyclotomicNumber::from_rational(self.p, Rational::from_integer((-1).into()))))
    }

    /// Exact pointwise equality.
    pub fn equals(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::InvalidArgument(format!(
                "test functions over different primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }

    fn canonical(self) -> Self {
        let p = self.p;
        let mut pending = self.terms;
        let mut done: Vec<PAdicTerm> = Vec::new();
        // Split any ball strictly containing another term's ball until all
        // balls in play are equal or disjoint.
        while let Some(term) = pending.pop() {
            let strictly_contains = pending
                .iter()
                .chain(done.iter())
                .any(|o| o.ball != term.ball && term.ball.contains_ball(&o.ball));
            if strictly_contains {
                for child in term.ball.children() {
                    pending.push(PAdicTerm {
                        ball: child,
                        ..term.clone()
                    });
                }
            } else {
                done.push(term);
            }
        }
        let mut merged: BTreeMap<(PAdicBall, Rational), CyclotomicNumber> = BTreeMap::new();
        for term in done {
            let (freq, phase) = reduce_frequency(p, &term.freq, &term.ball);
            let coeff = term.coeff.mul(&phase);
            let slot = merged
                .entry((term.ball, freq))
                .or_insert_with(|| CyclotomicNumber::zero(p));
            *slot = slot.add(&coeff);
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((ball, freq), coeff)| PAdicTerm { coeff, freq, ball })
            .collect();
        PAdicTestFunction { p, terms }
    }
}

/// On `a + p^k Z_p`, `e^{-2 pi i {r t}_p}` equals `phase * e^{-2 pi i {r' t}_p}`
/// with `r' = p^{-k} {p^k r}_p`. Returns `(r', phase)`.
fn reduce_frequency(p: Prime, r: &Rational, ball: &PAdicBall) -> (Rational, CyclotomicNumber) {
    let k = ball.level();
    let reduced = padic_fractional_part(&(r * prime_pow(p, k)), p) * prime_pow(p, -k);
    let rest = r - &reduced;
    (reduced, char_value(p, &-(rest * ball.center())))
}

impl PartialEq for PAdicTestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other).unwrap_or(false)
    }
}

impl Serialize for PAdicTestFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PAdicTestFunction", 2)?;
        st.serialize_field("prime", &self.p)?;
        st.serialize_field("terms", &self.terms)?;
        st.end()
    }
}

/// `int_ball e^{2 pi i {r t}_p} dt`, exactly: `p^{-k} e^{2 pi i {r a}_p}` when
/// `|r|_p <= p^k` and zero otherwise.
pub fn char_ball_integral(r: &Rational, ball: &PAdicBall) -> CyclotomicNumber {
    let p = ball.prime();
    let visible = match padic_valuation(r, p) {
        Valuation::Infinite => true,
        Valuation::Finite(v) => v >= -ball.level(),
    };
    if !visible {
        return CyclotomicNumber::zero(p);
    }
    char_value(p, &(r * ball.center())).scale(&ball.measure())
}

/// `E_r T_x f`, i.e. `t -> e^{-2 pi i {r t}_p} f(t - x)`.
pub fn tf_shift_padic(f: &PAdicTestFunction, x: &Rational, r: &Rational) -> PAdicTestFunction {
    let p = f.p;
    let terms = f
        .terms
        .iter()
        .map(|t| PAdicTerm {
            coeff: t.coeff.mul(&char_value(p, &(&t.freq * x))),
            freq: r + &t.freq,
            ball: t.ball.translate(x),
        })
        .collect();
    PAdicTestFunction { p, terms }.canonical()
}

/// `<f, g> = int f conj(g)`, exactly.
pub fn inner_product_padic(f: &PAdicTestFunction, g: &PAdicTestFunction) -> Result<CyclotomicNumber> {
    f.check_prime(g)?;
    let mut acc = CyclotomicNumber::zero(f.p);
    for a in &f.terms {
        for b in &g.terms {
            if let Some(ball) = a.ball.intersect(&b.ball) {
                let integral = char_ball_integral(&(&b.freq - &a.freq), &ball);
                if !integral.is_zero() {
                    acc = acc.add(&a.coeff.mul(&b.coeff.conj()).mul(&integral));
                }
            }
        }
    }
    Ok(acc)
}
