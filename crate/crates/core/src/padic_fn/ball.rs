use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{fmt_rational, padic_fractional_part, padic_valuation, prime_pow, Prime, Rational, Valuation};

/// The ball `center + p^level Z_p`, with the center in canonical form
/// `p^level * {x / p^level}_p` so that equal balls compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicBall {
    p: Prime,
    center: Rational,
    level: i64,
}

impl PAdicBall {
    pub fn new(p: Prime, center: &Rational, level: i64) -> Self {
        let scale = prime_pow(p, level);
        let center = padic_fractional_part(&(center / &scale), p) * scale;
        PAdicBall { p, center, level }
    }

    /// `Z_p` itself.
    pub fn unit(p: Prime) -> Self {
        PAdicBall {
            p,
            center: Rational::from_integer(BigInt::from(0)),
            level: 0,
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn center(&self) -> &Rational {
        &self.center
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    /// Haar measure `p^{-level}`, normalized so that `Z_p` has measure 1.
    pub fn measure(&self) -> Rational {
        prime_pow(self.p, -self.level)
    }

    pub fn contains(&self, t: &Rational) -> bool {
        match padic_valuation(&(t - &self.center), self.p) {
            Valuation::Infinite => true,
            Valuation::Finite(v) => v >= self.level,
        }
    }

    pub fn contains_ball(&self, other: &PAdicBall) -> bool {
        other.level >= self.level && self.contains(&other.center)
    }

    /// The intersection, which for p-adic balls is empty or the smaller ball.
    pub fn intersect(&self, other: &PAdicBall) -> Option<PAdicBall> {
        if self.contains_ball(other) {
            Some(other.clone())
        } else if other.contains_ball(self) {
            Some(self.clone())
        } else {
            None
        }
    }

    /// The `p` balls of the next level that partition this one.
    pub fn children(&self) -> Vec<PAdicBall> {
        let step = prime_pow(self.p, self.level);
        (0..self.p.get())
            .map(|j| PAdicBall::new(self.p, &(&self.center + &step * Rational::from_integer(j.into())), self.level + 1))
            .collect()
    }

    pub fn translate(&self, x: &Rational) -> PAdicBall {
        PAdicBall::new(self.p, &(&self.center + x), self.level)
    }
}

impl Ord for PAdicBall {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p, self.level, &self.center).cmp(&(other.p, other.level, &other.center))
    }
}

impl PartialOrd for PAdicBall {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PAdicBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}^{} Z_{}", fmt_rational(&self.center), self.p, self.level, self.p)
    }
}

impl Serialize for PAdicBall {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PAdicBall", 2)?;
        st.serialize_field("center", &fmt_rational(&self.center))?;
        st.serialize_field("level", &self.level)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn centers_are_canonical() {
        assert_eq!(PAdicBall::new(p(2), &q("5"), 2).center(), &q("1"));
        assert_eq!(PAdicBall::new(p(2), &q("-1"), 2).center(), &q("3"));
        assert_eq!(PAdicBall::new(p(3), &q("1/2"), 1).center(), &q("2"));
        assert_eq!(PAdicBall::new(p(2), &q("7/4"), -1).center(), &q("1/4"));
        assert_eq!(PAdicBall::new(p(2), &q("7/4"), -1), PAdicBall::new(p(2), &q("-9/4"), -1));
    }

    #[test]
    fn containment_and_children() {
        let z2 = PAdicBall::unit(p(2));
        assert!(z2.contains(&q("1/3")));
        assert!(!z2.contains(&q("1/2")));
        let kids = z2.children();
        assert_eq!(kids.len(), 2);
        assert!(kids.iter().all(|b| z2.contains_ball(b) && b.measure() == q("1/2")));
        assert!(kids[0].intersect(&kids[1]).is_none());
        assert_eq!(z2.intersect(&kids[1]), Some(kids[1].clone()));
    }
}
