use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::rational::{fmt_rational, frac_mod1, Rational};

/// A unimodular number `e^{2 pi i turns} * e^{i radians}`.
///
/// `turns` is exact and kept in `[0, 1)`; `radians` carries whatever part of
/// the phase is only known numerically. p-adic characters always have
/// `radians == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase {
    turns: Rational,
    radians: f64,
}

impl Phase {
    pub fn one() -> Phase {
        Phase {
            turns: Rational::zero(),
            radians: 0.0,
        }
    }

    pub fn from_turns(turns: Rational) -> Phase {
        Phase {
            turns: frac_mod1(&turns),
            radians: 0.0,
        }
    }

    pub fn from_radians(radians: f64) -> Phase {
        Phase {
            turns: Rational::zero(),
            radians,
        }
    }

    pub fn new(turns: Rational, radians: f64) -> Phase {
        Phase {
            turns: frac_mod1(&turns),
            radians,
        }
    }

    pub fn turns(&self) -> &Rational {
        &self.turns
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }

    pub fn is_exact(&self) -> bool {
        self.radians == 0.0
    }

    /// Exactly 1: zero turns and no inexact part.
    pub fn is_exactly_one(&self) -> bool {
        self.turns.is_zero() && self.radians == 0.0
    }

    pub fn mul(&self, other: &Phase) -> Phase {
        Phase::new(&self.turns + &other.turns, self.radians + other.radians)
    }

    pub fn conj(&self) -> Phase {
        Phase::new(-&self.turns, -self.radians)
    }

    pub fn to_complex(&self) -> Complex64 {
        let t = self.turns.to_f64().unwrap_or(0.0);
        Complex64::from_polar(1.0, TAU * t + self.radians)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp(2pi i {}) exp(i {})", fmt_rational(&self.turns), self.radians)
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Phase", 2)?;
        st.serialize_field("turns", &fmt_rational(&self.turns))?;
        st.serialize_field("radians", &self.radians)?;
        st.end()
    }
}
