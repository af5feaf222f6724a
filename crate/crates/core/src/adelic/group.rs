use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{
    crt_congruence_solve, fmt_rational, in_zp, padic_fractional_part, prime_factors, Phase, Prime,
    Rational, RealCoord,
};
use crate::error::{Error, Result};
use crate::padic_fn::PAdicBall;

/// Which locally compact group the time-frequency plane is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupSelector {
    Real,
    RealXQp(Prime),
    Adele,
}

impl GroupSelector {
    /// Parses `real`, `adele`, `rxqp` (with `prime`) or `rxqp:P`.
    pub fn parse(s: &str, prime: Option<u64>) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "real" | "r" => Ok(GroupSelector::Real),
            "adele" | "adeles" | "a" => Ok(GroupSelector::Adele),
            "rxqp" => {
                let p = prime.ok_or_else(|| Error::InvalidArgument("group rxqp needs a prime".into()))?;
                Ok(GroupSelector::RealXQp(Prime::new(p)?))
            }
            other => match other.strip_prefix("rxqp:") {
                Some(p) => {
                    let p = u64::from_str(p).map_err(|_| Error::InvalidArgument(format!("bad prime in {other:?}")))?;
                    Ok(GroupSelector::RealXQp(Prime::new(p)?))
                }
                None => Err(Error::InvalidArgument(format!("unknown group {other:?}"))),
            },
        }
    }

    pub fn has_finite_part(&self) -> bool {
        !matches!(self, GroupSelector::Real)
    }
}

impl fmt::Display for GroupSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSelector::Real => write!(f, "real"),
            GroupSelector::RealXQp(p) => write!(f, "rxqp:{p}"),
            GroupSelector::Adele => write!(f, "adele"),
        }
    }
}

impl Serialize for GroupSelector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A point `(x_inf, (x_p)_p)`.
///
/// Listed primes carry their coordinate explicitly. Every other prime carries
/// `default`, which lies in `Z_p` there: the primes dividing the denominator of
/// `default` are always listed. Diagonal points `phi_alpha(q)` use
/// `default = q`; a point with only finitely many nonzero coordinates uses 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AdelicPoint {
    pub real: RealCoord,
    finite: BTreeMap<Prime, Rational>,
    default: Rational,
}

impl AdelicPoint {
    pub fn zero() -> Self {
        AdelicPoint {
            real: RealCoord::zero(),
            finite: BTreeMap::new(),
            default: Rational::zero(),
        }
    }

    /// A point whose unlisted coordinates are 0.
    pub fn new(real: RealCoord, finite: BTreeMap<Prime, Rational>) -> Self {
        AdelicPoint {
            real,
            finite,
            default: Rational::zero(),
        }
    }

    pub fn with_default(real: RealCoord, finite: BTreeMap<Prime, Rational>, default: Rational) -> Result<Self> {
        let mut pt = AdelicPoint { real, finite, default };
        pt.list_default_primes()?;
        Ok(pt)
    }

    fn list_default_primes(&mut self) -> Result<()> {
        if self.default.is_integer() {
            return Ok(());
        }
        for p in prime_factors(self.default.denom())? {
            self.finite.entry(p).or_insert_with(|| self.default.clone());
        }
        Ok(())
    }

    pub fn finite(&self) -> &BTreeMap<Prime, Rational> {
        &self.finite
    }

    pub fn default_coordinate(&self) -> &Rational {
        &self.default
    }

    /// The coordinate at `p`.
    pub fn coord(&self, p: Prime) -> &Rational {
        self.finite.get(&p).unwrap_or(&self.default)
    }

    pub fn listed_primes(&self) -> BTreeSet<Prime> {
        self.finite.keys().copied().collect()
    }

    /// Whether every finite coordinate lies in `Z_p`.
    pub fn finite_part_integral(&self) -> bool {
        self.finite.iter().all(|(&p, x)| in_zp(x, p))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b, RealCoord::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b, RealCoord::sub)
    }

    pub fn neg(&self) -> Self {
        AdelicPoint::zero().sub(self)
    }

    fn combine(
        &self,
        other: &Self,
        op: impl Fn(&Rational, &Rational) -> Rational,
        real_op: impl Fn(&RealCoord, &RealCoord) -> RealCoord,
    ) -> Self {
        let primes: BTreeSet<Prime> = self.finite.keys().chain(other.finite.keys()).copied().collect();
        let finite = primes
            .into_iter()
            .map(|p| (p, op(self.coord(p), other.coord(p))))
            .collect();
        // a prime dividing den(op(d1, d2)) divides den(d1) or den(d2), so it is listed already
        AdelicPoint {
            real: real_op(&self.real, &other.real),
            finite,
            default: op(&self.default, &other.default),
        }
    }

    /// Equality of the finite parts as points of the restricted product.
    pub fn finite_eq(&self, other: &Self) -> bool {
        self.default == other.default && {
            let primes: BTreeSet<Prime> = self.finite.keys().chain(other.finite.keys()).copied().collect();
            primes.into_iter().all(|p| self.coord(p) == other.coord(p))
        }
    }
}

impl fmt::Display for AdelicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {{", self.real)?;
        for (i, (p, x)) in self.finite.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}: {}", fmt_rational(x))?;
        }
        write!(f, "}}")?;
        if !self.default.is_zero() {
            write!(f, " elsewhere {}", fmt_rational(&self.default))?;
        }
        write!(f, ")")
    }
}

impl Serialize for AdelicPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let finite: BTreeMap<String, String> =
            self.finite.iter().map(|(p, x)| (p.to_string(), fmt_rational(x))).collect();
        let mut st = s.serialize_struct("AdelicPoint", 3)?;
        st.serialize_field("default", &fmt_rational(&self.default))?;
        st.serialize_field("finite", &finite)?;
        st.serialize_field("real", &self.real)?;
        st.end()
    }
}

/// `phi_alpha(q) = (alpha q, (q)_p)` on the adeles, `psi_alpha(q) = (alpha q, q)`
/// on `R x Q_p` (requires `q` in `Z[1/p]`), `alpha q` on `R` (requires `q` in `Z`).
pub fn lattice_embed(group: GroupSelector, alpha: &RealCoord, q: &Rational) -> Result<AdelicPoint> {
    let real = alpha.mul_rational(q);
    match group {
        GroupSelector::Real => {
            if !q.is_integer() {
                return Err(Error::InvalidArgument(format!(
                    "lattice index {} is not an integer",
                    fmt_rational(q)
                )));
            }
            Ok(AdelicPoint::new(real, BTreeMap::new()))
        }
        GroupSelector::RealXQp(p) => {
            if !is_p_power(q.denom(), p) {
                return Err(Error::InvalidArgument(format!(
                    "{} is not in Z[1/{p}]",
                    fmt_rational(q)
                )));
            }
            Ok(AdelicPoint::new(real, BTreeMap::from([(p, q.clone())])))
        }
        GroupSelector::Adele => AdelicPoint::with_default(real, BTreeMap::new(), q.clone()),
    }
}

pub(crate) fn is_p_power(n: &num_bigint::BigInt, p: Prime) -> bool {
    let pb = num_bigint::BigInt::from(p.get());
    let mut n = n.clone();
    while n.is_multiple_of(&pb) && !n.is_zero() {
        n /= &pb;
    }
    n == num_bigint::BigInt::from(1)
}

fn primes_in_play(group: GroupSelector, x: &AdelicPoint, y: &AdelicPoint) -> Vec<Prime> {
    match group {
        GroupSelector::Real => Vec::new(),
        GroupSelector::RealXQp(p) => vec![p],
        GroupSelector::Adele => {
            let s: BTreeSet<Prime> = x.finite.keys().chain(y.finite.keys()).copied().collect();
            s.into_iter().collect()
        }
    }
}

/// `omega_y(x) = e^{2 pi i x_inf y_inf} prod_p e^{-2 pi i {x_p y_p}_p}`.
///
/// The p-parts are exact turns. The real part is exact when both real
/// coordinates are exact and carried in radians otherwise.
pub fn character_pair(x: &AdelicPoint, y: &AdelicPoint, group: GroupSelector) -> Phase {
    let mut turns = Rational::zero();
    for p in primes_in_play(group, x, y) {
        turns -= padic_fractional_part(&(x.coord(p) * y.coord(p)), p);
    }
    match (&x.real, &y.real) {
        (RealCoord::Exact(a), RealCoord::Exact(b)) => Phase::from_turns(turns + a * b),
        _ => {
            let t = x.real.to_f64() * y.real.to_f64();
            Phase::new(turns, std::f64::consts::TAU * (t - t.floor()))
        }
    }
}

/// Splits `x = b + phi_alpha(q)` with `b` in `[0, |alpha|) x prod Z_p`.
pub fn fundamental_domain_reduce(x: &AdelicPoint, alpha: &RealCoord, group: GroupSelector) -> Result<(AdelicPoint, Rational)> {
    if alpha.to_f64() == 0.0 {
        return Err(Error::InvalidArgument("alpha must be nonzero".into()));
    }
    let q0 = match group {
        GroupSelector::Real => Rational::zero(),
        GroupSelector::RealXQp(p) => padic_fractional_part(x.coord(p), p),
        GroupSelector::Adele => crt_congruence_solve(&x.finite),
    };
    let y = x.real.sub(&alpha.mul_rational(&q0));
    let n = match (&y, alpha) {
        (RealCoord::Exact(y), RealCoord::Exact(a)) => (y / a).floor(),
        _ => {
            let v = (y.to_f64() / alpha.to_f64()).floor();
            Rational::from_integer(
                num_bigint::BigInt::from(v.to_i64().ok_or_else(|| Error::InvalidArgument("point too far out".into()))?),
            )
        }
    };
    let q = q0 + n;
    let b = x.sub(&lattice_embed(group, alpha, &q)?);
    Ok((b, q))
}

/// Haar measure of `[0, |alpha|) x prod_p Z_p`, computed factor by factor.
pub fn fundamental_domain_measure(alpha: &RealCoord, primes: &[Prime]) -> RealCoord {
    primes
        .iter()
        .fold(alpha.abs(), |acc, &p| acc.mul_rational(&PAdicBall::unit(p).measure()))
}

/// `[0, |alpha|)` membership of the real part plus integrality of the finite part.
pub fn in_fundamental_domain(b: &AdelicPoint, alpha: &RealCoord) -> bool {
    let a = alpha.abs();
    let lo_ok = match &b.real {
        RealCoord::Exact(r) => !r.is_negative(),
        RealCoord::Approx(v) => *v >= -1e-12,
    };
    lo_ok && b.real.to_f64() < a.to_f64() + 1e-12 && b.finite_part_integral()
}
