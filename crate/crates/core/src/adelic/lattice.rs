use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::group::{lattice_embed, AdelicPoint, GroupSelector};
use super::window::SeparableWindow;
use crate::arith::{in_zp, CyclotomicNumber, Prime, Rational, RealCoord};
use crate::error::{Error, Result};
use crate::padic_fn::{inner_product_padic, tf_shift_padic};
use crate::real::{tf_inner_product_real, RectLattice};

/// Primes used for the adelic enumeration unless configured otherwise.
pub const DEFAULT_PRIMES: [u64; 4] = [2, 3, 5, 7];

/// `phi_alpha(Q) x phi_beta(Q)` on the adeles, `psi_alpha(Z[1/p]) x psi_beta(Z[1/p])`
/// on `R x Q_p`, or `alpha Z x beta Z` on `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdelicTFLattice {
    pub group: GroupSelector,
    pub alpha: RealCoord,
    pub beta: RealCoord,
    /// Primes whose denominators are enumerated on the adeles.
    pub primes: Vec<Prime>,
}

impl AdelicTFLattice {
    /// Doubles within `1e-12` of a small fraction become exact.
    pub fn new(group: GroupSelector, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_coords(group, RealCoord::promote(alpha), RealCoord::promote(beta))
    }

    pub fn from_coords(group: GroupSelector, alpha: RealCoord, beta: RealCoord) -> Result<Self> {
        if !(alpha.is_positive() && beta.is_positive() && alpha.to_f64().is_finite() && beta.to_f64().is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lattice parameters must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        let primes = match group {
            GroupSelector::Real => Vec::new(),
            GroupSelector::RealXQp(p) => vec![p],
            GroupSelector::Adele => DEFAULT_PRIMES.iter().map(|&p| Prime::new(p).expect("prime")).collect(),
        };
        Ok(AdelicTFLattice { group, alpha, beta, primes })
    }

    pub fn with_primes(mut self, primes: Vec<Prime>) -> Self {
        if self.group == GroupSelector::Adele {
            self.primes = primes;
        }
        self
    }

    /// `phi_{1/beta}(Q) x phi_{1/alpha}(Q)`: the roles of alpha and beta swap.
    pub fn adjoint(&self) -> Self {
        AdelicTFLattice {
            group: self.group,
            alpha: self.beta.recip().expect("beta is positive"),
            beta: self.alpha.recip().expect("alpha is positive"),
            primes: self.primes.clone(),
        }
    }

    /// Covolume `alpha * beta` of the lattice in the time-frequency plane.
    pub fn covolume(&self) -> RealCoord {
        self.alpha.mul(&self.beta)
    }

    pub fn density(&self) -> f64 {
        self.covolume().to_f64()
    }

    pub fn real_lattice(&self) -> Result<RectLattice> {
        RectLattice::new(self.alpha.to_f64(), self.beta.to_f64())
    }

    /// Time and frequency components of the lattice point indexed by `(q, r)`.
    pub fn point(&self, q: &Rational, r: &Rational) -> Result<(AdelicPoint, AdelicPoint)> {
        Ok((lattice_embed(self.group, &self.alpha, q)?, lattice_embed(self.group, &self.beta, r)?))
    }

    /// `pi(lambda) f` for the lattice point indexed by `(q, r)`.
    pub fn shift(&self, f: &SeparableWindow, q: &Rational, r: &Rational) -> Result<SeparableWindow> {
        let (x, w) = self.point(q, r)?;
        Ok(f.tf_shift(self.group, &x, &w))
    }
}

impl Serialize for AdelicTFLattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AdelicTFLattice", 4)?;
        st.serialize_field("alpha", &self.alpha)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("primes", &self.primes)?;
        st.end()
    }
}

/// `<f, pi(lambda) g>` split into its factors.
#[derive(Clone, Debug)]
pub struct GroupInner {
    pub value: Complex64,
    /// `None` when a p-adic factor vanished and the real factor was skipped.
    pub real_factor: Option<Complex64>,
    /// Exact factors at the primes that were evaluated; all others are 1.
    pub padic_factors: BTreeMap<Prime, CyclotomicNumber>,
    pub exact_zero: bool,
}

/// `<f, E_{phi_beta(r)} T_{phi_alpha(q)} g>` as the real factor times exact
/// p-adic factors. Primes where both windows are `1_{Z_p}` and both shifts lie
/// in `Z_p` contribute exactly 1 and are not evaluated.
pub fn tf_inner_product_group(
    f: &SeparableWindow,
    g: &SeparableWindow,
    q: &Rational,
    r: &Rational,
    lat: &AdelicTFLattice,
    tol: f64,
) -> Result<GroupInner> {
    f.check_group(lat.group)?;
    g.check_group(lat.group)?;
    let (x, w) = lat.point(q, r)?;
    let mut primes: Vec<Prime> = match lat.group {
        GroupSelector::Real => Vec::new(),
        GroupSelector::RealXQp(p) => vec![p],
        GroupSelector::Adele => x
            .listed_primes()
            .into_iter()
            .chain(w.listed_primes())
            .chain(f.local_parts().keys().copied())
            .chain(g.local_parts().keys().copied())
            .collect(),
    };
    primes.sort();
    primes.dedup();
    let mut padic_factors = BTreeMap::new();
    let mut exact_zero = false;
    for p in primes {
        let trivial = !f.local_parts().contains_key(&p)
            && !g.local_parts().contains_key(&p)
            && in_zp(x.coord(p), p)
            && in_zp(w.coord(p), p);
        if trivial {
            continue;
        }
        let c = inner_product_padic(&f.local(p), &tf_shift_padic(&g.local(p), x.coord(p), w.coord(p)))?;
        exact_zero |= c.is_zero();
        padic_factors.insert(p, c);
        if exact_zero {
            break;
        }
    }
    if exact_zero {
        return Ok(GroupInner {
            value: Complex64::new(0.0, 0.0),
            real_factor: None,
            padic_factors,
            exact_zero,
        });
    }
    let real = tf_inner_product_real(&f.real, &g.real, x.real.to_f64(), w.real.to_f64(), tol)?;
    let value = padic_factors.values().fold(real, |acc, c| acc * c.to_complex());
    Ok(GroupInner {
        value,
        real_factor: Some(real),
        padic_factors,
        exact_zero,
    })
}
