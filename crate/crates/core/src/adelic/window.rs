use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::group::{AdelicPoint, GroupSelector};
use crate::arith::{in_zp, Prime};
use crate::error::{Error, Result};
use crate::padic_fn::{inner_product_padic, tf_shift_padic, PAdicTestFunction};
use crate::real::{inner_product_real, Window};

/// `g_R (x) prod_p g_p` with `g_p = 1_{Z_p}` for every prime not listed.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableWindow {
    pub real: Window,
    local: BTreeMap<Prime, PAdicTestFunction>,
}

impl SeparableWindow {
    /// `g_R` tensored with `1_{Z_p}` at every prime.
    pub fn from_real(real: Window) -> Self {
        SeparableWindow {
            real,
            local: BTreeMap::new(),
        }
    }

    pub fn new(real: Window, local: BTreeMap<Prime, PAdicTestFunction>) -> Result<Self> {
        for (p, f) in &local {
            if f.prime() != *p {
                return Err(Error::InvalidArgument(format!(
                    "local part at {p} is a {}-adic function",
                    f.prime()
                )));
            }
        }
        let local = local.into_iter().filter(|(_, f)| !f.is_unit_indicator()).collect();
        Ok(SeparableWindow { real, local })
    }

    pub fn zero() -> Self {
        Self::from_real(Window::zero())
    }

    /// Explicitly stored local parts; every other prime carries `1_{Z_p}`.
    pub fn local_parts(&self) -> &BTreeMap<Prime, PAdicTestFunction> {
        &self.local
    }

    pub fn local(&self, p: Prime) -> PAdicTestFunction {
        self.local.get(&p).cloned().unwrap_or_else(|| PAdicTestFunction::unit_indicator(p))
    }

    pub fn has_default_local_parts(&self) -> bool {
        self.local.is_empty()
    }

    /// Checks that the window lives on `group`.
    pub fn check_group(&self, group: GroupSelector) -> Result<()> {
        match group {
            GroupSelector::Real if !self.local.is_empty() => Err(Error::InvalidArgument(
                "a window on R cannot carry p-adic parts".into(),
            )),
            GroupSelector::RealXQp(p) if self.local.keys().any(|&q| q != p) => Err(Error::InvalidArgument(format!(
                "a window on R x Q_{p} can only carry a {p}-adic part"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.real.is_zero() || self.local.values().any(PAdicTestFunction::is_zero)
    }

    /// `E_w T_x` on the group.
    pub fn tf_shift(&self, group: GroupSelector, x: &AdelicPoint, w: &AdelicPoint) -> Self {
        let real = self.real.tf_shift(x.real.to_f64(), w.real.to_f64());
        let mut local = BTreeMap::new();
        for p in shift_primes(group, &self.local, x, w) {
            let f = tf_shift_padic(&self.local(p), x.coord(p), w.coord(p));
            if !f.is_unit_indicator() {
                local.insert(p, f);
            }
        }
        SeparableWindow { real, local }
    }

    /// Value at `(t, (t_p)_p)`. Only the primes that matter on `group` are read.
    pub fn eval(&self, group: GroupSelector, t: f64, tp: &AdelicPoint) -> Complex64 {
        self.real.eval(t) * self.local_factor(group, tp)
    }

    /// Product of the local parts at `(t_p)_p`.
    pub fn local_factor(&self, group: GroupSelector, tp: &AdelicPoint) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for p in shift_primes(group, &self.local, tp, &AdelicPoint::zero()) {
            let x = tp.coord(p);
            v *= match self.local.get(&p) {
                Some(f) => f.eval(x).to_complex(),
                None if in_zp(x, p) => Complex64::new(1.0, 0.0),
                None => Complex64::new(0.0, 0.0),
            };
        }
        v
    }

    /// `<f, g>` on the group: the real inner product times exact local factors.
    pub fn inner(&self, other: &Self, tol: f64) -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        let primes: BTreeSet<Prime> = self.local.keys().chain(other.local.keys()).copied().collect();
        for p in primes {
            let c = inner_product_padic(&self.local(p), &other.local(p))?;
            if c.is_zero() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            v *= c.to_complex();
        }
        Ok(v * inner_product_real(&self.real, &other.real, tol)?)
    }
}

/// Primes at which `E_w T_x` can change a local part.
fn shift_primes(
    group: GroupSelector,
    local: &BTreeMap<Prime, PAdicTestFunction>,
    x: &AdelicPoint,
    w: &AdelicPoint,
) -> Vec<Prime> {
    match group {
        GroupSelector::Real => Vec::new(),
        GroupSelector::RealXQp(p) => vec![p],
        GroupSelector::Adele => {
            let s: BTreeSet<Prime> = local
                .keys()
                .chain(x.finite().keys())
                .chain(w.finite().keys())
                .copied()
                .collect();
            s.into_iter().collect()
        }
    }
}

impl Serialize for SeparableWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let local: BTreeMap<String, &PAdicTestFunction> = self.local.iter().map(|(p, f)| (p.to_string(), f)).collect();
        let mut st = s.serialize_struct("SeparableWindow", 2)?;
        st.serialize_field("local", &local)?;
        st.serialize_field("real", &self.real)?;
        st.end()
    }
}

/// A finite sum of separable windows; terms with equal local parts are merged
/// by adding their real factors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeparableSum {
    terms: Vec<SeparableWindow>,
}

impl SeparableSum {
    pub fn zero() -> Self {
        SeparableSum { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[SeparableWindow] {
        &self.terms
    }

    pub fn push(&mut self, w: SeparableWindow) {
        if w.is_zero() {
            return;
        }
        match self.terms.iter_mut().find(|t| t.local == w.local) {
            Some(t) => t.real = t.real.add(&w.real),
            None => self.terms.push(w),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SeparableSum {
            terms: self
                .terms
                .iter()
                .map(|t| SeparableWindow {
                    real: t.real.scale(c),
                    local: t.local.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn tf_shift(&self, group: GroupSelector, x: &AdelicPoint, w: &AdelicPoint) -> Self {
        let mut out = SeparableSum::zero();
        for t in &self.terms {
            out.push(t.tf_shift(group, x, w));
        }
        out
    }

    pub fn eval(&self, group: GroupSelector, t: f64, tp: &AdelicPoint) -> Complex64 {
        self.terms.iter().map(|w| w.eval(group, t, tp)).sum()
    }

    pub fn inner(&self, other: &Self, tol: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.inner(b, tol)?;
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, tol: f64) -> Result<f64> {
        Ok(self.inner(self, tol)?.re.max(0.0).sqrt())
    }

    /// Merges duplicate atoms in every real factor.
    pub fn compress(&self, drop_below: f64) -> Self {
        SeparableSum {
            terms: self
                .terms
                .iter()
                .map(|t| SeparableWindow {
                    real: t.real.compress(drop_below),
                    local: t.local.clone(),
                })
                .collect(),
        }
    }
}

impl From<SeparableWindow> for SeparableSum {
    fn from(w: SeparableWindow) -> Self {
        let mut s = SeparableSum::zero();
        s.push(w);
        s
    }
}

impl Serialize for SeparableSum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}
