use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::adelic::{character_pair, index_order, AdelicTFLattice, SeparableSum};
use crate::arith::{fmt_rational, Phase, Rational};
use crate::error::{Error, Result};

/// Lattice index `(q, r)`.
pub type Index = (Rational, Rational);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModuleSide {
    /// Sums of `pi(lambda)` over the lattice, acting from the left.
    LeftA,
    /// Sums of `pi(lambda)^*` over the adjoint lattice, acting from the right.
    RightB,
}

/// Which algebra a coefficient sequence lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleAlgebraTag {
    pub side: ModuleSide,
    /// The lattice `Lambda`; right-side elements are indexed by its adjoint.
    pub lattice: AdelicTFLattice,
}

impl ModuleAlgebraTag {
    pub fn new(side: ModuleSide, lattice: AdelicTFLattice) -> Self {
        ModuleAlgebraTag { side, lattice }
    }

    /// The lattice whose points index the coefficients.
    pub fn index_lattice(&self) -> AdelicTFLattice {
        match self.side {
            ModuleSide::LeftA => self.lattice.clone(),
            ModuleSide::RightB => self.lattice.adjoint(),
        }
    }

    /// The unitary `U_lambda` this side attaches to an index, applied to `f`:
    /// `pi(lambda) f` on the left, `pi(lambda)^* f` on the right.
    pub fn apply_unit(&self, idx: &Index, f: &SeparableSum) -> Result<SeparableSum> {
        let lat = self.index_lattice();
        match self.side {
            ModuleSide::LeftA => {
                let (x, w) = lat.point(&idx.0, &idx.1)?;
                Ok(f.tf_shift(lat.group, &x, &w))
            }
            ModuleSide::RightB => {
                let minus = (-idx.0.clone(), -idx.1.clone());
                let (x, w) = lat.point(&minus.0, &minus.1)?;
                let c = heisenberg_cocycle(&lat, &minus, idx)?.conj();
                Ok(f.tf_shift(lat.group, &x, &w).scale(c.to_complex()))
            }
        }
    }
}

impl Serialize for ModuleAlgebraTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ModuleAlgebraTag", 2)?;
        st.serialize_field("lattice", &self.lattice)?;
        st.serialize_field("side", &self.side)?;
        st.end()
    }
}

/// `c` with `pi(l1) pi(l2) = c(l1, l2) pi(l1 + l2)` on `lat`: `conj(omega_{w2}(x1))`.
pub fn heisenberg_cocycle(lat: &AdelicTFLattice, l1: &Index, l2: &Index) -> Result<Phase> {
    let (x1, _) = lat.point(&l1.0, &l1.1)?;
    let (_, w2) = lat.point(&l2.0, &l2.1)?;
    Ok(character_pair(&x1, &w2, lat.group).conj())
}

/// `c` with `U_l1 U_l2 = c(l1, l2) U_{l1 + l2}` for the unitaries of `tag`'s side.
pub fn cocycle(l1: &Index, l2: &Index, tag: &ModuleAlgebraTag) -> Result<Phase> {
    let lat = tag.index_lattice();
    match tag.side {
        ModuleSide::LeftA => heisenberg_cocycle(&lat, l1, l2),
        // pi(l1)^* pi(l2)^* = (pi(l2) pi(l1))^*
        ModuleSide::RightB => Ok(heisenberg_cocycle(&lat, l2, l1)?.conj()),
    }
}

/// A finitely supported element `sum a(lambda) U_lambda` of one of the two algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    pub tag: ModuleAlgebraTag,
    pub coeffs: BTreeMap<Index, Complex64>,
    /// Bound on the l1 norm of the coefficients dropped by truncation.
    pub tail_bound: f64,
}

impl ModuleElement {
    pub fn zero(tag: ModuleAlgebraTag) -> Self {
        ModuleElement {
            tag,
            coeffs: BTreeMap::new(),
            tail_bound: 0.0,
        }
    }

    /// `delta_0`, the unit.
    pub fn unit(tag: ModuleAlgebraTag) -> Self {
        Self::delta(tag, (Rational::from_integer(0.into()), Rational::from_integer(0.into())), Complex64::new(1.0, 0.0))
    }

    pub fn delta(tag: ModuleAlgebraTag, idx: Index, c: Complex64) -> Self {
        ModuleElement {
            tag,
            coeffs: BTreeMap::from([(idx, c)]),
            tail_bound: 0.0,
        }
    }

    pub fn get(&self, idx: &Index) -> Complex64 {
        self.coeffs.get(idx).copied().unwrap_or_default()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Whether every index with a coefficient is an integer pair.
    pub fn supported_on_integers(&self) -> bool {
        self.coeffs.keys().all(|(q, r)| q.is_integer() && r.is_integer())
    }

    fn check_tag(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::InvalidArgument("module elements over different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_tag(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_default() += v;
        }
        out.tail_bound += other.tail_bound;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ModuleElement {
            tag: self.tag.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            tail_bound: self.tail_bound * c.norm(),
        }
    }

    /// Coefficients in canonical index order.
    pub fn ordered(&self) -> Vec<(&Index, &Complex64)> {
        let mut v: Vec<_> = self.coeffs.iter().collect();
        v.sort_by(|a, b| index_order(a.0, b.0));
        v
    }
}

impl Serialize for ModuleElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a ModuleElement);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let ordered = self.0.ordered();
                let mut seq = s.serialize_seq(Some(ordered.len()))?;
                for ((q, r), c) in ordered {
                    seq.serialize_element(&(fmt_rational(q), fmt_rational(r), c.re, c.im))?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("ModuleElement", 4)?;
        st.serialize_field("coefficients", &Coeffs(self))?;
        st.serialize_field("l1_norm", &self.l1_norm())?;
        st.serialize_field("tag", &self.tag)?;
        st.serialize_field("tail_bound", &self.tail_bound)?;
        st.end()
    }
}

/// `(a # b)(lambda) = sum_mu a(mu) b(lambda - mu) c(mu, lambda - mu)`, so that
/// the represented operators compose. The cocycle only sees the time index of
/// one factor and the frequency index of the other, so it is cached on those.
pub fn twisted_convolve(a: &ModuleElement, b: &ModuleElement) -> Result<ModuleElement> {
    a.check_tag(b)?;
    let mut phases: HashMap<(&Rational, &Rational), Complex64> = HashMap::new();
    let mut out: BTreeMap<Index, Complex64> = BTreeMap::new();
    for (m, x) in &a.coeffs {
        for (n, y) in &b.coeffs {
            let key = match a.tag.side {
                ModuleSide::LeftA => (&m.0, &n.1),
                ModuleSide::RightB => (&n.0, &m.1),
            };
            let c = match phases.get(&key) {
                Some(c) => *c,
                None => *phases.entry(key).or_insert(cocycle(m, n, &a.tag)?.to_complex()),
            };
            let idx = (&m.0 + &n.0, &m.1 + &n.1);
            *out.entry(idx).or_default() += x * y * c;
        }
    }
    let (na, nb) = (a.l1_norm(), b.l1_norm());
    Ok(ModuleElement {
        tag: a.tag.clone(),
        coeffs: out,
        tail_bound: na * b.tail_bound + a.tail_bound * nb + a.tail_bound * b.tail_bound,
    })
}

/// `a^*(lambda) = conj(a(-lambda)) conj(c(lambda, -lambda))`, the coefficients
/// of the adjoint operator.
pub fn twisted_involution(a: &ModuleElement) -> Result<ModuleElement> {
    let mut out = BTreeMap::new();
    for (m, x) in &a.coeffs {
        let lambda = (-m.0.clone(), -m.1.clone());
        let c = cocycle(&lambda, m, &a.tag)?;
        out.insert(lambda, x.conj() * c.conj().to_complex());
    }
    Ok(ModuleElement {
        tag: a.tag.clone(),
        coeffs: out,
        tail_bound: a.tail_bound,
    })
}

/// `sum a(lambda) U_lambda f`.
pub fn module_action(a: &ModuleElement, f: &SeparableSum) -> Result<SeparableSum> {
    let mut out = SeparableSum::zero();
    for (idx, c) in &a.coeffs {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        out = out.add(&a.tag.apply_unit(idx, f)?.scale(*c));
    }
    Ok(out.compress(0.0))
}
