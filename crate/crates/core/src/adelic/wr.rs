use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::group::GroupSelector;
use super::lattice::{tf_inner_product_group, AdelicTFLattice};
use super::window::SeparableWindow;
use crate::arith::{fmt_rational, padic_valuation, prime_pow, Prime, Rational, Valuation};
use crate::error::{Error, Result};
use crate::padic_fn::{inner_product_padic, PAdicTestFunction};
use crate::real::{tf_tail_bound, Window};

/// Largest number of rows materialized for a full fractional grid.
pub const MAX_GRID_ROWS: usize = 40_000;

/// Height up to which a Wexler-Raz check extends its enumeration to certify the tail.
pub const MAX_AUTO_HEIGHT: u32 = 32;
const AUTO_HEIGHT_FRACTION: f64 = 0.1;

/// Height bound `N` and denominator exponent bound `D` of an enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub height: u32,
    pub denom_exp: u32,
}

impl Truncation {
    pub fn new(height: u32, denom_exp: u32) -> Result<Self> {
        if height == 0 || denom_exp == 0 {
            return Err(Error::InvalidArgument("truncation bounds must be positive".into()));
        }
        Ok(Truncation { height, denom_exp })
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { height: 5, denom_exp: 3 }
    }
}

/// Canonical order of lattice indices: `max(|q|, |r|)`, then `q`, then `r`.
pub fn index_order(a: &(Rational, Rational), b: &(Rational, Rational)) -> Ordering {
    let h = |x: &(Rational, Rational)| x.0.abs().max(x.1.abs());
    h(a).cmp(&h(b)).then_with(|| a.0.cmp(&b.0)).then_with(|| a.1.cmp(&b.1))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Indices of an enumeration together with whether they cover every index
/// within the height bound at which `<h, pi(lambda) g>` can be nonzero.
pub struct Enumeration {
    pub indices: Vec<(Rational, Rational)>,
    /// Common denominator of the enumerated grid.
    pub modulus: u64,
    pub complete: bool,
}

/// Enumerates lattice indices for windows whose local parts differ from
/// `1_{Z_p}` exactly at `special` primes.
///
/// Integer indices with `|q|, |r| <= N` are always listed. With default local
/// parts every other index gives an exact zero, and a sample of them is
/// listed as a witness. Otherwise the grid `M^{-1} Z` with `M = prod p^D` over
/// the special primes is listed when it is small enough.
pub fn enumerate_indices(
    lat: &AdelicTFLattice,
    trunc: Truncation,
    special: &BTreeSet<Prime>,
    special_resolution_ok: bool,
) -> Enumeration {
    let n = trunc.height as i64;
    let mut set: BTreeSet<(Rational, Rational)> = BTreeSet::new();
    let modulus = special
        .iter()
        .try_fold(1u64, |m, p| p.get().checked_pow(trunc.denom_exp).and_then(|e| m.checked_mul(e)));
    let grid_side = modulus.and_then(|m| m.checked_mul(2 * n as u64)).map(|s| s + 1);
    let grid_ok = matches!(grid_side, Some(s) if s.saturating_mul(s) <= MAX_GRID_ROWS as u64);
    let m = if grid_ok { modulus.unwrap_or(1) } else { 1 };
    let mi = m as i64;
    for a in -n * mi..=n * mi {
        for b in -n * mi..=n * mi {
            set.insert((Rational::new(a.into(), mi.into()), Rational::new(b.into(), mi.into())));
        }
    }
    if lat.group.has_finite_part() {
        for f in sample_fractions(lat, trunc) {
            for idx in [
                (f.clone(), Rational::zero()),
                (Rational::zero(), f.clone()),
                (f.clone(), f.clone()),
                (-f.clone(), Rational::one()),
            ] {
                set.insert(idx);
            }
        }
    }
    let mut indices: Vec<_> = set.into_iter().collect();
    indices.sort_by(index_order);
    Enumeration {
        indices,
        modulus: m,
        complete: special.is_empty() || (grid_ok && special_resolution_ok),
    }
}

fn sample_fractions(lat: &AdelicTFLattice, trunc: Truncation) -> Vec<Rational> {
    let mut out = Vec::new();
    for &p in &lat.primes {
        for e in 1..=trunc.denom_exp as i64 {
            let pe = prime_pow(p, e);
            out.push(prime_pow(p, -e));
            out.push((&pe - int(1)) / &pe);
        }
    }
    if lat.group == GroupSelector::Adele {
        for (i, &p) in lat.primes.iter().enumerate() {
            for &q in &lat.primes[i + 1..] {
                out.push(Rational::new(BigInt::one(), BigInt::from(p.get() * q.get())));
            }
        }
    }
    out
}

fn valuation_or(x: &Rational, p: Prime, inf: i64) -> i64 {
    match padic_valuation(x, p) {
        Valuation::Infinite => inf,
        Valuation::Finite(v) => v,
    }
}

/// The smallest `D` such that `<f, E_r T_q g> = 0` whenever `q` or `r` has a
/// denominator divisible by `p^{D+1}`.
pub fn local_resolution(f: &PAdicTestFunction, g: &PAdicTestFunction) -> i64 {
    const FAR: i64 = i64::MAX / 4;
    let p = f.prime();
    let max_level = f.terms().iter().chain(g.terms()).map(|t| t.ball.level()).max().unwrap_or(0);
    let mut min_vq = FAR;
    let mut min_vr = -max_level;
    for a in f.terms() {
        for b in g.terms() {
            let vc = valuation_or(&(a.ball.center() - b.ball.center()), p, FAR);
            min_vq = min_vq.min(vc.min(a.ball.level()).min(b.ball.level()));
            min_vr = min_vr.min(valuation_or(&(&b.freq - &a.freq), p, FAR));
        }
    }
    (-min_vq).max(-min_vr).max(0)
}

/// One evaluated index of a Wexler-Raz table.
#[derive(Clone, Debug)]
pub struct WrRow {
    pub q: Rational,
    pub r: Rational,
    pub expected: Complex64,
    pub computed: Complex64,
    pub residual: f64,
    pub exact_zero: bool,
}

impl WrRow {
    pub fn is_integer(&self) -> bool {
        self.q.is_integer() && self.r.is_integer()
    }
}

impl Serialize for WrRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("WrRow", 6)?;
        st.serialize_field("computed", &[self.computed.re, self.computed.im])?;
        st.serialize_field("exact_zero", &self.exact_zero)?;
        st.serialize_field("expected", &[self.expected.re, self.expected.im])?;
        st.serialize_field("q", &fmt_rational(&self.q))?;
        st.serialize_field("r", &fmt_rational(&self.r))?;
        st.serialize_field("residual", &self.residual)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dual,
    NotDual,
    Inconclusive,
}

/// Conventions every Wexler-Raz report is computed under.
pub fn conventions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("adjoint_lattice", "time step 1/beta, frequency step 1/alpha"),
        ("expected_value", "s(Lambda) = alpha*beta at the origin, 0 elsewhere"),
        ("modulation", "E_w f(t) = e^{2 pi i t_inf w_inf} prod_p e^{-2 pi i {t_p w_p}_p} f(t)"),
        ("padic_character_sign", "minus"),
        ("row_value", "<h, pi(lambda) g>"),
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct WexlerRazReport {
    pub group: GroupSelector,
    pub lattice: AdelicTFLattice,
    pub adjoint: AdelicTFLattice,
    pub truncation: Truncation,
    /// Height actually enumerated: the requested one, raised until the tail
    /// bound drops below a tenth of the tolerance.
    pub height_used: u32,
    pub rows: Vec<WrRow>,
    pub max_residual: f64,
    pub integer_max_residual: f64,
    pub tail_bound: f64,
    pub enumeration_complete: bool,
    pub grid_modulus: u64,
    pub tol: f64,
    pub verdict: Verdict,
    pub conventions: BTreeMap<&'static str, &'static str>,
}

impl WexlerRazReport {
    pub fn origin(&self) -> Option<&WrRow> {
        self.rows.iter().find(|r| r.q.is_zero() && r.r.is_zero())
    }
}

fn special_primes(g: &SeparableWindow, h: &SeparableWindow) -> BTreeSet<Prime> {
    g.local_parts().keys().chain(h.local_parts().keys()).copied().collect()
}

fn local_norm(f: &PAdicTestFunction) -> Result<f64> {
    Ok(inner_product_padic(f, f)?.to_complex().re.max(0.0).sqrt())
}

/// Tail bound and completeness for the rows of `<h, pi(lambda) g>` left out
/// of an enumeration of `lat`.
pub(crate) fn omitted_rows_bound(
    h: &SeparableWindow,
    g: &SeparableWindow,
    lat: &AdelicTFLattice,
    trunc: Truncation,
) -> Result<(Enumeration, f64)> {
    let special = special_primes(g, h);
    let mut resolution_ok = true;
    let mut local_weight = 1.0;
    for &p in &special {
        resolution_ok &= local_resolution(&h.local(p), &g.local(p)) <= trunc.denom_exp as i64;
        local_weight *= local_norm(&h.local(p))? * local_norm(&g.local(p))?;
    }
    let en = enumerate_indices(lat, trunc, &special, resolution_ok);
    let tail = if en.complete {
        let m = en.modulus as f64;
        local_weight
            * tf_tail_bound(
                &h.real,
                &g.real,
                lat.alpha.to_f64() / m,
                lat.beta.to_f64() / m,
                trunc.height as i64 * en.modulus as i64,
            )
    } else {
        f64::INFINITY
    };
    Ok((en, tail))
}

/// Raises the height of `trunc` until the bound on the omitted rows of
/// `<h, pi(lambda) g>` drops to `target`, up to `max(4N, MAX_AUTO_HEIGHT)`.
pub fn certified_enumeration(
    h: &SeparableWindow,
    g: &SeparableWindow,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    target: f64,
) -> Result<(Enumeration, f64, Truncation)> {
    let cap = (4 * trunc.height).max(MAX_AUTO_HEIGHT);
    let mut used = trunc;
    loop {
        let (en, tail) = omitted_rows_bound(h, g, lat, used)?;
        if tail <= target || !tail.is_finite() || used.height >= cap {
            return Ok((en, tail, used));
        }
        used.height += 1;
    }
}

/// Evaluates `<h, pi(lambda) g>` over the adjoint lattice and compares with
/// `alpha beta delta_{lambda, 0}`.
pub fn wexler_raz_check(
    g: &SeparableWindow,
    h: &SeparableWindow,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    tol: f64,
) -> Result<WexlerRazReport> {
    if lat.group == GroupSelector::Adele {
        // separability is structural; only the local parts need a sanity check
        g.check_group(lat.group)?;
        h.check_group(lat.group)?;
    }
    let adj = lat.adjoint();
    let (en, tail_bound, used) = certified_enumeration(h, g, &adj, trunc, AUTO_HEIGHT_FRACTION * tol)?;
    let covolume = lat.density();
    let rows: Vec<WrRow> = en
        .indices
        .par_iter()
        .map(|(q, r)| {
            let v = tf_inner_product_group(h, g, q, r, &adj, tol)?;
            let expected = if q.is_zero() && r.is_zero() {
                Complex64::new(covolume, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            Ok(WrRow {
                q: q.clone(),
                r: r.clone(),
                expected,
                computed: v.value,
                residual: (v.value - expected).norm(),
                exact_zero: v.exact_zero,
            })
        })
        .collect::<Result<_>>()?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let integer_max_residual = rows.iter().filter(|r| r.is_integer()).map(|r| r.residual).fold(0.0, f64::max);
    let verdict = if max_residual + tail_bound < tol {
        Verdict::Dual
    } else if max_residual >= tol {
        Verdict::NotDual
    } else {
        Verdict::Inconclusive
    };
    Ok(WexlerRazReport {
        group: lat.group,
        lattice: lat.clone(),
        adjoint: adj,
        truncation: trunc,
        height_used: used.height,
        rows,
        max_residual,
        integer_max_residual,
        tail_bound,
        enumeration_complete: en.complete,
        grid_modulus: en.modulus,
        tol,
        verdict,
        conventions: conventions(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub reports: Vec<WexlerRazReport>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub verdict: Verdict,
}

/// Tolerance for integer rows on the product groups against the real line.
pub const ROW_AGREEMENT_TOL: f64 = 1e-10;

/// Runs the Wexler-Raz check on `R`, `R x Q_p` and the adeles for the
/// separable extensions of `g_r` and `h_r` and checks that the three agree.
pub fn theorem_equivalence_suite(
    g_r: &Window,
    h_r: &Window,
    alpha: f64,
    beta: f64,
    p: Prime,
    trunc: Truncation,
    tol: f64,
) -> Result<EquivalenceReport> {
    let g = SeparableWindow::from_real(g_r.clone());
    let h = SeparableWindow::from_real(h_r.clone());
    let mut reports = Vec::new();
    for group in [GroupSelector::Real, GroupSelector::RealXQp(p), GroupSelector::Adele] {
        let lat = AdelicTFLattice::new(group, alpha, beta)?;
        reports.push(wexler_raz_check(&g, &h, &lat, trunc, tol)?);
    }
    let real_rows: BTreeMap<(Rational, Rational), Complex64> =
        reports[0].rows.iter().map(|r| ((r.q.clone(), r.r.clone()), r.computed)).collect();

    let mut nonzero = Vec::new();
    let mut worst_gap: f64 = 0.0;
    let mut missing = 0usize;
    for rep in &reports[1..] {
        for row in &rep.rows {
            if row.is_integer() {
                match real_rows.get(&(row.q.clone(), row.r.clone())) {
                    Some(v) => worst_gap = worst_gap.max((v - row.computed).norm()),
                    None => missing += 1,
                }
            } else if !row.exact_zero {
                nonzero.push(format!("{} ({}, {})", rep.group, fmt_rational(&row.q), fmt_rational(&row.r)));
            }
        }
    }
    let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
    let coincide = verdicts.iter().all(|v| *v == verdicts[0]);
    let assertions = vec![
        Assertion {
            name: "non_integer_rows_exact_zero",
            passed: nonzero.is_empty(),
            detail: if nonzero.is_empty() {
                "every materialized non-integer row vanished exactly".into()
            } else {
                format!("nonzero rows: {}", nonzero.join(", "))
            },
        },
        Assertion {
            name: "integer_rows_match_real_line",
            passed: worst_gap <= ROW_AGREEMENT_TOL && missing == 0,
            detail: format!("largest deviation {worst_gap:e}, unmatched rows {missing}"),
        },
        Assertion {
            name: "verdicts_coincide",
            passed: coincide,
            detail: format!("{verdicts:?}"),
        },
    ];
    let passed = assertions.iter().all(|a| a.passed);
    Ok(EquivalenceReport {
        verdict: if coincide { verdicts[0] } else { Verdict::Inconclusive },
        reports,
        assertions,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic_fn::PAdicBall;
    use crate::real::{canonical_dual, DualMethod, RectLattice};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn zero_windows_fail_at_the_origin() {
        let z = SeparableWindow::zero();
        let lat = AdelicTFLattice::new(GroupSelector::Adele, 0.5, 1.0).unwrap();
        let rep = wexler_raz_check(&z, &z, &lat, Truncation::default(), 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::NotDual);
        for row in &rep.rows {
            let want = if row.q.is_zero() && row.r.is_zero() { 0.5 } else { 0.0 };
            assert!((row.residual - want).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_is_not_its_own_dual() {
        let g = SeparableWindow::from_real(Window::Gaussian);
        let lat = AdelicTFLattice::new(GroupSelector::Adele, FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let rep = wexler_raz_check(&g, &g, &lat, Truncation::default(), 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::NotDual);
        assert!((rep.origin().unwrap().residual - (FRAC_1_SQRT_2 - 0.5)).abs() < 1e-12);
        assert!(rep.rows.iter().filter(|r| !r.is_integer()).all(|r| r.exact_zero));
        assert!(rep.rows.iter().any(|r| !r.is_integer()));
    }

    #[test]
    fn canonical_dual_passes_on_every_group() {
        let rl = RectLattice::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
        let h = canonical_dual(&Window::Gaussian, &rl, DualMethod::Neumann, 1e-11).unwrap();
        let rep = theorem_equivalence_suite(&Window::Gaussian, &h, FRAC_1_SQRT_2, FRAC_1_SQRT_2, p(2), Truncation::default(), 1e-8)
            .unwrap();
        assert!(rep.passed, "{:?}", rep.assertions);
        assert_eq!(rep.verdict, Verdict::Dual);
        for r in &rep.reports {
            assert!(r.max_residual < 1e-8 && r.tail_bound < 1e-9 && r.height_used > 5);
        }
    }

    #[test]
    fn box_basis_is_dual_everywhere() {
        let b = Window::Box(1.0);
        let rep = theorem_equivalence_suite(&b, &b, 1.0, 1.0, p(3), Truncation::default(), 1e-8).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.verdict, Verdict::Dual);
        assert!(rep.reports.iter().all(|r| r.max_residual < 1e-12));
    }

    #[test]
    fn local_resolution_bounds_vanishing_rows() {
        let pr = p(2);
        let f = PAdicTestFunction::indicator(PAdicBall::new(pr, &Rational::zero(), -1));
        assert_eq!(local_resolution(&f, &f), 1);
        let u = PAdicTestFunction::unit_indicator(pr);
        assert_eq!(local_resolution(&u, &u), 0);
    }

    #[test]
    fn non_default_local_parts_enumerate_the_fine_grid() {
        let pr = p(2);
        let group = GroupSelector::RealXQp(pr);
        let ball = PAdicBall::new(pr, &Rational::zero(), -1);
        let local = BTreeMap::from([(pr, PAdicTestFunction::indicator(ball))]);
        let g = SeparableWindow::new(Window::Gaussian, local).unwrap();
        let lat = AdelicTFLattice::new(group, 1.0, 0.5).unwrap();
        let trunc = Truncation::new(2, 1).unwrap();
        let rep = wexler_raz_check(&g, &g, &lat, trunc, 1e-8).unwrap();
        assert!(rep.enumeration_complete && rep.grid_modulus == 2);
        // a row with denominator 2 survives: the local factor sees 2^{-1} Z_2
        assert!(rep.rows.iter().any(|r| !r.is_integer() && !r.exact_zero));
        assert!(rep.tail_bound.is_finite());
    }
}
