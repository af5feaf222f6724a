use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::algebra::{module_action, twisted_convolve, twisted_involution, ModuleAlgebraTag, ModuleElement, ModuleSide};
use crate::adelic::{
    certified_enumeration, omitted_rows_bound, tf_inner_product_group, AdelicPoint, AdelicTFLattice, SeparableSum,
    SeparableWindow, Truncation,
};
use crate::arith::{padic_valuation, Prime, Rational, RealCoord, Valuation};
use crate::error::{Error, Result};
use crate::real::{tight_window_detailed, CompiledWindow, FrameBounds};

/// Quadrature tolerance of the checks relative to their verdict tolerance.
const QUADRATURE_FRACTION: f64 = 1e-4;

/// Step of the real grid used by [`SampleGrid`].
pub const GRID_STEP: f64 = 5e-3;

/// `a<f, g>` (left) or `<f, g>_B` (right) over the truncated index lattice.
///
/// Left coefficients are `<f, pi(lambda) g>` on the lattice; right coefficients
/// are `(1/(alpha beta)) <g, pi(mu)^* f>` on the adjoint lattice. Rows that
/// vanish exactly are not stored.
pub fn module_inner(
    f: &SeparableWindow,
    g: &SeparableWindow,
    side: ModuleSide,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    tol: f64,
) -> Result<ModuleElement> {
    let tag = ModuleAlgebraTag::new(side, lat.clone());
    let il = tag.index_lattice();
    let (en, tail) = omitted_rows_bound(f, g, &il, trunc)?;
    let scale = match side {
        ModuleSide::LeftA => 1.0,
        ModuleSide::RightB => 1.0 / lat.density(),
    };
    let rows = en
        .indices
        .par_iter()
        .map(|(q, r)| {
            let v = tf_inner_product_group(f, g, q, r, &il, tol)?;
            let c = match side {
                ModuleSide::LeftA => v.value,
                ModuleSide::RightB => v.value.conj() * scale,
            };
            Ok((!v.exact_zero).then(|| ((q.clone(), r.clone()), c)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModuleElement {
        tag,
        coeffs: rows.into_iter().flatten().collect(),
        tail_bound: tail * scale,
    })
}

/// [`module_inner`] at the smallest height whose tail bound is at most `target`.
fn certified_inner(
    f: &SeparableWindow,
    g: &SeparableWindow,
    side: ModuleSide,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    target: f64,
    tol: f64,
) -> Result<(ModuleElement, Truncation)> {
    let il = ModuleAlgebraTag::new(side, lat.clone()).index_lattice();
    let scale = match side {
        ModuleSide::LeftA => 1.0,
        ModuleSide::RightB => lat.density(),
    };
    let (_, _, used) = certified_enumeration(f, g, &il, trunc, target * scale)?;
    Ok((module_inner(f, g, side, lat, used, tol)?, used))
}

/// Values of several functions on one grid: the trapezoid nodes of the real
/// line times sample points of the finite part that resolve every local part.
pub struct SampleGrid {
    values: Vec<Vec<Complex64>>,
    points: usize,
}

impl SampleGrid {
    pub fn new(fs: &[&SeparableSum], lat: &AdelicTFLattice) -> Self {
        let support = fs
            .iter()
            .flat_map(|f| f.terms())
            .filter_map(|t| t.real.support())
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)));
        let Some((lo, hi)) = support else {
            return SampleGrid {
                values: vec![Vec::new(); fs.len()],
                points: 1,
            };
        };
        let n = ((hi - lo) / GRID_STEP).ceil() as usize + 1;
        let points = finite_sample_points(fs);
        let values = fs
            .iter()
            .map(|f| {
                let real: Vec<Vec<Complex64>> = f
                    .terms()
                    .par_iter()
                    .map(|t| {
                        let w = CompiledWindow::new(&t.real);
                        (0..n).map(|i| w.eval(lo + i as f64 * GRID_STEP)).collect()
                    })
                    .collect();
                let mut out = Vec::with_capacity(n * points.len());
                for tp in &points {
                    let local: Vec<Complex64> = f.terms().iter().map(|t| t.local_factor(lat.group, tp)).collect();
                    out.extend((0..n).map(|i| real.iter().zip(&local).map(|(r, l)| r[i] * l).sum::<Complex64>()));
                }
                out
            })
            .collect();
        SampleGrid {
            values,
            points: points.len(),
        }
    }

    fn l2(&self, v: impl Iterator<Item = Complex64>) -> f64 {
        (v.map(|z| z.norm_sqr()).sum::<f64>() * GRID_STEP / self.points as f64).sqrt()
    }

    /// `sqrt(mean_{t_p} int |f_i(t, t_p)|^2 dt)`.
    pub fn norm(&self, i: usize) -> f64 {
        self.l2(self.values[i].iter().copied())
    }

    /// The same norm of `f_i - f_j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if self.values[i].is_empty() || self.values[j].is_empty() {
            return self.norm(i).max(self.norm(j));
        }
        self.l2(self.values[i].iter().zip(&self.values[j]).map(|(a, b)| a - b))
    }
}

/// `sqrt(mean_{t_p} int |f(t, t_p)|^2 dt)` on a [`SampleGrid`].
pub fn sampled_l2_norm(f: &SeparableSum, lat: &AdelicTFLattice) -> f64 {
    SampleGrid::new(&[f], lat).norm(0)
}

/// The origin, plus for every prime carrying a local part the points
/// `j p^{-k}` with `0 < j < p^{k + m}`, where `p^{-k}` bounds the ball radii
/// and `p^{-m}` the ball resolution.
fn finite_sample_points(fs: &[&SeparableSum]) -> Vec<AdelicPoint> {
    let mut levels: BTreeMap<Prime, (i64, i64)> = BTreeMap::new();
    for t in fs.iter().flat_map(|f| f.terms()) {
        for (p, g) in t.local_parts() {
            for term in g.terms() {
                let k = term.ball.level();
                let e = levels.entry(*p).or_insert((0, 0));
                e.0 = e.0.max(-k);
                e.1 = e.1.max(k);
                if let Valuation::Finite(v) = padic_valuation(&term.freq, *p) {
                    e.1 = e.1.max(-v);
                }
            }
        }
    }
    let mut points = vec![AdelicPoint::zero()];
    for (p, (neg, pos)) in levels {
        let pu = p.get();
        let den = pu.pow(neg.max(0) as u32);
        let count = den * pu.pow(pos.max(0) as u32 + 1);
        for j in 1..count {
            let x = Rational::new((j as i64).into(), (den as i64).into());
            points.push(AdelicPoint::new(RealCoord::Exact(Rational::from_integer(0.into())), BTreeMap::from([(p, x)])));
        }
    }
    points
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    /// Sampled L2 norm of `a<f, g> h - f <g, h>_B`.
    pub residual: f64,
    /// `residual` relative to the larger of the two sides.
    pub relative_residual: f64,
    pub left_coefficients: usize,
    pub right_coefficients: usize,
    /// `tail(a<f, g>) ||h|| + tail(<g, h>_B) ||f||`.
    pub tail_bound: f64,
    /// Heights at which the two tails are below `tol / 20`.
    pub left_height: u32,
    pub right_height: u32,
    /// `||<g, h>_B - delta_0||_1`; small exactly when `g, h` are dual.
    pub right_delta_residual: f64,
    /// Sampled relative error of `f - a<f, g> h`.
    pub reconstruction_residual: f64,
}

/// Compares both sides of `a<f, g> h = f <g, h>_B` as explicit finite
/// combinations. Heights are raised until each side's omitted terms are below
/// `tol / 20` in norm; inner products are evaluated to `tol / 10^4`.
pub fn module_axiom_check(
    f: &SeparableWindow,
    g: &SeparableWindow,
    h: &SeparableWindow,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    tol: f64,
) -> Result<AxiomReport> {
    let target = 0.05 * tol;
    let tol = QUADRATURE_FRACTION * tol;
    let nf = f.inner(f, tol)?.re.sqrt();
    let nh = h.inner(h, tol)?.re.sqrt();
    let (a, left) = certified_inner(f, g, ModuleSide::LeftA, lat, trunc, target / nh.max(1e-300), tol)?;
    let (b, right) = certified_inner(g, h, ModuleSide::RightB, lat, trunc, target / nf.max(1e-300), tol)?;
    let fs = SeparableSum::from(f.clone());
    let lhs = module_action(&a, &SeparableSum::from(h.clone()))?;
    let rhs = module_action(&b, &fs)?;
    let grid = SampleGrid::new(&[&lhs, &rhs, &fs], lat);
    let residual = grid.distance(0, 1);
    let scale = grid.norm(0).max(grid.norm(1));
    let n2 = grid.norm(2);
    let delta = b.sub(&ModuleElement::unit(b.tag.clone()))?.l1_norm();
    Ok(AxiomReport {
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { 0.0 },
        left_coefficients: a.coeffs.len(),
        right_coefficients: b.coeffs.len(),
        tail_bound: a.tail_bound * nh + b.tail_bound * nf,
        left_height: left.height,
        right_height: right.height,
        right_delta_residual: delta,
        reconstruction_residual: if n2 > 0.0 { grid.distance(2, 0) / n2 } else { 0.0 },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DualPairReport {
    /// `||<g, h>_B - delta_0||_1` and the bound on its omitted coefficients.
    pub delta_residual: f64,
    pub delta_tail: f64,
    /// Sampled relative error of `f - sum <f, pi(lambda) g> pi(lambda) h`.
    pub frame_residual: f64,
    /// Sampled distance between the frame expansion and `f <g, h>_B`, relative to `f`.
    pub path_residual: f64,
    /// Bound on the L2 norm of the omitted terms of the frame expansion.
    pub reconstruction_tail: f64,
    pub left_height: u32,
    pub right_height: u32,
    pub is_dual: bool,
}

/// Reconstructs `f` from `g, h` along two routes: the frame expansion
/// `a<f, g> h`, and `f <g, h>_B`. Heights are raised until the omitted
/// coefficients are below `tol / 10`; `g, h` count as dual when
/// `<g, h>_B` is within `tol` of `delta_0` including the tail.
pub fn dual_pair_check(
    f: &SeparableWindow,
    g: &SeparableWindow,
    h: &SeparableWindow,
    lat: &AdelicTFLattice,
    trunc: Truncation,
    tol: f64,
) -> Result<DualPairReport> {
    let target = 0.1 * tol;
    let quad = QUADRATURE_FRACTION * tol;
    let nh = h.inner(h, quad)?.re.sqrt();
    let (a, left) = certified_inner(f, g, ModuleSide::LeftA, lat, trunc, target / nh.max(1e-300), quad)?;
    let (b, right) = certified_inner(g, h, ModuleSide::RightB, lat, trunc, target, quad)?;
    let fs = SeparableSum::from(f.clone());
    let frame = module_action(&a, &SeparableSum::from(h.clone()))?;
    let module = module_action(&b, &fs)?;
    let grid = SampleGrid::new(&[&fs, &frame, &module], lat);
    let nf = grid.norm(0);
    if nf == 0.0 {
        return Err(Error::InvalidArgument("test function is zero".into()));
    }
    let delta_residual = b.sub(&ModuleElement::unit(b.tag.clone()))?.l1_norm();
    Ok(DualPairReport {
        delta_residual,
        delta_tail: b.tail_bound,
        frame_residual: grid.distance(0, 1) / nf,
        path_residual: grid.distance(1, 2) / nf,
        reconstruction_tail: a.tail_bound * nh,
        left_height: left.height,
        right_height: right.height,
        is_dual: delta_residual + b.tail_bound < tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionVerdict {
    Projection,
    NotProjection,
    NotAFrame,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub lattice: AdelicTFLattice,
    pub density: f64,
    pub frame_bounds: Option<FrameBounds>,
    /// `||a # a - a||_1` for `a = a<gamma, gamma>`.
    pub idempotency_residual: Option<f64>,
    /// `||a^* - a||_1`.
    pub selfadjoint_residual: Option<f64>,
    /// `(2 ||a||_1 + 1) tau + tau^2` with `tau` the omitted l1 mass of `a`.
    pub idempotency_tail: Option<f64>,
    /// `2 tau`.
    pub selfadjoint_tail: Option<f64>,
    pub coefficients: usize,
    pub supported_on_integers: Option<bool>,
    pub height_used: Option<u32>,
    pub tol: f64,
    pub verdict: ProjectionVerdict,
}

/// Whether `a<gamma, gamma>` is a projection for the tight window `gamma` of `g_r`.
pub fn projection_check(g_r: &crate::real::Window, lat: &AdelicTFLattice, trunc: Truncation, tol: f64) -> Result<ProjectionReport> {
    let mut report = ProjectionReport {
        lattice: lat.clone(),
        density: lat.density(),
        frame_bounds: None,
        idempotency_residual: None,
        selfadjoint_residual: None,
        idempotency_tail: None,
        selfadjoint_tail: None,
        coefficients: 0,
        supported_on_integers: None,
        height_used: None,
        tol,
        verdict: ProjectionVerdict::NotAFrame,
    };
    let tight = match tight_window_detailed(g_r, &lat.real_lattice()?, (tol * 1e-2).min(1e-9)) {
        Ok(d) => d,
        Err(Error::NotAFrame { .. }) => return Ok(report),
        Err(e) => return Err(e),
    };
    report.frame_bounds = Some(tight.bounds.clone());
    let gamma = SeparableWindow::from_real(tight.window);
    let (a, used) = certified_inner(&gamma, &gamma, ModuleSide::LeftA, lat, trunc, 1e-2 * tol, tol * 1e-3)?;
    let aa = twisted_convolve(&a, &a)?;
    let idem = aa.sub(&a)?.l1_norm();
    let sa = twisted_involution(&a)?.sub(&a)?.l1_norm();
    let tau = a.tail_bound;
    let idem_tail = (2.0 * a.l1_norm() + 1.0) * tau + tau * tau;
    report.idempotency_residual = Some(idem);
    report.selfadjoint_residual = Some(sa);
    report.idempotency_tail = Some(idem_tail);
    report.selfadjoint_tail = Some(2.0 * tau);
    report.coefficients = a.coeffs.len();
    report.supported_on_integers = Some(a.supported_on_integers());
    report.height_used = Some(used.height);
    report.verdict = if idem + idem_tail < tol && sa + 2.0 * tau < tol {
        ProjectionVerdict::Projection
    } else {
        ProjectionVerdict::NotProjection
    };
    Ok(report)
}
