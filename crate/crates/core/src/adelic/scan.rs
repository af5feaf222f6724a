use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::group::GroupSelector;
use super::lattice::{tf_inner_product_group, AdelicTFLattice};
use super::window::SeparableWindow;
use super::wr::{omitted_rows_bound, wexler_raz_check, Truncation};
use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::real::{canonical_dual, frame_bounds, DualMethod, Window};

/// `(sum_r (sum_q |c(q, r)|^s)^{t/s})^{1/t}`, with a maximum in place of a
/// sum when an exponent is infinite.
pub fn mixed_norm(table: &BTreeMap<(Rational, Rational), f64>, s: f64, t: f64) -> f64 {
    let mut by_r: BTreeMap<&Rational, Vec<f64>> = BTreeMap::new();
    for ((_, r), c) in table {
        by_r.entry(r).or_default().push(c.abs());
    }
    let inner: Vec<f64> = by_r.values().map(|cs| lp_norm(cs, s)).collect();
    lp_norm(&inner, t)
}

fn lp_norm(xs: &[f64], s: f64) -> f64 {
    if s.is_infinite() {
        xs.iter().copied().fold(0.0, f64::max)
    } else {
        xs.iter().map(|x| x.powf(s)).sum::<f64>().powf(1.0 / s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulationNorm {
    pub norm: f64,
    pub s: f64,
    pub t: f64,
    pub coefficients: usize,
    /// Bound on the l1 mass of the omitted coefficients.
    pub tail_bound: f64,
}

/// Truncated `M^{s,t}` norm of `f` from its Gabor coefficients `|<f, pi(lambda) g>|`.
pub fn modulation_norm(
    f: &SeparableWindow,
    g: &SeparableWindow,
    lat: &AdelicTFLattice,
    s: f64,
    t: f64,
    trunc: Truncation,
    tol: f64,
) -> Result<ModulationNorm> {
    if !(s >= 1.0 && t >= 1.0) {
        return Err(Error::InvalidArgument(format!("mixed-norm exponents must be at least 1, got ({s}, {t})")));
    }
    let (en, tail_bound) = omitted_rows_bound(f, g, lat, trunc)?;
    let table: BTreeMap<(Rational, Rational), f64> = en
        .indices
        .par_iter()
        .map(|(q, r)| Ok(((q.clone(), r.clone()), tf_inner_product_group(f, g, q, r, lat, tol)?.value.norm())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    Ok(ModulationNorm {
        norm: mixed_norm(&table, s, t),
        s,
        t,
        coefficients: table.len(),
        tail_bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BalianLowRow {
    pub density: f64,
    pub alpha: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Lower bound estimates on successively refined sample grids.
    pub lower_refined: Vec<f64>,
    pub is_frame: Option<bool>,
    pub dual_origin_residual: Option<f64>,
    pub dual_max_residual: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub grid_density: usize,
    pub refinements: usize,
    pub compute_duals: bool,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_density: crate::real::DEFAULT_GRID_DENSITY,
            refinements: 2,
            compute_duals: true,
            tol: 1e-8,
        }
    }
}

/// Frame bounds of `g_r` and the quality of its canonical dual on the square
/// lattices `alpha = beta = sqrt(d)` for each density `d`.
pub fn balian_low_scan(
    g_r: &Window,
    densities: &[f64],
    group: GroupSelector,
    trunc: Truncation,
    opts: ScanOptions,
) -> Result<Vec<BalianLowRow>> {
    let mut rows = Vec::new();
    for &d in densities {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {d} is outside (0, 1]")));
        }
        let a = d.sqrt();
        let lat = AdelicTFLattice::new(group, a, a)?;
        let real = lat.real_lattice()?;
        let mut row = BalianLowRow {
            density: d,
            alpha: a,
            lower: None,
            upper: None,
            lower_refined: Vec::new(),
            is_frame: None,
            dual_origin_residual: None,
            dual_max_residual: None,
            note: None,
        };
        if real.rational_density().is_none() {
            row.note = Some("irrational density skipped".into());
            rows.push(row);
            continue;
        }
        let mut n = opts.grid_density;
        let fb = frame_bounds(g_r, &real, n)?;
        row.lower = Some(fb.lower);
        row.upper = Some(fb.upper);
        row.is_frame = Some(fb.is_frame());
        row.lower_refined.push(fb.lower);
        for _ in 0..opts.refinements {
            n = 2 * n + 1;
            row.lower_refined.push(frame_bounds(g_r, &real, n)?.lower);
        }
        if opts.compute_duals {
            match canonical_dual(g_r, &real, DualMethod::Neumann, opts.tol) {
                Ok(h) => {
                    let rep = wexler_raz_check(
                        &SeparableWindow::from_real(g_r.clone()),
                        &SeparableWindow::from_real(h),
                        &lat,
                        trunc,
                        opts.tol,
                    )?;
                    row.dual_origin_residual = rep.origin().map(|r| r.residual);
                    row.dual_max_residual = Some(rep.max_residual);
                }
                Err(Error::NotAFrame { .. }) => row.note = Some("not-a-frame".into()),
                Err(e @ Error::NonConvergence { .. }) => row.note = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
