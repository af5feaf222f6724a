use serde::{Deserialize, Serialize};

use crate::adelic::{AdelicTFLattice, GroupSelector, Truncation, DEFAULT_PRIMES};
use crate::arith::{fmt_rational, parse_rational, Prime, RealCoord};
use crate::error::{Error, Result};
use crate::real::Window;

/// Everything a run depends on. Echoed verbatim into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub group: String,
    pub prime: Option<u64>,
    pub primes: Vec<u64>,
    /// `a/b`, a decimal, or `sqrt:x`.
    pub alpha: String,
    /// Defaults to `alpha`, or to `1/alpha` for `pair`.
    pub beta: Option<String>,
    pub window: String,
    /// `auto`, `self` or `file`.
    pub dual: String,
    pub dual_path: Option<String>,
    /// Analysis window for `mod-norm`, test function for `module-check`;
    /// `module-check` draws a random Gaussian combination when unset.
    pub test_window: Option<String>,
    pub trunc_height: u32,
    pub trunc_denom_exp: u32,
    pub tol: f64,
    /// Threshold on sampled L2 residuals in `module-check`.
    pub residual_tol: f64,
    pub output: String,
    pub out: Option<String>,
    pub save_dual: Option<String>,
    pub seed: u64,
    pub densities: Vec<f64>,
    pub s: f64,
    pub t: f64,
    pub q: String,
    pub r: String,
    /// Point to reduce: real coordinate, `p:x` finite coordinates, default coordinate.
    pub x_real: String,
    pub x_finite: Vec<String>,
    pub x_default: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            group: "adele".into(),
            prime: None,
            primes: DEFAULT_PRIMES.to_vec(),
            alpha: "1".into(),
            beta: None,
            window: "gaussian".into(),
            dual: "auto".into(),
            dual_path: None,
            test_window: None,
            trunc_height: 5,
            trunc_denom_exp: 3,
            tol: 1e-8,
            residual_tol: 1e-6,
            output: "json".into(),
            out: None,
            save_dual: None,
            seed: 0,
            densities: vec![0.5, 0.8, 0.9, 0.95, 0.99, 1.0],
            s: 2.0,
            t: 2.0,
            q: "0".into(),
            r: "0".into(),
            x_real: "0".into(),
            x_finite: Vec::new(),
            x_default: "0".into(),
        }
    }
}

/// Parses `a/b` or an integer exactly, `sqrt:x` as a double, and any other
/// decimal as a double promoted to an exact fraction when within `1e-12`.
pub fn parse_coord(s: &str) -> Result<RealCoord> {
    let s = s.trim();
    if let Some(x) = s.strip_prefix("sqrt:") {
        let v = parse_coord(x)?.to_f64();
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!("cannot take sqrt of '{x}'")));
        }
        return Ok(RealCoord::promote(v.sqrt()));
    }
    if let Some(q) = fraction_literal(s) {
        return Ok(RealCoord::Exact(q));
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(RealCoord::promote)
        .ok_or_else(|| Error::InvalidArgument(format!("cannot parse number '{s}'")))
}

/// `a/b` or an integer; decimals are not fraction literals.
fn fraction_literal(s: &str) -> Option<crate::arith::Rational> {
    if s.contains(['.', 'e', 'E']) {
        return None;
    }
    parse_rational(s).ok()
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.tol > 0.0) || !(self.residual_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !matches!(self.output.as_str(), "json" | "csv") {
            return bad(format!("unknown output format '{}'", self.output));
        }
        if !matches!(self.dual.as_str(), "auto" | "self" | "file") {
            return bad(format!("unknown dual mode '{}'", self.dual));
        }
        if self.dual == "file" && self.dual_path.is_none() {
            return bad("--dual file needs --dual-path".into());
        }
        Truncation::new(self.trunc_height, self.trunc_denom_exp)?;
        for &p in &self.primes {
            Prime::new(p)?;
        }
        Ok(())
    }

    pub fn group(&self) -> Result<GroupSelector> {
        GroupSelector::parse(&self.group, self.prime)
    }

    pub fn truncation(&self) -> Result<Truncation> {
        Truncation::new(self.trunc_height, self.trunc_denom_exp)
    }

    pub fn window(&self) -> Result<Window> {
        Window::parse(&self.window)
    }

    pub fn alpha(&self) -> Result<RealCoord> {
        parse_coord(&self.alpha)
    }

    pub fn beta(&self) -> Result<RealCoord> {
        match &self.beta {
            Some(b) => parse_coord(b),
            None if self.subcommand == "pair" => self.alpha()?.recip(),
            None => self.alpha(),
        }
    }

    pub fn lattice(&self) -> Result<AdelicTFLattice> {
        let primes = self.primes.iter().map(|&p| Prime::new(p)).collect::<Result<Vec<_>>>()?;
        Ok(AdelicTFLattice::from_coords(self.group()?, self.alpha()?, self.beta()?)?.with_primes(primes))
    }

    /// Notes on inputs that were read as exact fractions.
    pub fn annotations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut note = |name: &str, raw: &str| {
            if let Ok(RealCoord::Exact(q)) = parse_coord(raw) {
                if fraction_literal(raw.trim()).is_none() {
                    out.push(format!("{name}={raw} promoted to exact {}", fmt_rational(&q)));
                }
            }
        };
        note("alpha", &self.alpha);
        if let Some(b) = &self.beta {
            note("beta", b);
        }
        out
    }
}
