//! Command-line front end: configuration, dispatch and report emission.

mod config;
mod emit;

use std::collections::BTreeMap;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{parse_coord, RunConfig};
pub use emit::{fmt_g17, to_csv_flat, to_csv_table, to_json};

use crate::adelic::{
    balian_low_scan, character_pair, conventions, fundamental_domain_reduce, lattice_embed, modulation_norm,
    theorem_equivalence_suite, wexler_raz_check, AdelicPoint, ScanOptions, SeparableWindow, Verdict,
};
use crate::arith::{fmt_rational, parse_rational, Prime};
use crate::error::{Error, Result};
use crate::heisenberg::{dual_pair_check, module_axiom_check, projection_check, ProjectionVerdict};
use crate::real::{canonical_dual, DualMethod, Window};

pub const SCHEMA: &str = "adelic-gabor/1";

#[derive(Parser, Debug)]
#[command(name = "adelic-gabor", version, about = "Gabor frames on R, R x Q_p and the adeles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Wexler-Raz biorthogonality of a window and its dual over the adjoint lattice.
    WrCheck,
    /// The Wexler-Raz check on R, R x Q_p and the adeles side by side.
    Equivalence,
    /// Frame bounds and dual quality as the density approaches 1.
    BltScan,
    /// Truncated mixed modulation norm from Gabor coefficients.
    ModNorm,
    /// Reduce a point modulo the diagonal lattice into the fundamental domain.
    Reduce,
    /// Character pairing of two embedded rationals.
    Pair,
    /// Module identity and dual-pair reconstruction for the Heisenberg module.
    ModuleCheck,
    /// Whether the inner product of the tight window with itself is a projection.
    ProjectionCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::WrCheck => "wr-check",
            Command::Equivalence => "equivalence",
            Command::BltScan => "blt-scan",
            Command::ModNorm => "mod-norm",
            Command::Reduce => "reduce",
            Command::Pair => "pair",
            Command::ModuleCheck => "module-check",
            Command::ProjectionCheck => "projection-check",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Flags {
    /// JSON run configuration; replaces all other flags.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// real, rxqp or adele.
    #[arg(long, global = true, default_value = "adele")]
    pub group: String,
    #[arg(long, global = true)]
    pub prime: Option<u64>,
    /// Primes enumerated on the adeles.
    #[arg(long, global = true, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<u64>,
    /// a/b, a decimal, or sqrt:x.
    #[arg(long, global = true, default_value = "1", allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// gaussian, box:GAMMA or bspline:N.
    #[arg(long, global = true, default_value = "gaussian")]
    pub window: String,
    /// auto, self or file.
    #[arg(long, global = true, default_value = "auto")]
    pub dual: String,
    #[arg(long, global = true)]
    pub dual_path: Option<String>,
    #[arg(long, global = true)]
    pub test_window: Option<String>,
    #[arg(long, global = true, default_value_t = 5)]
    pub trunc_height: u32,
    #[arg(long, global = true, default_value_t = 3)]
    pub trunc_denom_exp: u32,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub residual_tol: f64,
    /// json or csv.
    #[arg(long, global = true, default_value = "json")]
    pub output: String,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Write the dual window used by the run here as JSON.
    #[arg(long, global = true)]
    pub save_dual: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_delimiter = ',', default_value = "0.5,0.8,0.9,0.95,0.99,1")]
    pub densities: Vec<f64>,
    #[arg(long, global = true, default_value_t = 2.0)]
    pub s: f64,
    #[arg(long, global = true, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub r: String,
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub x_real: String,
    /// Finite coordinates as p:x.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub x_finite: Vec<String>,
    #[arg(long, global = true, default_value = "0", allow_hyphen_values = true)]
    pub x_default: String,
}

impl Cli {
    pub fn run_config(&self) -> Result<RunConfig> {
        let f = &self.flags;
        let mut cfg = match &f.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Error::InvalidArgument(format!("config {path}: {e}")))?
            }
            None => RunConfig {
                subcommand: String::new(),
                group: f.group.clone(),
                prime: f.prime,
                primes: f.primes.clone(),
                alpha: f.alpha.clone(),
                beta: f.beta.clone(),
                window: f.window.clone(),
                dual: f.dual.clone(),
                dual_path: f.dual_path.clone(),
                test_window: f.test_window.clone(),
                trunc_height: f.trunc_height,
                trunc_denom_exp: f.trunc_denom_exp,
                tol: f.tol,
                residual_tol: f.residual_tol,
                output: f.output.clone(),
                out: f.out.clone(),
                save_dual: f.save_dual.clone(),
                seed: f.seed,
                densities: f.densities.clone(),
                s: f.s,
                t: f.t,
                q: f.q.clone(),
                r: f.r.clone(),
                x_real: f.x_real.clone(),
                x_finite: f.x_finite.clone(),
                x_default: f.x_default.clone(),
            },
        };
        cfg.subcommand = self.command.name().into();
        Ok(cfg)
    }
}

/// A finished run: the report, an optional table for CSV output and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub table: Option<Vec<Value>>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self, format: &str) -> String {
        match (format, &self.table) {
            ("csv", Some(rows)) => to_csv_table(rows),
            ("csv", None) => to_csv_flat(&self.report),
            _ => {
                let mut s = to_json(&self.report);
                s.push('\n');
                s
            }
        }
    }
}

/// Exit code for an error: 3 for accuracy failures, 2 for everything else.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Accuracy { .. } | Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn report(cfg: &RunConfig, verdict: &str, success: bool, result: Value) -> Outcome {
    let conv: BTreeMap<&str, &str> = conventions();
    Outcome {
        report: json!({
            "schema": SCHEMA,
            "config": value(cfg),
            "conventions": conv,
            "annotations": cfg.annotations(),
            "verdict": verdict,
            "result": result,
        }),
        table: None,
        exit_code: if success { 0 } else { 1 },
    }
}

fn kebab<T: Serialize>(x: &T) -> String {
    value(x).as_str().unwrap_or_default().to_string()
}

/// `Ok(None)` when the window does not generate a frame.
fn resolve_dual(cfg: &RunConfig, g: &Window, lat: &crate::adelic::AdelicTFLattice) -> Result<Option<Window>> {
    let h = match cfg.dual.as_str() {
        "self" => g.clone(),
        "file" => {
            let path = cfg.dual_path.as_deref().unwrap_or_default();
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{path}: {e}")))?;
            Window::from_json(&v)?
        }
        _ => match canonical_dual(g, &lat.real_lattice()?, DualMethod::Neumann, cfg.tol * 1e-2) {
            Ok(h) => h,
            Err(Error::NotAFrame { .. }) => return Ok(None),
            Err(e) => return Err(e),
        },
    };
    if let Some(path) = &cfg.save_dual {
        std::fs::write(path, to_json(&value(&h))).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    }
    Ok(Some(h))
}

fn not_a_frame(cfg: &RunConfig, lat: &crate::adelic::AdelicTFLattice) -> Outcome {
    report(cfg, "not-a-frame", false, json!({ "lattice": value(lat), "density": lat.density() }))
}

/// A Gaussian combination of `terms` atoms with random shifts, frequencies and coefficients.
pub fn random_gaussian_combo(rng: &mut impl Rng, terms: usize) -> Window {
    let parts: Vec<(Complex64, f64, f64)> = (0..terms)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let refs: Vec<(Complex64, f64, f64, &Window)> = parts.iter().map(|&(c, a, b)| (c, a, b, &Window::Gaussian)).collect();
    Window::combo(&refs)
}

fn parse_point(cfg: &RunConfig) -> Result<AdelicPoint> {
    let mut finite = BTreeMap::new();
    for item in &cfg.x_finite {
        let (p, x) = item
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("finite coordinate '{item}' is not p:x")))?;
        let p = p.trim().parse::<u64>().map_err(|_| Error::InvalidArgument(format!("bad prime in '{item}'")))?;
        finite.insert(Prime::new(p)?, parse_rational(x)?);
    }
    AdelicPoint::with_default(parse_coord(&cfg.x_real)?, finite, parse_rational(&cfg.x_default)?)
}

/// Runs one configured subcommand.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let trunc = cfg.truncation()?;
    match cfg.subcommand.as_str() {
        "wr-check" => {
            let lat = cfg.lattice()?;
            let g = cfg.window()?;
            let Some(h) = resolve_dual(cfg, &g, &lat)? else {
                return Ok(not_a_frame(cfg, &lat));
            };
            let rep = wexler_raz_check(&SeparableWindow::from_real(g), &SeparableWindow::from_real(h), &lat, trunc, cfg.tol)?;
            let mut out = report(cfg, &kebab(&rep.verdict), rep.verdict == Verdict::Dual, value(&rep));
            out.table = Some(rep.rows.iter().map(value).collect());
            Ok(out)
        }
        "equivalence" => {
            let lat = cfg.lattice()?;
            let g = cfg.window()?;
            let Some(h) = resolve_dual(cfg, &g, &lat)? else {
                return Ok(not_a_frame(cfg, &lat));
            };
            let p = Prime::new(cfg.prime.unwrap_or(2))?;
            let rep = theorem_equivalence_suite(&g, &h, lat.alpha.to_f64(), lat.beta.to_f64(), p, trunc, cfg.tol)?;
            let verdict = if rep.passed { "equivalent" } else { "not-equivalent" };
            let mut out = report(cfg, verdict, rep.passed, value(&rep));
            out.table = Some(
                rep.reports
                    .iter()
                    .flat_map(|r| {
                        r.rows.iter().map(move |row| {
                            let mut v = value(row);
                            v["group"] = json!(r.group.to_string());
                            v
                        })
                    })
                    .collect(),
            );
            Ok(out)
        }
        "blt-scan" => {
            let opts = ScanOptions { tol: cfg.tol, ..ScanOptions::default() };
            let rows = balian_low_scan(&cfg.window()?, &cfg.densities, cfg.group()?, trunc, opts)?;
            let mut out = report(cfg, "scanned", true, json!({ "rows": value(&rows) }));
            out.table = Some(rows.iter().map(value).collect());
            Ok(out)
        }
        "mod-norm" => {
            let lat = cfg.lattice()?;
            let f = SeparableWindow::from_real(cfg.window()?);
            let g = SeparableWindow::from_real(Window::parse(cfg.test_window.as_deref().unwrap_or("gaussian"))?);
            let m = modulation_norm(&f, &g, &lat, cfg.s, cfg.t, trunc, cfg.tol)?;
            let ok = m.tail_bound.is_finite();
            Ok(report(cfg, if ok { "certified" } else { "uncertified" }, ok, value(&m)))
        }
        "reduce" => {
            let x = parse_point(cfg)?;
            let alpha = cfg.alpha()?;
            let group = cfg.group()?;
            let (b, q) = fundamental_domain_reduce(&x, &alpha, group)?;
            let back = b.add(&lattice_embed(group, &alpha, &q)?);
            let result = json!({
                "x": value(&x),
                "b": value(&b),
                "q": fmt_rational(&q),
                "finite_round_trip": back.finite_eq(&x),
                "real_round_trip_error": (back.real.to_f64() - x.real.to_f64()).abs(),
            });
            Ok(report(cfg, "reduced", true, result))
        }
        "pair" => {
            let group = cfg.group()?;
            let (q, r) = (parse_rational(&cfg.q)?, parse_rational(&cfg.r)?);
            let x = lattice_embed(group, &cfg.alpha()?, &q)?;
            let y = lattice_embed(group, &cfg.beta()?, &r)?;
            let phase = character_pair(&x, &y, group);
            let z = phase.to_complex();
            let verdict = if phase.is_exactly_one() { "trivial" } else { "nontrivial" };
            let result = json!({
                "x": value(&x),
                "y": value(&y),
                "phase": value(&phase),
                "exactly_one": phase.is_exactly_one(),
                "value": [z.re, z.im],
            });
            Ok(report(cfg, verdict, true, result))
        }
        "module-check" => {
            let lat = cfg.lattice()?;
            let g_r = cfg.window()?;
            let Some(h_r) = resolve_dual(cfg, &g_r, &lat)? else {
                return Ok(not_a_frame(cfg, &lat));
            };
            let f_r = match &cfg.test_window {
                Some(w) => Window::parse(w)?,
                None => random_gaussian_combo(&mut ChaCha8Rng::seed_from_u64(cfg.seed), 3),
            };
            let (f, g, h) = (SeparableWindow::from_real(f_r), SeparableWindow::from_real(g_r), SeparableWindow::from_real(h_r));
            let axiom = module_axiom_check(&f, &g, &h, &lat, trunc, cfg.tol)?;
            let pair = dual_pair_check(&f, &g, &h, &lat, trunc, cfg.tol)?;
            let ok = axiom.residual < cfg.residual_tol && pair.is_dual && pair.frame_residual < cfg.residual_tol;
            let verdict = if ok { "module-identities-hold" } else { "module-identities-fail" };
            Ok(report(cfg, verdict, ok, json!({ "axiom": value(&axiom), "dual_pair": value(&pair), "test_function": value(&f) })))
        }
        "projection-check" => {
            let lat = cfg.lattice()?;
            let rep = projection_check(&cfg.window()?, &lat, trunc, cfg.tol)?;
            let ok = rep.verdict == ProjectionVerdict::Projection;
            Ok(report(cfg, &kebab(&rep.verdict), ok, value(&rep)))
        }
        other => Err(Error::InvalidArgument(format!("unknown subcommand '{other}'"))),
    }
}

/// Parses the process arguments, runs, writes the report and returns the exit code.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.run_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let text = outcome.render(&cfg.output);
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {path}: {e}");
                return 2;
            }
        }
        None => print!("{text}"),
    }
    outcome.exit_code
}
