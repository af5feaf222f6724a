use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use adelic_gabor::adelic::{
    balian_low_scan, character_pair, fundamental_domain_reduce, in_fundamental_domain, lattice_embed,
    theorem_equivalence_suite, AdelicPoint, AdelicTFLattice, GroupSelector, ScanOptions, SeparableWindow, Truncation,
};
use adelic_gabor::arith::{product_formula_defect, CyclotomicNumber, Prime, Rational, RealCoord};
use adelic_gabor::cli::{self, random_gaussian_combo, RunConfig};
use adelic_gabor::heisenberg::{
    dual_pair_check, module_axiom_check, module_inner, projection_check, ModuleSide, ProjectionVerdict,
};
use adelic_gabor::padic_fn::{char_ball_integral, PAdicBall};
use adelic_gabor::real::{self, DualMethod, RectLattice, Window};
use adelic_gabor::Error;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn ipow(p: i128, e: u32) -> i128 {
    p.pow(e)
}

fn mod_inv(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {m}");
    s0.rem_euclid(m)
}

fn valuation(mut n: i128, p: i128) -> u32 {
    let mut e = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// `{n/d}_p = a / p^e` for `d > 0`, not necessarily reduced.
fn frac_p(n: i128, d: i128, p: i128) -> (i128, u32) {
    let e = valuation(d, p);
    let pe = ipow(p, e);
    let m = d / pe;
    ((n.rem_euclid(pe) * mod_inv(m, pe)).rem_euclid(pe), e)
}

fn random_fraction(rng: &mut ChaCha8Rng, max_num: i128, max_den: i128) -> (i128, i128) {
    (rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

/// Sums `e^{2 pi i {r t}_p}` over the cosets of `p^m Z_p` in `c + p^k Z_p`, with
/// `m` fine enough that the integrand is constant on each, and evaluates the sum
/// exactly: a single repeated root of unity, or a multiset of roots invariant
/// under rotation by `1/p`, which sums to zero.
fn coset_oracle(p: i128, r: (i128, i128), c: (i128, i128), k: i64) -> Result<Option<(Rational, Rational)>, String> {
    let (rn, rd) = r;
    let (cn, cd) = c;
    let v = if rn == 0 { i64::MIN / 2 } else { valuation(rn, p) as i64 - valuation(rd, p) as i64 };
    let m = k.max(-v);
    let cosets = ipow(p, (m - k) as u32);
    let (pkn, pkd) = if k >= 0 { (ipow(p, k as u32), 1) } else { (1, ipow(p, (-k) as u32)) };
    let d = rd * cd * pkd;
    let e = valuation(d, p);
    let pe = ipow(p, e);
    let inv = mod_inv(d / pe, pe);
    let mut hist: HashMap<i128, u64> = HashMap::new();
    for j in 0..cosets {
        let n = rn * (cn * pkd + j * pkn * cd);
        *hist.entry((n.rem_euclid(pe) * inv).rem_euclid(pe)).or_default() += 1;
    }
    let measure = if k >= 0 { rat(1, ipow(p, k as u32)) } else { rat(ipow(p, (-k) as u32), 1) };
    if hist.len() == 1 {
        let (&a, _) = hist.iter().next().unwrap();
        return Ok(Some((rat(a, pe), measure)));
    }
    let shift = pe / p;
    for (&a, &count) in &hist {
        if hist.get(&(a + shift).rem_euclid(pe)) != Some(&count) {
            return Err(format!("coset sum for p={p} r={rn}/{rd} c={cn}/{cd} k={k} is neither constant nor balanced"));
        }
    }
    Ok(None)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut zero, mut nonzero) = (0, 0);
    for p in [2i128, 3, 5] {
        let pp = prime(p as u64);
        for _ in 0..200 {
            let r = random_fraction(&mut rng, 300, ipow(p, 5));
            let c = random_fraction(&mut rng, 300, ipow(p, 5));
            let k = rng.gen_range(-4i64..=4);
            let got = char_ball_integral(&rat(r.0, r.1), &PAdicBall::new(pp, &rat(c.0, c.1), k));
            let ok = match coset_oracle(p, r, c, k)? {
                Some((turns, measure)) => {
                    nonzero += 1;
                    got == CyclotomicNumber::root_of_unity(pp, &turns).map_err(err)?.scale(&measure)
                }
                None => {
                    zero += 1;
                    got.is_zero()
                }
            };
            ensure(ok, || format!("p={p} r={}/{} c={}/{} k={k}: got {got:?}", r.0, r.1, c.0, c.1))?;
        }
    }
    Ok(format!("600 exact matches ({nonzero} nonzero, {zero} zero)"))
}

fn prime_powers(mut d: i128) -> Vec<(i128, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= d {
        if d % p == 0 {
            let e = valuation(d, p);
            d /= ipow(p, e);
            out.push((p, e));
        }
        p += 1;
    }
    if d > 1 {
        out.push((d, 1));
    }
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let (n, d) = random_fraction(&mut rng, 1_000_000_000, 1_000_000);
        let x = rat(n, d);
        let mut rest = x.clone();
        for (p, _) in prime_powers(d) {
            let (a, e) = frac_p(n, d, p);
            rest -= rat(a, ipow(p, e));
        }
        ensure(rest.is_integer(), || format!("oracle defect of {x} is {rest}"))?;
        let got = product_formula_defect(&x).map_err(err)?;
        ensure(got == rest.to_integer(), || format!("defect of {x}: got {got}, oracle {rest}"))?;
    }
    for _ in 0..200 {
        let (qn, qd) = random_fraction(&mut rng, 1000, 1000);
        let (rn, rd) = random_fraction(&mut rng, 1000, 1000);
        let an = rng.gen_range(1..=1000) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let alpha = rat(an, rng.gen_range(1..=1000));
        let x = lattice_embed(GroupSelector::Adele, &RealCoord::Exact(alpha.clone()), &rat(qn, qd)).map_err(err)?;
        let y = lattice_embed(GroupSelector::Adele, &RealCoord::Exact(alpha.recip()), &rat(rn, rd)).map_err(err)?;
        let ph = character_pair(&x, &y, GroupSelector::Adele);
        ensure(ph.is_exactly_one(), || format!("pairing of {qn}/{qd}, {rn}/{rd} at alpha {alpha} is {ph:?}"))?;
    }
    Ok("1000 integral defects, 200 trivial pairings".into())
}

fn random_integral_point(rng: &mut ChaCha8Rng, alpha: &RealCoord) -> AdelicPoint {
    let a = alpha.to_f64();
    let real = match alpha {
        RealCoord::Exact(q) => RealCoord::Exact(q * rat(rng.gen_range(0..1000), 1000)),
        RealCoord::Approx(_) => RealCoord::Approx(rng.gen_range(0.0..a)),
    };
    let mut finite = BTreeMap::new();
    for p in [2u64, 3, 5, 7, 11] {
        if rng.gen_bool(0.6) {
            let den = [1i128, 3, 7, 13][rng.gen_range(0..4)];
            let den = if den as u64 == p { 1 } else { den };
            finite.insert(prime(p), rat(rng.gen_range(-500..500), den));
        }
    }
    AdelicPoint::with_default(real, finite, rat(rng.gen_range(-5..5), 1)).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alphas = [RealCoord::Exact(rat(3, 7)), RealCoord::Exact(rat(5, 2)), RealCoord::Approx(2f64.sqrt())];
    let (mut worst, mut violations) = (0.0f64, 0usize);
    for i in 0..100 {
        let alpha = &alphas[i % alphas.len()];
        let b = random_integral_point(&mut rng, alpha);
        ensure(in_fundamental_domain(&b, alpha), || format!("sampled point {b:?} is not in the domain"))?;
        let (qn, qd) = random_fraction(&mut rng, 2000, 2000);
        let q = rat(qn, qd);
        let x = b.add(&lattice_embed(GroupSelector::Adele, alpha, &q).map_err(err)?);
        let (b2, q2) = fundamental_domain_reduce(&x, alpha, GroupSelector::Adele).map_err(err)?;
        ensure(q2 == q, || format!("reduce returned q={q2}, expected {q}"))?;
        ensure(b2.finite_eq(&b), || format!("finite part of {b:?} came back as {b2:?}"))?;
        worst = worst.max((b2.real.to_f64() - b.real.to_f64()).abs());
        for _ in 0..5 {
            let (sn, sd) = random_fraction(&mut rng, 50, 12);
            if sn == 0 {
                continue;
            }
            let other = b.add(&lattice_embed(GroupSelector::Adele, alpha, &rat(sn, sd)).map_err(err)?);
            if in_fundamental_domain(&other, alpha) {
                violations += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("real part error {worst:e}"))?;
    ensure(violations == 0, || format!("{violations} uniqueness violations"))?;
    Ok(format!("100 round trips, real error {worst:.1e}, 0 uniqueness violations"))
}

fn gaussian_dual(alpha: f64, beta: f64) -> Result<Window, String> {
    real::canonical_dual(&Window::Gaussian, &RectLattice::new(alpha, beta).map_err(err)?, DualMethod::Neumann, 1e-12)
        .map_err(err)
}

fn criterion_4() -> Outcome {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let h = gaussian_dual(a, a)?;
    let suite = theorem_equivalence_suite(&Window::Gaussian, &h, a, a, prime(2), Truncation::new(5, 3).unwrap(), 1e-8)
        .map_err(err)?;
    let mut worst: f64 = 0.0;
    for rep in &suite.reports {
        worst = worst.max(rep.integer_max_residual);
        let stray = rep.rows.iter().filter(|r| !r.is_integer() && !r.exact_zero).count();
        ensure(stray == 0, || format!("{}: {stray} non-integer rows not exactly zero", rep.group))?;
    }
    ensure(worst < 1e-8, || format!("integer-row residual {worst:e}"))?;
    let verdicts: Vec<_> = suite.reports.iter().map(|r| r.verdict).collect();
    ensure(verdicts.iter().all(|v| *v == verdicts[0]), || format!("verdicts differ: {verdicts:?}"))?;
    let failed: Vec<_> = suite.assertions.iter().filter(|a| !a.passed).map(|a| a.name).collect();
    ensure(failed.is_empty(), || format!("failed assertions {failed:?}"))?;
    let rows: usize = suite.reports.iter().map(|r| r.rows.len()).sum();
    Ok(format!("max integer residual {worst:.2e}, {rows} rows, verdicts {:?}", verdicts[0]))
}

fn criterion_5() -> Outcome {
    let g = Window::new_box(1.0).map_err(err)?;
    let fb = real::frame_bounds(&g, &RectLattice::new(1.0, 1.0).map_err(err)?, real::DEFAULT_GRID_DENSITY).map_err(err)?;
    ensure((fb.lower - 1.0).abs() <= 1e-10 && (fb.upper - 1.0).abs() <= 1e-10, || {
        format!("frame bounds {} {}", fb.lower, fb.upper)
    })?;
    let suite = theorem_equivalence_suite(&g, &g, 1.0, 1.0, prime(2), Truncation::new(5, 3).unwrap(), 1e-12)
        .map_err(err)?;
    let worst = suite.reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    ensure(worst < 1e-12 && suite.passed, || format!("equivalence residual {worst:e}, passed {}", suite.passed))?;
    let lat = AdelicTFLattice::new(GroupSelector::Adele, 1.0, 1.0).map_err(err)?;
    let proj = projection_check(&g, &lat, Truncation::new(5, 3).unwrap(), 1e-12).map_err(err)?;
    let idem = proj.idempotency_residual.unwrap_or(f64::INFINITY);
    ensure(idem < 1e-12 && proj.verdict == ProjectionVerdict::Projection, || {
        format!("idempotency {idem:e}, verdict {:?}", proj.verdict)
    })?;
    Ok(format!("bounds [{}, {}], residual {worst:.1e}, idempotency {idem:.1e}", fb.lower, fb.upper))
}

fn criterion_6() -> Outcome {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let lat = AdelicTFLattice::new(GroupSelector::Adele, a, a).map_err(err)?;
    let g = SeparableWindow::from_real(Window::Gaussian);
    let h = SeparableWindow::from_real(gaussian_dual(a, a)?);
    let f = SeparableWindow::from_real(Window::Gaussian.tf_shift(0.37, -0.21));
    let rep = dual_pair_check(&f, &g, &h, &lat, Truncation::new(5, 3).unwrap(), 1e-8).map_err(err)?;
    ensure(rep.frame_residual < 1e-6, || format!("reconstruction error {:e}", rep.frame_residual))?;
    ensure(rep.reconstruction_tail < 1e-8, || format!("tail {:e}", rep.reconstruction_tail))?;
    Ok(format!(
        "reconstruction error {:.1e}, tail {:.1e} at height {}",
        rep.frame_residual, rep.reconstruction_tail, rep.left_height
    ))
}

fn criterion_7() -> Outcome {
    let densities = [0.8, 0.9, 0.95, 0.99, 1.0];
    let rows = balian_low_scan(
        &Window::Gaussian,
        &densities,
        GroupSelector::Real,
        Truncation::new(5, 3).unwrap(),
        ScanOptions { compute_duals: false, ..ScanOptions::default() },
    )
    .map_err(err)?;
    let lowers: Vec<f64> = rows.iter().map(|r| r.lower.unwrap_or(f64::NAN)).collect();
    ensure(lowers[..4].windows(2).all(|w| w[1] < w[0]), || format!("lower bounds {lowers:?}"))?;
    let last = &rows[4];
    ensure(last.lower_refined.len() >= 2 && last.lower_refined.iter().all(|&l| l < 1e-2), || {
        format!("refined lower bounds at density 1: {:?}", last.lower_refined)
    })?;
    match real::canonical_dual(&Window::Gaussian, &RectLattice::new(1.0, 1.0).map_err(err)?, DualMethod::Neumann, 1e-8) {
        Err(Error::NotAFrame { .. }) => {}
        other => return Err(format!("canonical dual at density 1 returned {other:?}")),
    }
    Ok(format!("lower bounds {:?}, refined at 1: {:?}", &lowers[..4], last.lower_refined))
}

fn criterion_8() -> Outcome {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let lat = AdelicTFLattice::new(GroupSelector::Adele, a, a).map_err(err)?;
    let trunc = Truncation::new(5, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let triples: Vec<[SeparableWindow; 3]> = (0..20)
        .map(|_| {
            let mut w = || SeparableWindow::from_real(random_gaussian_combo(&mut rng, 3));
            [w(), w(), w()]
        })
        .collect();
    let residuals = triples
        .par_iter()
        .map(|[f, g, h]| module_axiom_check(f, g, h, &lat, trunc, 1e-6).map(|r| r.residual))
        .collect::<Result<Vec<f64>, Error>>()
        .map_err(err)?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    ensure(worst < 1e-6, || format!("module identity residuals {residuals:?}"))?;

    let proj = projection_check(&Window::Gaussian, &lat, trunc, 1e-6).map_err(err)?;
    ensure(proj.verdict == ProjectionVerdict::Projection, || format!("tight Gaussian at 1/2: {:?}", proj.verdict))?;
    let critical = AdelicTFLattice::new(GroupSelector::Adele, 1.0, 1.0).map_err(err)?;
    let crit = projection_check(&Window::Gaussian, &critical, trunc, 1e-6).map_err(err)?;
    ensure(crit.verdict == ProjectionVerdict::NotAFrame, || format!("Gaussian at 1: {:?}", crit.verdict))?;

    let g = SeparableWindow::from_real(Window::Gaussian);
    let gram = module_inner(&g, &g, ModuleSide::LeftA, &lat, trunc, 1e-10).map_err(err)?;
    ensure(gram.supported_on_integers(), || "a<g, g> has a non-integer index".into())?;
    let idem = proj.idempotency_residual.unwrap_or(f64::NAN) + proj.idempotency_tail.unwrap_or(f64::NAN);
    Ok(format!(
        "max residual {worst:.1e} over 20 triples, projection defect {idem:.1e}, {} integral Gram coefficients",
        gram.coeffs.len()
    ))
}

fn criterion_9() -> Outcome {
    let base = |sub: &str| RunConfig { subcommand: sub.into(), alpha: "sqrt:1/2".into(), ..RunConfig::default() };
    let configs = [
        base("wr-check"),
        RunConfig { seed: 9, ..base("module-check") },
        base("projection-check"),
        RunConfig { output: "csv".into(), ..base("wr-check") },
    ];
    for cfg in &configs {
        let once = cli::run(cfg).map_err(err)?.render(&cfg.output);
        let twice = cli::run(cfg).map_err(err)?.render(&cfg.output);
        ensure(once == twice, || format!("{} ({}) differs between runs", cfg.subcommand, cfg.output))?;
    }
    Ok(format!("{} configurations byte-identical", configs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, f64); 9] = [
        ("exact p-adic ball integrals", criterion_1, 10.0),
        ("product formula and self-duality", criterion_2, 5.0),
        ("fundamental domain", criterion_3, f64::INFINITY),
        ("Wexler-Raz on R, R x Q_2 and the adeles", criterion_4, 60.0),
        ("orthonormal box window", criterion_5, f64::INFINITY),
        ("dual-pair reconstruction", criterion_6, f64::INFINITY),
        ("Balian-Low degradation", criterion_7, f64::INFINITY),
        ("Heisenberg module", criterion_8, f64::INFINITY),
        ("determinism", criterion_9, f64::INFINITY),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(d) if secs > *budget => Err(format!("{d}; took {secs:.1} s, budget {budget} s")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name} [{secs:.2} s]: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name} [{secs:.2} s]: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

