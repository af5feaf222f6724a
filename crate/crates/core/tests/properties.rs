use adelic_gabor::adelic::{
    character_pair, fundamental_domain_reduce, in_fundamental_domain, lattice_embed, AdelicPoint, AdelicTFLattice,
    GroupSelector,
};
use adelic_gabor::arith::{in_zp, padic_fractional_part, CyclotomicNumber, Prime, Rational, RealCoord};
use adelic_gabor::cli::fmt_g17;
use adelic_gabor::heisenberg::{twisted_convolve, twisted_involution, ModuleAlgebraTag, ModuleElement, ModuleSide};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11]).prop_map(|p| Prime::new(p).unwrap())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-5000i64..5000, 1i64..3000).prop_map(|(n, d)| rat(n, d))
}

type Terms = Vec<(i64, i64, i64, i64, f64, f64)>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((-3i64..=3, 1i64..=2, -3i64..=3, 1i64..=2, -1.0f64..1.0, -1.0f64..1.0), 1..5)
}

fn build(side: ModuleSide, terms: &Terms) -> ModuleElement {
    let lat = AdelicTFLattice::new(GroupSelector::Adele, 0.5, 1.0).unwrap();
    let tag = ModuleAlgebraTag::new(side, lat);
    terms.iter().fold(ModuleElement::zero(tag.clone()), |acc, &(qn, qd, rn, rd, re, im)| {
        let d = ModuleElement::delta(tag.clone(), (rat(qn, qd), rat(rn, rd)), Complex64::new(re, im));
        acc.add(&d).unwrap()
    })
}

fn side() -> impl Strategy<Value = ModuleSide> {
    prop::sample::select(vec![ModuleSide::LeftA, ModuleSide::RightB])
}

fn max_gap(a: &ModuleElement, b: &ModuleElement) -> f64 {
    a.coeffs
        .keys()
        .chain(b.coeffs.keys())
        .map(|k| (a.get(k) - b.get(k)).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn fractional_part_is_the_polar_part(x in rational(), p in prime()) {
        let f = padic_fractional_part(&x, p);
        prop_assert!(!f.is_negative() && f < Rational::one());
        prop_assert!(in_zp(&(&x - &f), p));
        let mut den = f.denom().clone();
        while (&den % BigInt::from(p.get())).is_zero() {
            den /= BigInt::from(p.get());
        }
        prop_assert!(den.is_one());
    }

    #[test]
    fn fractional_part_is_additive_mod_one(x in rational(), y in rational(), p in prime()) {
        let lhs = padic_fractional_part(&(&x + &y), p);
        let rhs = padic_fractional_part(&x, p) + padic_fractional_part(&y, p);
        prop_assert!((rhs - lhs).is_integer());
    }

    #[test]
    fn pairing_is_bilinear(q1 in rational(), q2 in rational(), r in rational(), a in 1i64..50, b in 1i64..50) {
        let g = GroupSelector::Adele;
        let alpha = RealCoord::Exact(rat(a, b));
        let beta = RealCoord::Exact(rat(b, a + 1));
        let x1 = lattice_embed(g, &alpha, &q1).unwrap();
        let x2 = lattice_embed(g, &alpha, &q2).unwrap();
        let y = lattice_embed(g, &beta, &r).unwrap();
        let joint = character_pair(&x1.add(&x2), &y, g);
        let split = character_pair(&x1, &y, g).mul(&character_pair(&x2, &y, g));
        prop_assert!(joint.mul(&split.conj()).is_exactly_one());
        let swapped = character_pair(&y, &x1, g);
        prop_assert!(swapped.mul(&character_pair(&x1, &y, g).conj()).is_exactly_one());
    }

    #[test]
    fn roots_of_unity_multiply(s in -200i64..200, t in -200i64..200, e in 0u32..4, p in prime()) {
        let den = (p.get() as i64).pow(e);
        let z = |n: i64| CyclotomicNumber::root_of_unity(p, &rat(n, den)).unwrap();
        prop_assert_eq!(z(s).mul(&z(t)), z(s + t));
        prop_assert_eq!(z(s).conj(), z(-s));
    }

    #[test]
    fn reduction_round_trips_on_r_x_qp(p in prime(), n in -10_000i64..10_000, e in 0u32..4, frac in 0i64..97) {
        let g = GroupSelector::RealXQp(p);
        let alpha = RealCoord::Exact(rat(7, 3));
        let q = rat(n, (p.get() as i64).pow(e));
        let b = AdelicPoint::new(RealCoord::Exact(rat(7 * frac, 3 * 97)), [(p, rat(n.rem_euclid(13), 1))].into());
        prop_assert!(in_fundamental_domain(&b, &alpha));
        let x = b.add(&lattice_embed(g, &alpha, &q).unwrap());
        let (b2, q2) = fundamental_domain_reduce(&x, &alpha, g).unwrap();
        prop_assert_eq!(q2, q);
        prop_assert_eq!(b2, b);
    }

    #[test]
    fn involution_reverses_products(s in side(), a in terms(), b in terms()) {
        let (a, b) = (build(s, &a), build(s, &b));
        let lhs = twisted_involution(&twisted_convolve(&a, &b).unwrap()).unwrap();
        let rhs = twisted_convolve(&twisted_involution(&b).unwrap(), &twisted_involution(&a).unwrap()).unwrap();
        prop_assert!(max_gap(&lhs, &rhs) < 1e-12);
        let back = twisted_involution(&twisted_involution(&a).unwrap()).unwrap();
        prop_assert!(max_gap(&back, &a) < 1e-15);
    }

    #[test]
    fn convolution_is_associative(s in side(), a in terms(), b in terms(), c in terms()) {
        let (a, b, c) = (build(s, &a), build(s, &b), build(s, &c));
        let left = twisted_convolve(&twisted_convolve(&a, &b).unwrap(), &c).unwrap();
        let right = twisted_convolve(&a, &twisted_convolve(&b, &c).unwrap()).unwrap();
        prop_assert!(max_gap(&left, &right) < 1e-12);
    }

    #[test]
    fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_g17(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
