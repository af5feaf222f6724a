//! Exact rational and p-adic arithmetic.
//!
//! Everything here is exact: rationals are arbitrary precision, p-adic
//! fractional parts are computed in closed form, and character values on the
//! p-adic side are kept as exact elements of a cyclotomic field.

mod cyclotomic;
mod padic;
mod phase;
mod primes;
mod pruefer;
mod rational;

pub use cyclotomic::CyclotomicNumber;
pub use padic::{
    crt_congruence_solve, in_zp, padic_abs, padic_fractional_part, padic_valuation,
    prime_pow, product_formula_defect, Valuation,
};
pub use phase::Phase;
pub use primes::{factor_u64, is_prime, prime_factors, Prime};
pub use pruefer::{pruefer_char_eval, PrueferElement};
pub use rational::{
    approximate_rational, fmt_rational, frac_mod1, parse_rational, rational_from_f64_exact,
    RealCoord, Rational,
};
