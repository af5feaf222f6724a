//! Gabor frames on the real line, on `R x Q_p` and on the rational adeles.
//!
//! The p-adic side is computed exactly (rationals, closed-form fractional
//! parts, cyclotomic coefficients); the real side is numerical with explicit
//! error and truncation bounds.

pub mod adelic;
pub mod arith;
pub mod cli;
pub mod error;
pub mod heisenberg;
pub mod padic_fn;
pub mod real;

pub use error::{Error, Result};
