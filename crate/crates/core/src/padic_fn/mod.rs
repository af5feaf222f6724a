//! Locally constant, compactly supported functions on `Q_p`.
//!
//! A test function is a finite sum `sum_j c_j e^{-2 pi i {r_j t}_p} 1_{B_j}(t)`
//! with exact cyclotomic coefficients, so integrals and inner products are
//! exact.

mod ball;
mod function;
mod s0;

pub use ball::PAdicBall;
pub use function::{char_ball_integral, inner_product_padic, tf_shift_padic, PAdicTerm, PAdicTestFunction};
pub use s0::{s0_norm, s0_norm_qp, S0ZpSeries};
