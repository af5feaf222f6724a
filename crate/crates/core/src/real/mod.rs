//! Gabor analysis on the real line.

mod dual;
mod grid;
mod inner;
mod lattice;
mod quad;
mod window;
mod zak;

pub use dual::{
    canonical_dual, canonical_dual_detailed, frame_bounds, synthesize, tight_window, tight_window_detailed,
    wexler_raz_residual_real, DerivedWindow, DualMethod, DEFAULT_GRID_DENSITY,
};
pub use grid::{frame_bounds_grid, frame_operator_deviation, least_squares, GridFrameOperator, ReferenceGrid};
pub use inner::{inner_product_real, norm_sq, shape_correlation, tf_inner_product_real, tf_tail_bound};
pub use lattice::{
    janssen_coefficients, lattice_order, neumaier_sum, neumaier_sum_complex, square, CoefficientSequence,
    RectLattice, MAX_DENSITY_DENOMINATOR,
};
pub use quad::integrate;
pub use window::{Atom, CompiledWindow, Shape, Window, GAUSSIAN_RADIUS, MAX_BSPLINE_ORDER};
pub use zak::{frame_bounds_rational, FrameBounds, Walnut, NOT_A_FRAME_RATIO};
