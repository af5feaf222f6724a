//! Gabor analysis on `R x Q_p` and on the adeles.
//!
//! Windows are separable, so every time-frequency inner product factors into
//! a real factor and exact p-adic factors.

mod group;
mod lattice;
mod scan;
mod window;
mod wr;

pub use group::{
    character_pair, fundamental_domain_measure, fundamental_domain_reduce, in_fundamental_domain, lattice_embed,
    AdelicPoint, GroupSelector,
};
pub use lattice::{tf_inner_product_group, AdelicTFLattice, GroupInner, DEFAULT_PRIMES};
pub use scan::{balian_low_scan, mixed_norm, modulation_norm, BalianLowRow, ModulationNorm, ScanOptions};
pub use window::{SeparableSum, SeparableWindow};
pub use wr::{
    certified_enumeration, conventions, enumerate_indices, index_order, local_resolution, theorem_equivalence_suite, wexler_raz_check,
    Assertion, Enumeration, EquivalenceReport, Truncation, Verdict, WexlerRazReport, WrRow, MAX_AUTO_HEIGHT, MAX_GRID_ROWS,
    ROW_AGREEMENT_TOL,
};
pub(crate) use wr::omitted_rows_bound;
