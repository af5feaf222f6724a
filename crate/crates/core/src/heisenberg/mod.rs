//! Coefficient algebras of the Heisenberg module and the module inner products.

mod algebra;
mod module;

pub use algebra::{
    cocycle, heisenberg_cocycle, module_action, twisted_convolve, twisted_involution, Index, ModuleAlgebraTag,
    ModuleElement, ModuleSide,
};
pub use module::{
    dual_pair_check, module_axiom_check, module_inner, projection_check, sampled_l2_norm, AxiomReport, SampleGrid,
    DualPairReport, ProjectionReport, ProjectionVerdict,
};
