//! Quadratic discriminant characters psi_D, exact Hurwitz-Kronecker class
//! numbers, the special values L(1, psi_D), local character averages, and
//! the Euler products they generate.

mod discriminant;
mod euler;
mod hurwitz;
mod lvalue;
mod psi_tilde;

pub use discriminant::{decompose_discriminant, DiscriminantChar};
pub use euler::{
    l1_psi_tilde_at_one, l1_psi_tilde_ellt, l_psi_tilde1, p_factor, theorem_product,
    two_adic_factor, zeta_real,
    EulerEval, EulerProductCache, TZeroConvention, ZETA2,
};
pub use hurwitz::{build_hurwitz_table, direct_hurwitz, HurwitzTable};
pub use lvalue::{l1_class_number, l1_psi, l1_truncated, L1Method, TruncatedL1};
pub use psi_tilde::psi_tilde_local;
