//! Murmuration densities for holomorphic newforms of odd prime-power level.
//!
//! The crate computes both sides of the depth-aspect murmuration comparison:
//!
//! * the finite, root-number-weighted average of normalized Hecke eigenvalues
//!   over a window of primes, evaluated through an explicit Eichler-Selberg
//!   trace formula (Skoruppa-Zagier variant) with exact Hurwitz class numbers
//!   behind every `L(1, psi_D)`;
//! * the limiting density, an oscillatory integral of Chebyshev polynomials
//!   weighted by Euler products, evaluated by singularity-aware quadrature.
//!
//! Module layout mirrors the mathematical pipeline: [`arith`] (integer
//! primitives), [`lfunc`] (characters, class numbers, L-values, Euler
//! products), [`trace`] (two independent trace evaluations), [`density`]
//! (the limiting integral), [`empirical`] (finite sums and diagnostics).

pub mod arith;
pub mod density;
pub mod empirical;
pub mod error;
pub mod lfunc;
pub mod trace;

pub use error::{Error, Result};
