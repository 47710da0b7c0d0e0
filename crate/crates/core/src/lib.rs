//! Regularized propagation of Kepler, Manev and J2 dynamics in redundant
//! projective coordinates `(q, u, p, p_u)`, together with closed-form flows,
//! state transition matrices and an adaptive Dormand-Prince integrator.
//!
//! Positions are written `r = u^n |q|^m q`; the default member of the family
//! is `n = m = -1`, for which `r = q̂ / u` and the unperturbed motion is
//! linear in the fictitious parameters `s` (`dt = r² ds`) and `τ` (`dτ = ℓ ds`).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod dynamics;
pub mod elements;
mod error;
pub mod perturbations;
pub mod projective;
pub mod propagator;
pub mod so3;
pub mod stm;

pub use error::{Error, Result};
pub use so3::{Mat3, Vec3};
