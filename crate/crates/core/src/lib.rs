//! Dense-simulation laboratory for the local factorisation of unitary cocycles generated by
//! time-dependent spin Hamiltonians.
//!
//! The crate builds `U_Λ(t,s)`, the patch cocycles `U_X ⊗ U_{Λ∖X}` and the surface
//! cocycles living near the cut `∂X`, measures how far the factorised product is from the
//! true evolution, and evaluates the analytic bounds that control that distance.

pub mod bounds;
pub mod decay;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod interactions;
pub mod linalg;

pub use error::{Error, Result};
