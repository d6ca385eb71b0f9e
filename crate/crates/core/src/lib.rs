//! Solenoidal Hermite spectral machinery for the micro-scale zero-set
//! structure of Stokes, Navier–Stokes and Burnett flows near a point
//! `(x, t) = (0, 0⁻)`.
//!
//! The crate is layered bottom-up:
//!
//! * [`poly`] — exact rational polynomials, multi-indices, kernel moments.
//! * [`hermite`] — the operators `B*`/`B`, generalized Hermite eigenfunctions.
//! * [`solenoidal`] — divergence-free vector eigenspaces and their duals.
//! * [`kernel`] — the `2m`-th order kernel `F` and its WKBJ decay constants.
//! * [`grid`] — periodic-box Fourier machinery: Leray projection, convection,
//!   and the quadratic interaction tensor.
//! * [`dynamics`] — expansions, coefficient flows, resonance detection,
//!   nodal sets, zero classification and the semigroup verifier.

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod hermite;
pub mod kernel;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod solenoidal;

pub use error::{Error, Result};

/// Schema tag carried by every JSON artifact.
pub const SCHEMA: &str = "hermflow/1";
