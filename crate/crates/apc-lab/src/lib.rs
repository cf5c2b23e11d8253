//! Radial Dirac lattice laboratory.
//!
//! A single angular channel of the Dirac operator with a compactly supported,
//! slowly switched scalar well is discretized on a staggered lattice. On top
//! of that sit the gap spectrum, the continuum eigenfunctions, Crank–Nicolson
//! propagation and the sweeps that measure decay and pair-creation trends.
//!
//! Units are ħ = m = c = 1 throughout.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod gef;
pub mod linalg;
pub mod radial;
pub mod spectral;

pub use error::{LabError, Result};
pub use exec::Exec;

pub type C64 = num_complex::Complex64;
