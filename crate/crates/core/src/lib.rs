//! Quasicrystal exponential Riesz bases for multiband spectra.
//!
//! Given a finite union of intervals `S` whose lengths lie in `ℤα + ℤβ`, the
//! crate builds the cut-and-project node sets attached to the lattice
//! `Γ = {(n(1+α) − m, m − nα)}`, checks the separation, bounded-deviation and
//! quarter-in-the-mean conditions on the dual enumeration, measures
//! finite-section Gram bounds of `E(Λ)` in `L²(S)`, and reconstructs
//! band-limited signals from their samples on `Λ`.
//!
//! All endpoint and node arithmetic is exact over `ℚ + ℤα` (see [`qnum`]);
//! floating point enters only for transcendental evaluations.

pub mod avdonin;
pub mod duality;
pub mod error;
pub mod linalg;
pub mod parse;
pub mod qnum;
pub mod quasicrystal;
pub mod riesz;
pub mod sampling;
pub mod schema;
pub mod spectra;

pub use error::{Error, Result};
pub use qnum::{Alpha, QNum};
pub use quasicrystal::{Lattice2, NodeSet};
pub use spectra::{Interval, Spectrum};
