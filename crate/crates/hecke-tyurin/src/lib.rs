//! Hecke-Tyurin coordinates for rank-2 bundles on hyperelliptic curves.
//!
//! The crate builds everything from a list of branch points: periods and
//! the Abel map ([`curve`]), the Riemann theta function ([`theta`]), Green
//! kernels ([`green`]), the determinant `Den` and the linear systems around
//! it ([`hecke`]), the Higgs field and Hitchin Hamiltonians ([`hitchin`]),
//! and the quantized operators ([`kzb`]). [`report`] runs scenario files.
//!
//! Differentials are always stored as coefficients of `dx` (or `dx²`) at
//! the point that carries them.

pub mod curve;
pub mod error;
pub mod green;
pub mod hecke;
pub mod hitchin;
pub mod kzb;
pub mod numeric;
pub mod report;
pub mod theta;

pub use error::{Error, Result};
pub use numeric::C64;
