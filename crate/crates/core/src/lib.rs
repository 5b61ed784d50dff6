//! Numerical harmonic analysis on Métivier groups.
//!
//! The crate covers symplectic normal forms of structure pencils, special
//! Hermite and Laguerre expansions on ℂⁿ, twisted spherical means and
//! twisted convolutions on polar grids, and the reconstruction and
//! counterexample procedures behind the one- and two-radii injectivity
//! results.

pub mod cli;
pub mod error;
pub mod fields;
pub mod group_algebra;
pub mod injectivity;
pub mod quadrature;
pub mod special;
pub mod twisted;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
