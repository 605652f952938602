//! Φ-generalized powers and the identities built on them: Φ-trigonometric
//! functions, Φ-derivatives and Taylor expansions, spectral parameter power
//! series for Sturm–Liouville problems, SUSY partner potentials and Volterra
//! composition of kernels.

pub mod analytic;
pub mod calculus;
pub mod error;
pub mod export;
pub mod grid;
pub mod jet;
pub mod phi;
pub mod powers;
pub mod quadrature;
pub mod spps;
pub mod susy;
pub mod trig;
pub mod verify;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{Grid, SampledFunction};

pub type C64 = num_complex::Complex64;
