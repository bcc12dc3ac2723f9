//! Pseudo-spectral solver and dyadic-analysis toolkit for a modified
//! surface quasi-geostrophic equation on the periodic square, with the
//! velocity coupled to the scalar through a fractional Riesz rotation so
//! that one dissipation order is critical at every coupling strength.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod littlewood_paley;
pub mod operators;
pub mod snapshot;
pub mod synth;
pub mod verification;

mod fft;

pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField};
pub use grid::Grid2D;
