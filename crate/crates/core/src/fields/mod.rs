//! Periodic scalar fields on the unit torus and their spectral calculus.

mod field;
mod grid;
pub mod io;
mod spectral;

pub use field::ScalarField;
pub use grid::{PeriodicGrid, MAX_DIM, MIN_DIM, MIN_POINTS};
pub use spectral::{resample, second_partial, HessianCombo, HessianStack, Spectral};
