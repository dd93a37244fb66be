//! Reduced quaternionic Monge-Ampere equations on tori: symbolic derivation
//! from the nilmanifold HKT structures, a continuity-method Newton-Krylov
//! solver, and audits of the a priori estimates.

pub mod config;
pub mod equations;
pub mod error;
pub mod fields;
pub mod lie_hkt;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
