//! Sampling, eigenvalue, density and verification commands for chiral
//! random matrix models, plus CSV and JSON table formats.

pub mod io;
pub mod sampling;
pub mod verify;
