//! Pseudospectral laboratory for the damped stochastic Navier–Stokes
//! equations on a periodic box, driven by rough multiplicative noise.

pub mod cli_io;
pub mod error;
pub mod estimators;
pub mod integrator;
pub mod noise;
pub mod nonlinearity;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
