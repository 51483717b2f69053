//! Fluxonium spectra, nonlinear kinetic-inductance resonator response, loss
//! channel models and the fits that connect them to measured data.
//!
//! Energies are frequencies in GHz (E/h), flux is in units of Φ0, rates are
//! in 1/µs.

pub mod circuit;
pub mod error;
pub mod fit;
pub mod loss;
pub mod quantum;
pub mod resonator;
pub mod units;

pub use error::{Error, Result};
