//! Nonlinear least squares and the extraction pipelines built on it.

mod lm;
mod power;
mod s21;
mod spectrum;
mod xqp;

pub use lm::{least_squares, FitOptions, FitProblem, FitResult};
pub use power::{
    fit_power_sweep, PowerPoint, PowerSweepFit, PowerSweepFitInput, GAMMA_RELATIVE_ERROR_LIMIT, MIN_POWER_POINTS,
};
pub use s21::{fit_s21, S21Fit, JUMP_RATIO, MIN_DIP_DEPTH, MIN_DIP_TO_NOISE};
pub use spectrum::{
    fit_spectrum, SpectrumFit, SpectrumObservation, TransitionKind, DEFAULT_SIGMA_GHZ, UNASSIGNABLE_GHZ,
};
pub use xqp::{fit_xqp_frequency, QualityPoint, XqpFit};
