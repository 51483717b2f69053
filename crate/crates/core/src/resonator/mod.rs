//! Hanger-type nonlinear resonator transmission, trace preprocessing and
//! photon-number calibration.

mod cubic;
mod model;
mod photon;
mod synth;
mod trace;

pub use cubic::{bistable_window, branch_detuning, solve_detuning, SweepDirection};
pub use model::{s21_model, s21_reduced, Baseline, DriveScaling, Regime, ResonanceParams};
pub use photon::{photon_number, PhotonNumber};
pub use synth::{draw_resonance, linewidth_grid, synthesize_trace, SynthesisRanges};
pub use trace::{normalize_trace, AttenuationTable, Normalization, SweepTrace, MIN_NORMALIZE_POINTS};

pub(crate) use trace::normalize_with_factor;
