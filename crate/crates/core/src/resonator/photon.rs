use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::model::ResonanceParams;
use crate::error::{Error, Result};
use crate::units::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumber {
    pub mean_n: f64,
}

/// Mean intracavity photon number `⟨n⟩ = 2 Q_tot² P_in / (Q_ext ħ ω0²)`.
///
/// `p_in` is the power reaching the resonator in W and `f0` is in GHz. With
/// line attenuation taken from a warm calibration the result is a lower
/// estimate of the true occupation.
pub fn photon_number(params: &ResonanceParams, p_in: f64, f0: f64) -> Result<PhotonNumber> {
    if !(p_in.is_finite() && p_in >= 0.0) {
        return Err(Error::ParameterDomain(format!("input power must be non-negative, got {p_in}")));
    }
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::ParameterDomain(format!("f0 must be positive, got {f0}")));
    }
    params.validate()?;
    let omega = 2.0 * PI * f0 * 1e9;
    let q = params.q_tot();
    Ok(PhotonNumber { mean_n: 2.0 * q * q * p_in / (params.q_ext * HBAR * omega * omega) })
}
