use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{DELTA_WSI_UEV, UEV_PER_GHZ};

/// Quasiparticle population of a superconducting film.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiparticleSpec {
    /// Density normalized to the Cooper-pair density.
    pub x_qp: f64,
    /// Gap, µeV.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Kinetic-inductance fraction of the resonator.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_delta() -> f64 {
    DELTA_WSI_UEV
}

fn default_alpha() -> f64 {
    1.0
}

impl QuasiparticleSpec {
    pub fn new(x_qp: f64) -> Self {
        Self { x_qp, delta: DELTA_WSI_UEV, alpha: 1.0 }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_qp >= 0.0 && self.x_qp < 1.0) {
            return Err(Error::ParameterDomain(format!("x_qp must lie in [0, 1), got {}", self.x_qp)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::ParameterDomain(format!("gap must be positive, got {} µeV", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::ParameterDomain(format!("kinetic fraction must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

pub(crate) fn check_frequency(name: &str, f: f64) -> Result<()> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::ParameterDomain(format!("{name} must be positive, got {f} GHz")));
    }
    Ok(())
}

/// `√(2Δ / h f)` with Δ in µeV and `f` in GHz.
pub fn gap_ratio_sqrt(delta_uev: f64, f: f64) -> f64 {
    (2.0 * delta_uev / (UEV_PER_GHZ * f)).sqrt()
}

/// Quasiparticle-limited internal quality factor,
/// `1/Q_int = 1/Q0 + (α/π) √(2Δ/h f0) x_qp`.
///
/// `q0 = f64::INFINITY` drops the non-quasiparticle term.
pub fn q_int_quasiparticle(qp: &QuasiparticleSpec, q0: f64, f0: f64) -> Result<f64> {
    qp.validate()?;
    check_frequency("f0", f0)?;
    if !(q0 > 0.0) {
        return Err(Error::ParameterDomain(format!("Q0 must be positive, got {q0}")));
    }
    Ok(1.0 / (1.0 / q0 + qp.alpha / PI * gap_ratio_sqrt(qp.delta, f0) * qp.x_qp))
}

/// Inductive quality factor of a quasiparticle-loaded inductor,
/// `1/Q_ind = (1/π) √(2Δ/h f) x_qp`. Infinite when `x_qp = 0`.
pub fn q_ind(qp: &QuasiparticleSpec, f: f64) -> Result<f64> {
    qp.validate()?;
    check_frequency("frequency", f)?;
    Ok(PI / (gap_ratio_sqrt(qp.delta, f) * qp.x_qp))
}
