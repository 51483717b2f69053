use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon-number dependence of the internal loss from quasiparticle
/// redistribution under drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLossSpec {
    /// Internal Q in the zero-photon limit.
    pub q0: f64,
    /// Loss removed when the drive saturates the mechanism.
    pub beta: f64,
    /// Per photon.
    pub gamma: f64,
}

impl PowerLossSpec {
    pub fn new(q0: f64, beta: f64, gamma: f64) -> Self {
        Self { q0, beta, gamma }
    }

    /// From a tabulated `(β, γ, δ0)` triple with `δ0 = 1/Q0`.
    pub fn from_loss_tangent(beta: f64, gamma: f64, delta0: f64) -> Self {
        Self { q0: 1.0 / delta0, beta, gamma }
    }

    pub fn delta0(&self) -> f64 {
        1.0 / self.q0
    }

    /// `(1/Q0 − β)⁻¹`, the upper bound approached at large photon number.
    pub fn saturated_q(&self) -> f64 {
        1.0 / (1.0 / self.q0 - self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q0.is_finite() && self.q0 > 0.0) {
            return Err(Error::ParameterDomain(format!("Q0 must be positive, got {}", self.q0)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::ParameterDomain(format!("beta must be non-negative, got {}", self.beta)));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::ParameterDomain(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Universal curve `1/(1 + u/(½ + ½√(1 + 4u)))` of the scaled loss tangent
/// against `u = γ⟨n⟩`. Falls from 1 at `u = 0` towards 0 as `u^{-1/2}`.
pub fn collapse_curve(u: f64) -> f64 {
    1.0 / (1.0 + u / (0.5 + 0.5 * (1.0 + 4.0 * u).sqrt()))
}

/// Internal loss tangent `1/Q_int` at mean photon number `n`.
pub fn loss_tangent_power(spec: &PowerLossSpec, n: f64) -> Result<f64> {
    spec.validate()?;
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::ParameterDomain(format!("photon number must be non-negative, got {n}")));
    }
    Ok(1.0 / spec.q0 + spec.beta * (collapse_curve(spec.gamma * n) - 1.0))
}

/// `Q_int(⟨n⟩)`, nondecreasing in `n` and equal to `Q0` at `n = 0`.
pub fn q_int_power(spec: &PowerLossSpec, n: f64) -> Result<f64> {
    let delta = loss_tangent_power(spec, n)?;
    if delta == spec.delta0() {
        return Ok(spec.q0);
    }
    if !(delta > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "beta = {} exceeds 1/Q0 = {}; the loss tangent turns non-positive at n = {n}",
            spec.beta,
            spec.delta0()
        )));
    }
    Ok(1.0 / delta)
}

/// Scaled loss tangent `(δ(n) − (δ0 − β))/β`, which depends on `γ⟨n⟩` only.
pub fn loss_tangent_scaling(spec: &PowerLossSpec, n_values: &[f64]) -> Result<Vec<f64>> {
    if !(spec.beta > 0.0) {
        return Err(Error::ParameterDomain("scaling needs beta > 0".into()));
    }
    // Offset by δ0 rather than δ0 − β so that n = 0 maps to exactly 1.
    let delta0 = spec.delta0();
    n_values.iter().map(|&n| Ok((loss_tangent_power(spec, n)? - delta0) / spec.beta + 1.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonatorLayout {
    Distributed,
    Lumped,
}

/// One row of the published power-sweep loss parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTableRow {
    /// Film sheet inductance, pH/□.
    pub sheet_inductance: f64,
    pub layout: ResonatorLayout,
    /// GHz
    pub f0: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta0: f64,
}

impl LossTableRow {
    pub fn spec(&self) -> PowerLossSpec {
        PowerLossSpec::from_loss_tangent(self.beta, self.gamma, self.delta0)
    }
}

const fn row(
    sheet_inductance: f64,
    layout: ResonatorLayout,
    f0: f64,
    beta: f64,
    gamma: f64,
    delta0: f64,
) -> LossTableRow {
    LossTableRow { sheet_inductance, layout, f0, beta: beta * 1e-6, gamma: gamma * 1e-3, delta0: delta0 * 1e-5 }
}

use ResonatorLayout::{Distributed as D, Lumped as L};

/// Fitted power-dependence parameters for the 100 and 300 pH/□ resonators.
pub const LOSS_TABLE: [LossTableRow; 31] = [
    row(100.0, D, 4.375, 4.656, 79.502, 1.622),
    row(100.0, D, 4.881, 3.966, 167.804, 1.521),
    row(100.0, D, 5.108, 3.482, 335.690, 1.466),
    row(100.0, D, 5.428, 4.686, 190.073, 1.720),
    row(100.0, D, 6.086, 3.858, 289.612, 1.428),
    row(100.0, D, 7.093, 3.559, 424.432, 1.405),
    row(100.0, D, 7.616, 3.225, 238.005, 1.273),
    row(100.0, D, 7.701, 3.059, 728.460, 1.262),
    row(100.0, L, 7.300, 5.641, 47.725, 1.638),
    row(100.0, L, 7.396, 3.398, 77.397, 1.432),
    row(100.0, L, 7.633, 4.130, 53.224, 1.467),
    row(100.0, L, 7.695, 3.817, 38.484, 1.204),
    row(100.0, L, 7.913, 4.433, 43.428, 1.394),
    row(100.0, L, 8.028, 3.400, 58.591, 1.277),
    row(100.0, L, 8.242, 3.268, 78.759, 2.816),
    row(300.0, D, 3.771, 45.353, 16.170, 12.983),
    row(300.0, D, 4.139, 39.185, 19.458, 12.090),
    row(300.0, D, 4.580, 34.405, 11.018, 10.960),
    row(300.0, D, 5.041, 27.230, 10.320, 10.122),
    row(300.0, D, 5.841, 25.930, 5.003, 11.629),
    row(300.0, D, 6.527, 16.345, 6.709, 8.688),
    row(300.0, D, 7.414, 9.541, 19.156, 8.416),
    row(300.0, D, 7.625, 13.793, 4.068, 9.117),
    row(300.0, D, 8.123, 22.841, 0.224, 7.851),
    row(300.0, L, 6.398, 28.887, 133.440, 9.331),
    row(300.0, L, 6.532, 26.100, 48.252, 9.030),
    row(300.0, L, 6.670, 24.779, 45.101, 8.696),
    row(300.0, L, 6.781, 23.994, 104.948, 8.441),
    row(300.0, L, 6.954, 21.434, 37.558, 8.246),
    row(300.0, L, 7.111, 16.420, 51.912, 7.869),
    row(300.0, L, 7.178, 16.903, 22.186, 8.102),
];
