//! Relaxation rates of the fluxonium. Energies in GHz (E/h), rates in 1/µs,
//! all in the zero-temperature limit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quasiparticle::{check_frequency, gap_ratio_sqrt, QuasiparticleSpec};
use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::quantum::{matrix_element, EigenSolution, FluxoniumOperators, OperatorMatrix};
use crate::units::{thermal_coth, GHZ_TO_PER_US, UEV_PER_GHZ};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Warning text when `h f01` is not small against the gap.
pub fn gap_regime_warning(delta_uev: f64, f01: f64) -> Option<String> {
    let hf = UEV_PER_GHZ * f01;
    (hf > delta_uev / 5.0).then(|| {
        format!(
            "h·f01 = {hf:.1} µeV exceeds Δ/5 = {:.1} µeV; the small-frequency approximation degrades",
            delta_uev / 5.0
        )
    })
}

/// Warning text when thermal enhancement at `temperature` exceeds 1%.
pub fn thermal_warning(f01: f64, temperature: f64) -> Option<String> {
    let excess = thermal_coth(f01, temperature) - 1.0;
    (excess > 0.01).then(|| {
        format!("thermal factor coth(hf/2kT) − 1 = {excess:.3} at {temperature} K and {f01:.3} GHz; zero-temperature rates underestimate")
    })
}

/// Junction tunneling rate from `|⟨i|sin(φ/2)|f⟩|²`: `m2 · x_qp · (8E_J/πħ) · √(2Δ/hf)`.
pub fn junction_rate(m2: f64, e_j: f64, qp: &QuasiparticleSpec, f01: f64) -> Result<f64> {
    qp.validate()?;
    check_frequency("f01", f01)?;
    let prefactor = 8.0 * (2.0 * PI * e_j) / PI;
    Ok(m2 * qp.x_qp * prefactor * gap_ratio_sqrt(qp.delta, f01) * GHZ_TO_PER_US)
}

/// Array tunneling rate from `|⟨i|φ|f⟩|²`: `m2 · x_qp · (2E_L/πħ) · √(2Δ/hf)`.
pub fn array_rate(m2: f64, e_l: f64, qp: &QuasiparticleSpec, f01: f64) -> Result<f64> {
    qp.validate()?;
    check_frequency("f01", f01)?;
    let prefactor = 2.0 * (2.0 * PI * e_l) / PI;
    Ok(m2 * qp.x_qp * prefactor * gap_ratio_sqrt(qp.delta, f01) * GHZ_TO_PER_US)
}

/// Lossy-inductor rate: `m2 · 2E_L / (ħ Q_ind)`.
pub fn inductive_rate(m2: f64, e_l: f64, q_ind: f64) -> Result<f64> {
    if !(q_ind > 0.0) {
        return Err(Error::ParameterDomain(format!("Q_ind must be positive, got {q_ind}")));
    }
    Ok(m2 * 2.0 * (2.0 * PI * e_l) / q_ind * GHZ_TO_PER_US)
}

/// Lossy-capacitor rate: `m2 · ħω² / (4 E_C Q_cap)`.
pub fn dielectric_rate(m2: f64, e_c: f64, q_cap: f64, f01: f64) -> Result<f64> {
    check_frequency("f01", f01)?;
    check_positive("E_C", e_c)?;
    if !(q_cap > 0.0) {
        return Err(Error::ParameterDomain(format!("Q_cap must be positive, got {q_cap}")));
    }
    let omega = 2.0 * PI * f01;
    Ok(m2 * omega * omega / (2.0 * PI) / (4.0 * e_c * q_cap) * GHZ_TO_PER_US)
}

fn element_squared(op: &OperatorMatrix, sol: &EigenSolution, i: usize, f: usize) -> Result<f64> {
    Ok(matrix_element(op, sol, i, f)?.norm_sqr())
}

/// Rate for `i → f` through quasiparticle tunneling across the small junction.
pub fn gamma_qp_single_junction(
    sol: &EigenSolution,
    sin_half: &OperatorMatrix,
    e_j: f64,
    qp: &QuasiparticleSpec,
    f01: f64,
    i: usize,
    f: usize,
) -> Result<f64> {
    if let Some(w) = gap_regime_warning(qp.delta, f01) {
        log::warn!("{w}");
    }
    junction_rate(element_squared(sin_half, sol, i, f)?, e_j, qp, f01)
}

/// Rate for `i → f` through quasiparticle tunneling in the junction array.
pub fn gamma_qp_array(
    sol: &EigenSolution,
    phi: &OperatorMatrix,
    e_l: f64,
    qp: &QuasiparticleSpec,
    f01: f64,
    i: usize,
    f: usize,
) -> Result<f64> {
    if let Some(w) = gap_regime_warning(qp.delta, f01) {
        log::warn!("{w}");
    }
    array_rate(element_squared(phi, sol, i, f)?, e_l, qp, f01)
}

/// Rate for `i → f` through an inductor with quality factor `q_ind`.
pub fn gamma_inductive(
    sol: &EigenSolution,
    phi: &OperatorMatrix,
    e_l: f64,
    q_ind: f64,
    i: usize,
    f: usize,
) -> Result<f64> {
    inductive_rate(element_squared(phi, sol, i, f)?, e_l, q_ind)
}

/// Rate for `i → f` through a capacitor with quality factor `q_cap`.
pub fn gamma_dielectric(
    sol: &EigenSolution,
    phi: &OperatorMatrix,
    e_c: f64,
    q_cap: f64,
    f01: f64,
    i: usize,
    f: usize,
) -> Result<f64> {
    dielectric_rate(element_squared(phi, sol, i, f)?, e_c, q_cap, f01)
}

/// One relaxation mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LossChannel {
    /// Tunneling across the small junction; small for the fluxonium.
    QuasiparticleJunction(QuasiparticleSpec),
    /// Tunneling across the array junctions (superinductance).
    QuasiparticleArray(QuasiparticleSpec),
    /// Inductor with a fixed quality factor.
    Inductive {
        q_ind: f64,
    },
    Dielectric {
        q_cap: f64,
    },
}

impl LossChannel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::QuasiparticleJunction(_) => "quasiparticle-junction",
            Self::QuasiparticleArray(_) => "quasiparticle-array",
            Self::Inductive { .. } => "inductive",
            Self::Dielectric { .. } => "dielectric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRate {
    pub name: String,
    /// 1/µs
    pub rate: f64,
}

/// `1 → 0` relaxation split by channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    /// GHz
    pub f01: f64,
    pub channels: Vec<ChannelRate>,
    /// 1/µs
    pub total_rate: f64,
    /// µs
    pub total_t1: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl LossBudget {
    pub fn rate(&self, name: &str) -> Option<f64> {
        self.channels.iter().find(|c| c.name == name).map(|c| c.rate)
    }

    /// µs; infinite for a vanishing rate.
    pub fn t1(&self, name: &str) -> Option<f64> {
        self.rate(name).map(|r| 1.0 / r)
    }
}

/// Sums the `1 → 0` rates of `channels` for the circuit diagonalized in `sol`.
pub fn t1_budget(
    channels: &[LossChannel],
    circuit: &CircuitSpec,
    sol: &EigenSolution,
    ops: &FluxoniumOperators,
) -> Result<LossBudget> {
    if channels.is_empty() {
        return Err(Error::EmptyChannels);
    }
    let f01 = sol.transition(0, 1)?;
    let mut warnings = Vec::new();
    let mut rates = Vec::with_capacity(channels.len());
    for ch in channels {
        let rate = match ch {
            LossChannel::QuasiparticleJunction(qp) => {
                warnings.extend(gap_regime_warning(qp.delta, f01));
                junction_rate(element_squared(&ops.sin_half_phi, sol, 1, 0)?, circuit.e_j, qp, f01)?
            }
            LossChannel::QuasiparticleArray(qp) => {
                warnings.extend(gap_regime_warning(qp.delta, f01));
                array_rate(element_squared(&ops.phi, sol, 1, 0)?, circuit.e_l, qp, f01)?
            }
            LossChannel::Inductive { q_ind } => gamma_inductive(sol, &ops.phi, circuit.e_l, *q_ind, 1, 0)?,
            LossChannel::Dielectric { q_cap } => gamma_dielectric(sol, &ops.phi, circuit.e_c, *q_cap, f01, 1, 0)?,
        };
        rates.push(ChannelRate { name: ch.name().to_string(), rate });
    }
    warnings.dedup();
    let total_rate: f64 = rates.iter().map(|c| c.rate).sum();
    Ok(LossBudget { f01, channels: rates, total_rate, total_t1: 1.0 / total_rate, warnings })
}

/// Diagonalizes `circuit` at `phi_ext` and evaluates [`t1_budget`].
pub fn t1_budget_at_flux(channels: &[LossChannel], circuit: &CircuitSpec, phi_ext: f64) -> Result<LossBudget> {
    if channels.is_empty() {
        return Err(Error::EmptyChannels);
    }
    let spec = circuit.at_flux(phi_ext);
    let ops = spec.operators()?;
    let sol = crate::quantum::diagonalize(&ops.hamiltonian, 2)?;
    t1_budget(channels, &spec, &sol, &ops)
}
