use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{build_operators, diagonalize, EigenSolution, FluxoniumOperators, PhaseBasis};

/// Single fluxonium: energies in GHz, external flux in Φ0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    #[serde(default)]
    pub phi_ext: f64,
    #[serde(default)]
    pub truncation: PhaseBasis,
}

impl CircuitSpec {
    pub fn new(e_c: f64, e_j: f64, e_l: f64, phi_ext: f64) -> Self {
        Self { e_c, e_j, e_l, phi_ext, truncation: PhaseBasis::default() }
    }

    pub fn with_truncation(mut self, truncation: PhaseBasis) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn at_flux(&self, phi_ext: f64) -> Self {
        Self { phi_ext, ..self.clone() }
    }

    /// E_C and E_L must be positive. E_J may be zero (bare oscillator limit).
    pub fn validate(&self) -> Result<()> {
        for (name, v, allow_zero) in [("e_c", self.e_c, false), ("e_j", self.e_j, true), ("e_l", self.e_l, false)] {
            if !(v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0))) {
                return Err(Error::ParameterDomain(format!("{name} = {v} is outside its domain")));
            }
        }
        if !self.phi_ext.is_finite() {
            return Err(Error::ParameterDomain(format!("phi_ext = {} is not finite", self.phi_ext)));
        }
        self.truncation.validate()
    }

    pub fn operators(&self) -> Result<FluxoniumOperators> {
        self.validate()?;
        build_operators(&self.truncation, self.e_c, self.e_j, self.e_l, self.phi_ext)
    }
}

/// Lowest `levels` eigenpairs of the fluxonium Hamiltonian.
pub fn fluxonium_spectrum(spec: &CircuitSpec, levels: usize) -> Result<EigenSolution> {
    let ops = spec.operators()?;
    diagonalize(&ops.hamiltonian, levels)
}

/// Transition frequencies `E_k − E_0` for `k = 1..levels`.
pub fn transitions_from_ground(sol: &EigenSolution) -> Vec<f64> {
    sol.relative_energies().into_iter().skip(1).collect()
}
