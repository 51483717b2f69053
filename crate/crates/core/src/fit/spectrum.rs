use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lm::{least_squares, FitProblem, FitResult};
use crate::circuit::{dressed_point, CoupledSystemSpec, Coupling, DressedPoint};
use crate::error::{Error, Result};

/// Default uncertainty of a spectroscopy point, GHz.
pub const DEFAULT_SIGMA_GHZ: f64 = 1e-3;

/// Observations farther than this from every model branch are dropped, GHz.
pub const UNASSIGNABLE_GHZ: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TransitionKind {
    /// A resonator-like line; matched to the nearest dressed mode.
    Resonator,
    /// Qubit-like transition between dressed levels `i` and `j`.
    Qubit { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumObservation {
    /// Φ0
    pub flux: f64,
    /// GHz
    pub frequency: f64,
    pub kind: TransitionKind,
    /// GHz; [`DEFAULT_SIGMA_GHZ`] when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    pub spec: CoupledSystemSpec,
    pub result: FitResult,
    /// Indices of observations that were fitted.
    pub used: Vec<usize>,
    /// Indices dropped as unassignable at the starting point.
    pub excluded: Vec<usize>,
    /// Model minus observed at the optimum for every used observation, GHz.
    pub residuals_ghz: Vec<f64>,
}

fn model_value(point: &DressedPoint, obs: &SpectrumObservation) -> f64 {
    match obs.kind {
        TransitionKind::Qubit { i, j } => point.qubit_levels[j] - point.qubit_levels[i],
        TransitionKind::Resonator => point
            .mode_freqs
            .iter()
            .copied()
            .min_by(|a, b| (a - obs.frequency).abs().total_cmp(&(b - obs.frequency).abs()))
            .unwrap_or(f64::NAN),
    }
}

/// Layout of the free parameters: `E_C, E_J, E_L`, then the bare frequency of
/// every mode, then the strength of every charge-coupled mode.
struct Layout {
    initial: CoupledSystemSpec,
    coupled_modes: Vec<usize>,
}

impl Layout {
    fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = ["e_c", "e_j", "e_l"].map(String::from).to_vec();
        v.extend((0..self.initial.modes.len()).map(|m| format!("f_res_{m}")));
        v.extend(self.coupled_modes.iter().map(|m| format!("g_{m}")));
        v
    }

    fn pack(&self, spec: &CoupledSystemSpec) -> Vec<f64> {
        let mut v = vec![spec.qubit.e_c, spec.qubit.e_j, spec.qubit.e_l];
        v.extend(spec.modes.iter().map(|m| m.bare_frequency));
        v.extend(self.coupled_modes.iter().map(|&m| spec.modes[m].coupling.strength()));
        v
    }

    fn unpack(&self, p: &[f64]) -> CoupledSystemSpec {
        let mut spec = self.initial.clone();
        spec.qubit.e_c = p[0];
        spec.qubit.e_j = p[1];
        spec.qubit.e_l = p[2];
        let modes = spec.modes.len();
        for m in 0..modes {
            spec.modes[m].bare_frequency = p[3 + m];
        }
        for (k, &m) in self.coupled_modes.iter().enumerate() {
            spec.modes[m].coupling = Coupling::Charge { g: p[3 + modes + k] };
        }
        spec
    }
}

fn dressed_points(spec: &CoupledSystemSpec, fluxes: &[f64]) -> Result<Vec<DressedPoint>> {
    fluxes.par_iter().map(|&x| dressed_point(spec, x)).collect()
}

/// Fits circuit energies, bare mode frequencies and charge couplings to
/// spectroscopy lines. Residuals are `(model − observed)/σ`.
///
/// Observations with no model branch within [`UNASSIGNABLE_GHZ`] of the
/// starting model are excluded for the whole fit and listed in the
/// diagnostics. Modes with a fixed coupling matrix keep it.
pub fn fit_spectrum(observed: &[SpectrumObservation], initial: &CoupledSystemSpec) -> Result<SpectrumFit> {
    initial.validate()?;
    let coupled_modes: Vec<usize> =
        (0..initial.modes.len()).filter(|&m| matches!(initial.modes[m].coupling, Coupling::Charge { .. })).collect();
    let layout = Layout { initial: initial.clone(), coupled_modes };
    let names = layout.names();
    for (k, o) in observed.iter().enumerate() {
        if !(o.flux.is_finite() && o.frequency.is_finite() && o.frequency > 0.0) {
            return Err(Error::ParameterDomain(format!("observation {k}: flux and a positive frequency are required")));
        }
        if let Some(s) = o.sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::ParameterDomain(format!("observation {k}: sigma must be positive, got {s}")));
            }
        }
        if let TransitionKind::Qubit { i, j } = o.kind {
            if i >= j || j >= initial.qubit_levels {
                return Err(Error::ParameterDomain(format!(
                    "observation {k}: transition ({i}, {j}) needs i < j < {}",
                    initial.qubit_levels
                )));
            }
        }
    }

    let mut fluxes: Vec<f64> = observed.iter().map(|o| o.flux).collect();
    fluxes.sort_by(f64::total_cmp);
    fluxes.dedup();
    let slot = |x: f64| fluxes.binary_search_by(|v| v.total_cmp(&x)).expect("flux is in the list");

    let start = dressed_points(initial, &fluxes)?;
    let mut diagnostics = Vec::new();
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for (k, o) in observed.iter().enumerate() {
        let miss = (model_value(&start[slot(o.flux)], o) - o.frequency).abs();
        if miss > UNASSIGNABLE_GHZ {
            excluded.push(k);
            diagnostics.push(format!(
                "observation {k} at flux {} ({} GHz) is {miss:.3} GHz from the nearest {:?} branch; excluded",
                o.flux, o.frequency, o.kind
            ));
        } else {
            used.push(k);
        }
    }
    for d in &diagnostics {
        log::warn!("{d}");
    }
    if used.len() < names.len() {
        return Err(Error::TooFewPoints(format!(
            "{} assignable observations for {} free parameters",
            used.len(),
            names.len()
        )));
    }

    let obs: Vec<(usize, SpectrumObservation)> = used.iter().map(|&k| (slot(observed[k].flux), observed[k])).collect();
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let spec = layout.unpack(p);
        let points = dressed_points(&spec, &fluxes)?;
        Ok(obs
            .iter()
            .map(|(s, o)| (model_value(&points[*s], o) - o.frequency) / o.sigma.unwrap_or(DEFAULT_SIGMA_GHZ))
            .collect())
    };
    let p0 = layout.pack(initial);
    let scale: Vec<f64> = p0.iter().map(|v| v.abs().max(1e-2)).collect();
    let bounds = vec![(1e-6, f64::INFINITY); p0.len()];
    let mut result = least_squares(&FitProblem::new(names, residual, p0, scale).with_bounds(bounds))?;
    result.diagnostics.splice(0..0, diagnostics);
    let spec = layout.unpack(&result.parameters);
    let points = dressed_points(&spec, &fluxes)?;
    let residuals_ghz = obs.iter().map(|(s, o)| model_value(&points[*s], o) - o.frequency).collect();
    Ok(SpectrumFit { spec, result, used, excluded, residuals_ghz })
}
