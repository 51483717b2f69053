use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fluxonium::CircuitSpec;
use crate::error::{Error, Result};
use crate::quantum::{diagonalize, OperatorMatrix};

type C64 = Complex<f64>;

pub const DEFAULT_QUBIT_LEVELS: usize = 10;
pub const DEFAULT_READOUT_PHOTONS: usize = 6;
pub const DEFAULT_SPURIOUS_PHOTONS: usize = 3;
/// Two strongly mixed branches closer than this (GHz) cannot be told apart.
pub const BRANCH_RESOLUTION_GHZ: f64 = 1e-3;
const BRANCH_CANDIDATE_OVERLAP: f64 = 0.25;

/// How a bosonic mode couples to the qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Coupling {
    /// `g n̂ (a + a†)`, g in GHz.
    Charge { g: f64 },
    /// Explicit `g_ij` (GHz) in the qubit eigenbasis, multiplying `(a + a†)`.
    Matrix { g: Vec<Vec<f64>> },
}

impl Coupling {
    pub fn strength(&self) -> f64 {
        match self {
            Coupling::Charge { g } => g.abs(),
            Coupling::Matrix { g } => g.iter().flatten().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Bare mode frequency, GHz.
    pub bare_frequency: f64,
    /// Number of Fock states kept (photon numbers 0..truncation).
    pub photon_truncation: usize,
    pub coupling: Coupling,
}

impl ModeSpec {
    pub fn readout(bare_frequency: f64, g: f64) -> Self {
        Self { bare_frequency, photon_truncation: DEFAULT_READOUT_PHOTONS, coupling: Coupling::Charge { g } }
    }

    pub fn spurious(bare_frequency: f64, g: f64) -> Self {
        Self { bare_frequency, photon_truncation: DEFAULT_SPURIOUS_PHOTONS, coupling: Coupling::Charge { g } }
    }
}

/// Fluxonium coupled to one readout mode and optionally one spurious mode.
/// Both modes couple to the qubit; they do not couple to each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystemSpec {
    pub qubit: CircuitSpec,
    pub modes: Vec<ModeSpec>,
    #[serde(default = "default_qubit_levels")]
    pub qubit_levels: usize,
}

fn default_qubit_levels() -> usize {
    DEFAULT_QUBIT_LEVELS
}

impl CoupledSystemSpec {
    pub fn new(qubit: CircuitSpec, modes: Vec<ModeSpec>) -> Self {
        Self { qubit, modes, qubit_levels: DEFAULT_QUBIT_LEVELS }
    }

    pub fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        if self.modes.is_empty() || self.modes.len() > 2 {
            return Err(Error::ParameterDomain(format!("expected 1 or 2 bosonic modes, got {}", self.modes.len())));
        }
        if self.qubit_levels < 2 || self.qubit_levels > self.qubit.truncation.dimension() {
            return Err(Error::Truncation(format!(
                "qubit_levels = {} must lie in 2..={}",
                self.qubit_levels,
                self.qubit.truncation.dimension()
            )));
        }
        for (m, mode) in self.modes.iter().enumerate() {
            if !(mode.bare_frequency.is_finite() && mode.bare_frequency > 0.0) {
                return Err(Error::ParameterDomain(format!("mode {m}: bare frequency must be positive")));
            }
            if mode.photon_truncation < 2 {
                return Err(Error::Truncation(format!("mode {m}: photon_truncation must be at least 2")));
            }
            match &mode.coupling {
                Coupling::Charge { g } if !g.is_finite() => {
                    return Err(Error::ParameterDomain(format!("mode {m}: coupling must be finite")));
                }
                Coupling::Matrix { g } => {
                    let q = self.qubit_levels;
                    if g.len() != q || g.iter().any(|row| row.len() != q) {
                        return Err(Error::ParameterDomain(format!("mode {m}: coupling matrix must be {q}x{q}")));
                    }
                    for i in 0..q {
                        for j in 0..q {
                            if !g[i][j].is_finite() || (g[i][j] - g[j][i]).abs() > 1e-12 * g[i][j].abs().max(1.0) {
                                return Err(Error::ParameterDomain(format!(
                                    "mode {m}: coupling matrix must be finite and symmetric"
                                )));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Flux-swept dressed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpectrum {
    pub flux_points: Vec<f64>,
    /// `transitions[k][p]` is the qubit-like transition `labels[p]` at `flux_points[k]`, GHz.
    pub transitions: Vec<Vec<f64>>,
    /// Dressed frequency of the first (readout) mode, GHz.
    pub dressed_resonator_freq: Vec<f64>,
    /// `dressed_mode_freqs[k][m]` for every mode, GHz.
    pub dressed_mode_freqs: Vec<Vec<f64>>,
    pub labels: Vec<(usize, usize)>,
}

impl FluxSpectrum {
    pub fn transition(&self, flux_index: usize, i: usize, j: usize) -> Option<f64> {
        let p = self.labels.iter().position(|&l| l == (i, j))?;
        Some(self.transitions[flux_index][p])
    }
}

/// Dressed spectrum at one flux point.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedPoint {
    /// Energy of the dressed state attached to bare qubit level q (no photons), relative to ground.
    pub qubit_levels: Vec<f64>,
    pub mode_freqs: Vec<f64>,
}

/// Diagonalizes the coupled system on every flux point, in parallel, with
/// results in input order.
pub fn coupled_spectrum(spec: &CoupledSystemSpec, levels: usize, flux_points: &[f64]) -> Result<FluxSpectrum> {
    spec.validate()?;
    if flux_points.is_empty() {
        return Err(Error::ParameterDomain("flux_points is empty".into()));
    }
    if levels < 2 || levels > spec.qubit_levels {
        return Err(Error::ParameterDomain(format!("levels must lie in 2..={}", spec.qubit_levels)));
    }
    let points: Vec<DressedPoint> =
        flux_points.par_iter().map(|&flux| dressed_point(spec, flux)).collect::<Result<Vec<_>>>()?;
    let labels: Vec<(usize, usize)> = (0..levels).flat_map(|i| ((i + 1)..levels).map(move |j| (i, j))).collect();
    let transitions =
        points.iter().map(|p| labels.iter().map(|&(i, j)| p.qubit_levels[j] - p.qubit_levels[i]).collect()).collect();
    Ok(FluxSpectrum {
        flux_points: flux_points.to_vec(),
        transitions,
        dressed_resonator_freq: points.iter().map(|p| p.mode_freqs[0]).collect(),
        dressed_mode_freqs: points.into_iter().map(|p| p.mode_freqs).collect(),
        labels,
    })
}

/// Coupled Hamiltonian on the product basis `|q⟩ ⊗ |n_1⟩ ⊗ |n_2⟩`, with the
/// qubit in its own eigenbasis and energies relative to the bare qubit ground.
#[derive(Debug, Clone)]
pub struct CoupledHamiltonian {
    pub operator: OperatorMatrix,
    qubit_levels: usize,
    photons: Vec<usize>,
    strides: Vec<usize>,
}

impl CoupledHamiltonian {
    /// Product-basis index of bare state `|q, occupations⟩`.
    pub fn bare_index(&self, q: usize, occupations: &[usize]) -> usize {
        let block = self.block();
        q * block + occupations.iter().zip(&self.strides).map(|(n, s)| n * s).sum::<usize>()
    }

    pub fn dimension(&self) -> usize {
        self.qubit_levels * self.block()
    }

    fn block(&self) -> usize {
        self.photons.iter().product()
    }
}

pub fn coupled_hamiltonian(spec: &CoupledSystemSpec, flux: f64) -> Result<CoupledHamiltonian> {
    spec.validate()?;
    let qubit = spec.qubit.at_flux(flux);
    let ops = qubit.operators()?;
    let q = spec.qubit_levels;
    let sol = diagonalize(&ops.hamiltonian, q)?;
    let e0 = sol.energies()[0];
    let couplings: Vec<DMatrix<C64>> = spec
        .modes
        .iter()
        .map(|mode| match &mode.coupling {
            Coupling::Charge { g } => {
                let v = sol.states();
                let nv =
                    DMatrix::from_columns(&(0..q).map(|k| ops.n.apply(&v.column(k).into_owned())).collect::<Vec<_>>());
                v.adjoint() * nv * C64::new(*g, 0.0)
            }
            Coupling::Matrix { g } => DMatrix::from_fn(q, q, |i, j| C64::new(g[i][j], 0.0)),
        })
        .collect();

    let photons: Vec<usize> = spec.modes.iter().map(|m| m.photon_truncation).collect();
    let strides = strides(&photons);
    let block: usize = photons.iter().product();
    let dim = q * block;
    let index = |qi: usize, occ: &[usize]| qi * block + occ.iter().zip(&strides).map(|(n, s)| n * s).sum::<usize>();

    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..dim {
        let (qa, occ) = decompose(a, block, &strides, &photons);
        let mut diag = sol.energies()[qa] - e0;
        for (m, &n) in occ.iter().enumerate() {
            diag += spec.modes[m].bare_frequency * n as f64;
        }
        h[(a, a)] = C64::new(diag, 0.0);
        for (m, c) in couplings.iter().enumerate() {
            // a† raises mode m; the hermitian partner is filled alongside
            if occ[m] + 1 < photons[m] {
                let mut up = occ.clone();
                up[m] += 1;
                let amp = ((occ[m] + 1) as f64).sqrt();
                for qb in 0..q {
                    let b = index(qb, &up);
                    let v = c[(qb, qa)] * amp;
                    h[(b, a)] += v;
                    h[(a, b)] += v.conj();
                }
            }
        }
    }
    Ok(CoupledHamiltonian {
        operator: OperatorMatrix::dense(spec.qubit.truncation.clone(), h),
        qubit_levels: q,
        photons,
        strides,
    })
}

/// Dressed levels and mode frequencies at a single flux.
///
/// Each bare state is attached to the dressed state with the largest overlap.
pub fn dressed_point(spec: &CoupledSystemSpec, flux: f64) -> Result<DressedPoint> {
    let coupled = coupled_hamiltonian(spec, flux)?;
    let dim = coupled.dimension();
    let dressed = diagonalize(&coupled.operator, dim)?;
    let states = dressed.states();
    let energies = dressed.energies();
    let best_match = |bare: usize| -> usize {
        let mut best = 0;
        let mut best_w = -1.0;
        for k in 0..dim {
            let w = states[(bare, k)].norm_sqr();
            if w > best_w {
                best_w = w;
                best = k;
            }
        }
        best
    };
    let modes = coupled.photons.len();
    let zeros = vec![0usize; modes];
    let ground = energies[best_match(coupled.bare_index(0, &zeros))];
    let qubit_levels =
        (0..coupled.qubit_levels).map(|qi| energies[best_match(coupled.bare_index(qi, &zeros))] - ground).collect();
    let mut mode_freqs = Vec::with_capacity(modes);
    for m in 0..modes {
        let mut one = zeros.clone();
        one[m] = 1;
        let bare = coupled.bare_index(0, &one);
        let chosen = best_match(bare);
        let candidates: Vec<usize> =
            (0..dim).filter(|&k| states[(bare, k)].norm_sqr() >= BRANCH_CANDIDATE_OVERLAP).collect();
        for &k in &candidates {
            if k != chosen && (energies[k] - energies[chosen]).abs() < BRANCH_RESOLUTION_GHZ {
                return Err(Error::BranchAmbiguity {
                    flux,
                    detail: format!(
                        "mode {m} has two dressed candidates at {:.6} and {:.6} GHz",
                        energies[chosen] - ground,
                        energies[k] - ground
                    ),
                });
            }
        }
        mode_freqs.push(energies[chosen] - ground);
    }
    Ok(DressedPoint { qubit_levels, mode_freqs })
}

fn strides(photons: &[usize]) -> Vec<usize> {
    let mut s = vec![1; photons.len()];
    for m in (0..photons.len().saturating_sub(1)).rev() {
        s[m] = s[m + 1] * photons[m + 1];
    }
    s
}

fn decompose(a: usize, block: usize, strides: &[usize], photons: &[usize]) -> (usize, Vec<usize>) {
    let qa = a / block;
    let rest = a % block;
    let occ = strides.iter().zip(photons).map(|(s, p)| (rest / s) % p).collect();
    (qa, occ)
}
