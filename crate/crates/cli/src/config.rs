use std::path::{Path, PathBuf};

use fluxkit::circuit::{
    CircuitSpec, CoupledSystemSpec, Coupling, ModeSpec, DEFAULT_QUBIT_LEVELS, DEFAULT_READOUT_PHOTONS,
};
use fluxkit::loss::LossChannel;
use fluxkit::quantum::PhaseBasis;
use fluxkit::resonator::{ResonanceParams, SynthesisRanges};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Schema version written into every emitted file and accepted in configs.
pub const FORMAT_VERSION: u32 = 1;

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub circuit: Option<CircuitBlock>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub fit_s21: Option<FitS21Block>,
    #[serde(default)]
    pub power_sweep: Option<PowerSweepBlock>,
    #[serde(default)]
    pub fit_spectrum: Option<FitSpectrumBlock>,
    #[serde(default)]
    pub predict_t1: Option<PredictT1Block>,
    #[serde(default)]
    pub synthesize: Option<SynthesizeBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKindBlock {
    Harmonic,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub kind: BasisKindBlock,
    pub dimension: usize,
    /// Half width of the phase grid, rad.
    #[serde(default)]
    pub grid_extent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    /// GHz
    pub bare_frequency: f64,
    /// Charge coupling, GHz.
    pub g: f64,
    #[serde(default)]
    pub photons: Option<usize>,
}

/// Circuit energies in GHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitBlock {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    #[serde(default)]
    pub basis: Option<BasisBlock>,
    #[serde(default)]
    pub qubit_levels: Option<usize>,
    #[serde(default)]
    pub modes: Vec<ModeBlock>,
}

impl CircuitBlock {
    pub fn circuit(&self) -> fluxkit::Result<CircuitSpec> {
        let mut spec = CircuitSpec::new(self.e_c, self.e_j, self.e_l, 0.0);
        if let Some(b) = &self.basis {
            spec.truncation = match b.kind {
                BasisKindBlock::Harmonic => PhaseBasis::harmonic(b.dimension)?,
                BasisKindBlock::Grid => {
                    PhaseBasis::discretized_phase(b.dimension, b.grid_extent.unwrap_or(12.0 * std::f64::consts::PI))?
                }
            };
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn coupled(&self) -> fluxkit::Result<CoupledSystemSpec> {
        let modes = self
            .modes
            .iter()
            .map(|m| ModeSpec {
                bare_frequency: m.bare_frequency,
                photon_truncation: m.photons.unwrap_or(DEFAULT_READOUT_PHOTONS),
                coupling: Coupling::Charge { g: m.g },
            })
            .collect();
        let spec = CoupledSystemSpec {
            qubit_levels: self.qubit_levels.unwrap_or(DEFAULT_QUBIT_LEVELS),
            ..CoupledSystemSpec::new(self.circuit()?, modes)
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Flux points in Φ0, listed or as an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FluxGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl FluxGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            FluxGrid::List(v) => v.clone(),
            FluxGrid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

fn default_levels() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub flux: FluxGrid,
    /// Qubit levels whose pairwise transitions are emitted.
    #[serde(default = "default_levels")]
    pub levels: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitS21Block {
    /// Trace files or directories of `*.csv` traces.
    #[serde(default)]
    pub traces: Vec<PathBuf>,
    #[serde(default)]
    pub allow_nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSweepBlock {
    /// CSV with columns `mean_n, q_int` and optionally `a`.
    pub input: PathBuf,
    #[serde(default)]
    pub a_crit_fraction: Option<f64>,
    /// Row label in the emitted loss table.
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpectrumBlock {
    /// CSV with columns `flux, frequency_ghz, kind, i, j` and optionally `sigma_ghz`.
    pub observations: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    #[serde(default)]
    pub channels: Vec<LossChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictT1Block {
    pub flux: FluxGrid,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
    /// Bath temperature, K; enables the thermal-population warning.
    #[serde(default)]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    #[default]
    Up,
    Down,
    /// An up and a down sweep sharing one noise draw.
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFormat {
    #[default]
    RealImag,
    MagPhase,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSynthBlock {
    /// Number of randomly drawn resonances; ignored when `resonators` is set.
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub ranges: SynthesisRanges,
    /// Explicit resonances on a unit background.
    #[serde(default)]
    pub resonators: Vec<ResonanceParams>,
    /// Signal-to-noise ratio, dB; omit for noiseless traces.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub directions: Directions,
    #[serde(default)]
    pub format: TraceFormat,
    /// Recorded in the sidecar of every trace, dBm.
    #[serde(default)]
    pub drive_power_dbm: Option<f64>,
}

fn default_transitions() -> Vec<(usize, usize)> {
    vec![(0, 1), (0, 2)]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSynthBlock {
    pub flux: FluxGrid,
    #[serde(default = "default_transitions")]
    pub transitions: Vec<(usize, usize)>,
    #[serde(default = "default_true")]
    pub include_resonator: bool,
    /// Gaussian noise added to every line, GHz.
    #[serde(default)]
    pub noise_ghz: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeBlock {
    #[serde(default)]
    pub traces: Option<TraceSynthBlock>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSynthBlock>,
}

/// A parsed configuration together with its source text, for messages that
/// point at the offending line.
#[derive(Debug, Clone, Default)]
pub struct ConfigDoc {
    pub path: Option<PathBuf>,
    pub text: String,
    pub config: RunConfig,
}

impl ConfigDoc {
    /// Stand-in when no `--config` is given.
    pub fn empty() -> Self {
        Self {
            path: None,
            text: String::new(),
            config: RunConfig { format_version: FORMAT_VERSION, ..Default::default() },
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(text, Some(path.to_path_buf()))
    }

    pub fn parse(text: String, path: Option<PathBuf>) -> CliResult<Self> {
        let name = path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string());
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{name}: {}", e.to_string().trim_end())))?;
        let doc = Self { path: path.clone(), text, config: config.clone() };
        if config.format_version != FORMAT_VERSION {
            return Err(doc.invalid("format_version", format!("unsupported format_version {}", config.format_version)));
        }
        if let Some(base) = path.as_ref().and_then(|p| p.parent()) {
            resolve_paths(&mut config, base);
        }
        Ok(Self { config, ..doc })
    }

    /// Validation error located at `key` (dotted, e.g. `spectrum.flux`).
    pub fn invalid(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        let name = self.path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string());
        match locate(&self.text, key) {
            Some(line) => CliError::Validation(format!("{name}:{line}: {key}: {msg}")),
            None => CliError::Validation(format!("{name}: {key}: {msg}")),
        }
    }

    pub fn require<'a, T>(&self, block: &'a Option<T>, key: &str) -> CliResult<&'a T> {
        block.as_ref().ok_or_else(|| self.invalid(key, "block is missing"))
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_paths(config: &mut RunConfig, base: &Path) {
    if let Some(b) = &mut config.fit_s21 {
        b.traces.iter_mut().for_each(|p| resolve(base, p));
    }
    if let Some(b) = &mut config.power_sweep {
        resolve(base, &mut b.input);
    }
    if let Some(b) = &mut config.fit_spectrum {
        resolve(base, &mut b.observations);
    }
}

/// 1-based line of `key` inside its table, or of the table header.
fn locate(text: &str, key: &str) -> Option<usize> {
    let (table, leaf) = match key.rsplit_once('.') {
        Some((t, l)) => (t, l),
        None => ("", key),
    };
    let mut current = String::new();
    let mut header_line = None;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == key && header_line.is_none() {
                header_line = Some(k + 1);
            }
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let lhs = lhs.trim();
        let full = if current.is_empty() { lhs.to_string() } else { format!("{current}.{lhs}") };
        if full == key || (current == table && lhs == leaf) {
            return Some(k + 1);
        }
    }
    header_line
}
