use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default harmonic-oscillator truncation for production spectra.
pub const DEFAULT_HARMONIC_DIMENSION: usize = 120;

/// Half width of the central-difference stencils on the phase grid (8th order).
pub const DEFAULT_STENCIL_HALF_WIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    HarmonicOscillator,
    DiscretizedPhase,
}

/// Representation used for the phase and charge operators.
///
/// The harmonic basis is the Fock basis of the LC part of the circuit. Its
/// oscillator length is `(8 E_C / E_L)^(1/4)`, so that
/// `φ = ℓ (a + a†)/√2` and `n = i (a† − a)/(√2 ℓ)`. It is filled in when
/// operators are built because it depends on the circuit energies.
///
/// The discretized-phase basis samples φ on `dimension` equally spaced points
/// of `[-grid_extent, +grid_extent]` with Dirichlet ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBasis {
    kind: BasisKind,
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_extent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oscillator_length: Option<f64>,
    #[serde(default = "default_stencil")]
    stencil_half_width: usize,
}

fn default_stencil() -> usize {
    DEFAULT_STENCIL_HALF_WIDTH
}

impl Default for PhaseBasis {
    fn default() -> Self {
        Self::harmonic(DEFAULT_HARMONIC_DIMENSION).expect("default dimension is valid")
    }
}

impl PhaseBasis {
    pub fn harmonic(dimension: usize) -> Result<Self> {
        let basis = Self {
            kind: BasisKind::HarmonicOscillator,
            dimension,
            grid_extent: None,
            oscillator_length: None,
            stencil_half_width: DEFAULT_STENCIL_HALF_WIDTH,
        };
        basis.validate()?;
        Ok(basis)
    }

    pub fn discretized_phase(dimension: usize, grid_extent: f64) -> Result<Self> {
        let basis = Self {
            kind: BasisKind::DiscretizedPhase,
            dimension,
            grid_extent: Some(grid_extent),
            oscillator_length: None,
            stencil_half_width: DEFAULT_STENCIL_HALF_WIDTH,
        };
        basis.validate()?;
        Ok(basis)
    }

    /// Overrides the finite-difference stencil half width (grid basis only).
    pub fn with_stencil_half_width(mut self, half_width: usize) -> Result<Self> {
        self.stencil_half_width = half_width;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(Error::Truncation(format!("basis dimension must be at least 2, got {}", self.dimension)));
        }
        match self.kind {
            BasisKind::HarmonicOscillator => {
                if self.grid_extent.is_some() {
                    return Err(Error::ParameterDomain(
                        "grid_extent is only meaningful for the discretized-phase basis".into(),
                    ));
                }
                if let Some(len) = self.oscillator_length {
                    if !(len.is_finite() && len > 0.0) {
                        return Err(Error::ParameterDomain(format!("oscillator length must be positive, got {len}")));
                    }
                }
            }
            BasisKind::DiscretizedPhase => {
                match self.grid_extent {
                    Some(e) if e.is_finite() && e > 0.0 => {}
                    other => {
                        return Err(Error::ParameterDomain(format!("grid extent must be positive, got {other:?}")))
                    }
                }
                if self.stencil_half_width == 0 || 2 * self.stencil_half_width >= self.dimension {
                    return Err(Error::Truncation(format!(
                        "stencil half width {} does not fit a {}-point grid",
                        self.stencil_half_width, self.dimension
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid_extent(&self) -> Option<f64> {
        self.grid_extent
    }

    pub fn oscillator_length(&self) -> Option<f64> {
        self.oscillator_length
    }

    pub fn stencil_half_width(&self) -> usize {
        self.stencil_half_width
    }

    pub(crate) fn with_oscillator_length(mut self, length: f64) -> Self {
        self.oscillator_length = Some(length);
        self
    }

    /// Grid points and spacing for the discretized-phase basis.
    pub fn grid(&self) -> Option<(Vec<f64>, f64)> {
        let extent = self.grid_extent?;
        let n = self.dimension;
        let step = 2.0 * extent / (n - 1) as f64;
        let points = (0..n).map(|k| -extent + k as f64 * step).collect();
        Some((points, step))
    }
}
