//! Fluxonium and coupled fluxonium–resonator models, plus wire inductance
//! bookkeeping.

mod coupled;
mod fluxonium;
mod wire;

pub use coupled::{
    coupled_hamiltonian, coupled_spectrum, dressed_point, CoupledHamiltonian, CoupledSystemSpec, Coupling,
    DressedPoint, FluxSpectrum, ModeSpec, BRANCH_RESOLUTION_GHZ, DEFAULT_QUBIT_LEVELS, DEFAULT_READOUT_PHOTONS,
    DEFAULT_SPURIOUS_PHOTONS,
};
pub use fluxonium::{fluxonium_spectrum, transitions_from_ground, CircuitSpec};
pub use wire::{wire_inductance, WireGeometry, WireInductance};
