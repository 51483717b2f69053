//! Operator matrices and Hermitian eigendecomposition for one-dimensional
//! circuit Hamiltonians.

mod banded;
mod basis;
mod eigen;
mod hamiltonian;
mod operator;

pub use banded::BandedMatrix;
pub use basis::{BasisKind, PhaseBasis, DEFAULT_HARMONIC_DIMENSION, DEFAULT_STENCIL_HALF_WIDTH};
pub use eigen::{diagonalize, matrix_element, EigenSolution};
pub use hamiltonian::{build_operators, FluxoniumOperators, MIN_HARMONIC_LEVELS};
pub use operator::{Entries, OperatorMatrix, HERMITIAN_TOLERANCE};
