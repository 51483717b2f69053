use nalgebra::{Complex, DMatrix, DVector};

use super::banded::BandedMatrix;
use super::basis::PhaseBasis;

type C64 = Complex<f64>;

/// Relative tolerance on `max |M − M†|` for the hermitian flag.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Dense(DMatrix<C64>),
    Banded(BandedMatrix),
}

/// An operator expressed in a [`PhaseBasis`].
///
/// Grid operators keep banded storage so large grids stay cheap; everything
/// else is dense. `hermitian` is computed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: PhaseBasis,
    entries: Entries,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn dense(basis: PhaseBasis, matrix: DMatrix<C64>) -> Self {
        assert!(matrix.is_square(), "operator matrix must be square");
        Self::from_entries(basis, Entries::Dense(matrix))
    }

    /// Dense operator from a real matrix.
    pub fn dense_real(basis: PhaseBasis, matrix: DMatrix<f64>) -> Self {
        Self::dense(basis, matrix.map(|v| C64::new(v, 0.0)))
    }

    pub fn banded(basis: PhaseBasis, matrix: BandedMatrix) -> Self {
        Self::from_entries(basis, Entries::Banded(matrix))
    }

    pub fn identity(basis: PhaseBasis) -> Self {
        let n = basis.dimension();
        let mut m = BandedMatrix::zeros(n, 0);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        Self::banded(basis, m)
    }

    fn from_entries(basis: PhaseBasis, entries: Entries) -> Self {
        let mut op = Self { basis, entries, hermitian: false };
        let scale = op.max_abs();
        op.hermitian = op.hermiticity_defect() <= HERMITIAN_TOLERANCE * scale;
        op
    }

    pub fn basis(&self) -> &PhaseBasis {
        &self.basis
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dimension(&self) -> usize {
        match &self.entries {
            Entries::Dense(m) => m.nrows(),
            Entries::Banded(b) => b.dim(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.entries {
            Entries::Dense(m) => m[(i, j)],
            Entries::Banded(b) => b.get(i, j),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.entries {
            Entries::Dense(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Entries::Banded(b) => b.max_abs(),
        }
    }

    /// Largest element of `|M − M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.entries {
            Entries::Dense(m) => {
                let n = m.nrows();
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in i..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            }
            Entries::Banded(b) => b.hermiticity_defect(),
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        match &self.entries {
            Entries::Dense(m) => m * v,
            Entries::Banded(b) => DVector::from_vec(b.apply(v.as_slice())),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.entries {
            Entries::Dense(m) => m.clone(),
            Entries::Banded(b) => b.to_dense(),
        }
    }

    /// Product `self · other` as a dense operator on the same basis.
    pub fn compose(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::dense(self.basis.clone(), self.to_dense() * other.to_dense())
    }
}
