use nalgebra::{Complex, DMatrix, DVector, DVectorView, SymmetricEigen};

use super::banded::SymmetricBand;
use super::basis::PhaseBasis;
use super::operator::{Entries, OperatorMatrix};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Lowest eigenpairs of a Hermitian operator, energies ascending.
///
/// Each column of `states` is normalized and its largest-magnitude component
/// is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    energies: Vec<f64>,
    states: DMatrix<C64>,
    basis: PhaseBasis,
}

impl EigenSolution {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> &DMatrix<C64> {
        &self.states
    }

    pub fn state(&self, k: usize) -> DVectorView<'_, C64> {
        self.states.column(k)
    }

    pub fn basis(&self) -> &PhaseBasis {
        &self.basis
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// `E_j − E_i` in GHz.
    pub fn transition(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.energies[j] - self.energies[i])
    }

    /// Energies shifted so the ground state sits at zero.
    pub fn relative_energies(&self) -> Vec<f64> {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| e - e0).collect()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.levels() {
            return Err(Error::IndexOutOfRange { index: k, len: self.levels() });
        }
        Ok(())
    }
}

/// Diagonalizes a Hermitian operator and keeps the lowest `levels` pairs.
///
/// Dense operators go through nalgebra's symmetric eigensolver (real fast path
/// when the matrix has no imaginary part). Real banded operators use Sturm
/// bisection with inverse iteration.
pub fn diagonalize(h: &OperatorMatrix, levels: usize) -> Result<EigenSolution> {
    let dim = h.dimension();
    if levels == 0 || levels > dim {
        return Err(Error::ParameterDomain(format!("levels must lie in 1..={dim}, got {levels}")));
    }
    if !h.is_hermitian() {
        return Err(Error::ContractViolation(format!(
            "operator is not hermitian (max |M - M†| = {:.3e})",
            h.hermiticity_defect()
        )));
    }
    let (energies, states) = match h.entries() {
        Entries::Banded(b) => match b.real_lower_band() {
            Some(band) => banded_pairs(band, levels),
            None => dense_pairs(&b.to_dense(), levels),
        },
        Entries::Dense(m) => dense_pairs(m, levels),
    };
    let (energies, states) = order_ties(energies, states, h.max_abs());
    Ok(EigenSolution { energies, states, basis: h.basis().clone() })
}

fn banded_pairs(band: Vec<Vec<f64>>, levels: usize) -> (Vec<f64>, DMatrix<C64>) {
    let a = SymmetricBand::new(band);
    let energies = a.lowest_eigenvalues(levels);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let scale = energies.iter().fold(1.0_f64, |m, e| m.max(e.abs()));
    for (k, &e) in energies.iter().enumerate() {
        // orthogonalize only within a numerically degenerate cluster
        let start = (0..k).rev().take_while(|&m| (energies[m] - e).abs() <= 1e-10 * scale).last().unwrap_or(k);
        let v = a.eigenvector(e, &vecs[start..k]);
        vecs.push(v);
    }
    let dim = vecs.first().map_or(0, Vec::len);
    let mut states = DMatrix::from_fn(dim, levels, |i, k| C64::new(vecs[k][i], 0.0));
    for k in 0..levels {
        fix_phase(&mut states, k);
    }
    (energies, states)
}

fn dense_pairs(m: &DMatrix<C64>, levels: usize) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if sym.iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(sym.map(|z| z.re));
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.map(|v| C64::new(v, 0.0)))
    } else {
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let energies: Vec<f64> = order.iter().take(levels).map(|&k| values[k]).collect();
    let mut states = DMatrix::from_fn(n, levels, |i, k| vectors[(i, order[k])]);
    for k in 0..levels {
        let norm = states.column(k).norm();
        states.column_mut(k).unscale_mut(norm);
        fix_phase(&mut states, k);
    }
    (energies, states)
}

fn dominant_index(col: DVectorView<'_, C64>) -> usize {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in col.iter().enumerate() {
        // small slack so the lower index wins exact ties in magnitude
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best_abs = z.norm();
            best = i;
        }
    }
    best
}

fn fix_phase(states: &mut DMatrix<C64>, k: usize) {
    let idx = dominant_index(states.column(k));
    let z = states[(idx, k)];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        for v in states.column_mut(k).iter_mut() {
            *v *= phase;
        }
        states[(idx, k)] = C64::new(states[(idx, k)].norm(), 0.0);
    }
}

/// Within clusters of degenerate energies, orders eigenvectors by ascending
/// dominant basis index. Energies keep their sorted order.
fn order_ties(energies: Vec<f64>, mut states: DMatrix<C64>, scale: f64) -> (Vec<f64>, DMatrix<C64>) {
    let tol = 1e-12 * scale.max(1.0);
    let mut start = 0;
    while start < energies.len() {
        let mut end = start + 1;
        while end < energies.len() && energies[end] - energies[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<(usize, DVector<C64>)> =
                (start..end).map(|k| (dominant_index(states.column(k)), states.column(k).into_owned())).collect();
            cols.sort_by_key(|(d, _)| *d);
            for (offset, (_, col)) in cols.into_iter().enumerate() {
                states.set_column(start + offset, &col);
            }
        }
        start = end;
    }
    (energies, states)
}

/// `⟨i|op|j⟩` between retained eigenstates.
pub fn matrix_element(op: &OperatorMatrix, sol: &EigenSolution, i: usize, j: usize) -> Result<C64> {
    sol.check_index(i)?;
    sol.check_index(j)?;
    if op.dimension() != sol.states.nrows() {
        return Err(Error::ContractViolation(format!(
            "operator dimension {} does not match eigenvector length {}",
            op.dimension(),
            sol.states.nrows()
        )));
    }
    let vj = sol.state(j).into_owned();
    let opv = op.apply(&vj);
    Ok(sol.state(i).dotc(&opv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> PhaseBasis {
        PhaseBasis::harmonic(n).unwrap()
    }

    #[test]
    fn pauli_x_spectrum() {
        let op = OperatorMatrix::dense_real(basis(2), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let sol = diagonalize(&op, 2).unwrap();
        assert!((sol.energies()[0] + 1.0).abs() < 1e-14);
        assert!((sol.energies()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shuffled_diagonal_sorts_with_unit_vectors() {
        let d = [3.0, -1.0, 7.0, 0.5];
        let op = OperatorMatrix::dense_real(basis(4), DMatrix::from_diagonal(&DVector::from_row_slice(&d)));
        let sol = diagonalize(&op, 4).unwrap();
        assert_eq!(sol.energies(), &[-1.0, 0.5, 3.0, 7.0]);
        for (k, idx) in [1usize, 3, 0, 2].into_iter().enumerate() {
            assert_eq!(sol.state(k)[idx], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn degenerate_levels_ordered_by_dominant_index() {
        let d = [2.0, 1.0, 2.0, 1.0];
        let op = OperatorMatrix::dense_real(basis(4), DMatrix::from_diagonal(&DVector::from_row_slice(&d)));
        let sol = diagonalize(&op, 4).unwrap();
        let dominant: Vec<usize> = (0..4).map(|k| dominant_index(sol.state(k))).collect();
        assert_eq!(dominant, vec![1, 3, 0, 2]);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_levels() {
        let op = OperatorMatrix::dense_real(basis(2), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(diagonalize(&op, 1), Err(Error::ContractViolation(_))));
        let ok = OperatorMatrix::identity(basis(2));
        assert!(matches!(diagonalize(&ok, 3), Err(Error::ParameterDomain(_))));
        assert!(matches!(diagonalize(&ok, 0), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn complex_hermitian_path() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        );
        let op = OperatorMatrix::dense(basis(2), m);
        let sol = diagonalize(&op, 2).unwrap();
        assert!((sol.energies()[0] + 1.0).abs() < 1e-14);
        let v = sol.state(0).into_owned();
        let r = op.apply(&v) - v * C64::new(sol.energies()[0], 0.0);
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn matrix_element_identity_and_range() {
        let d = [1.0, 2.0, 3.0];
        let h = OperatorMatrix::dense_real(basis(3), DMatrix::from_diagonal(&DVector::from_row_slice(&d)));
        let sol = diagonalize(&h, 2).unwrap();
        let id = OperatorMatrix::identity(basis(3));
        assert!((matrix_element(&id, &sol, 0, 0).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matrix_element(&id, &sol, 0, 1).unwrap().norm() < 1e-10);
        assert!(matches!(matrix_element(&id, &sol, 2, 0), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
    }
}
