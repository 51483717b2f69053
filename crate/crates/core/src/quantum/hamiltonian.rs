use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::banded::BandedMatrix;
use super::basis::{BasisKind, PhaseBasis};
use super::operator::OperatorMatrix;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Smallest harmonic truncation that can represent `cos φ` meaningfully.
pub const MIN_HARMONIC_LEVELS: usize = 4;

/// Hamiltonian and the operators needed for matrix elements, all in GHz or
/// dimensionless units on one basis.
#[derive(Debug, Clone)]
pub struct FluxoniumOperators {
    pub hamiltonian: OperatorMatrix,
    pub phi: OperatorMatrix,
    pub n: OperatorMatrix,
    pub sin_half_phi: OperatorMatrix,
}

/// Builds `H = 4 E_C n² − E_J cos φ + ½ E_L (φ − 2π Φ_ext)²` with `φ`, `n`
/// and `sin(φ/2)` on the same basis. Energies in GHz, flux in units of Φ0.
///
/// `e_j = 0` is accepted and gives the bare oscillator.
pub fn build_operators(basis: &PhaseBasis, e_c: f64, e_j: f64, e_l: f64, phi_ext: f64) -> Result<FluxoniumOperators> {
    check_energy("E_C", e_c, false)?;
    check_energy("E_J", e_j, true)?;
    check_energy("E_L", e_l, false)?;
    if !phi_ext.is_finite() {
        return Err(Error::ParameterDomain(format!("external flux must be finite, got {phi_ext}")));
    }
    basis.validate()?;
    let phase_offset = 2.0 * PI * phi_ext;
    match basis.kind() {
        BasisKind::HarmonicOscillator => harmonic(basis, e_c, e_j, e_l, phase_offset),
        BasisKind::DiscretizedPhase => grid(basis, e_c, e_j, e_l, phase_offset),
    }
}

fn check_energy(name: &str, value: f64, allow_zero: bool) -> Result<()> {
    let ok = value.is_finite() && (value > 0.0 || (allow_zero && value == 0.0));
    if !ok {
        let bound = if allow_zero { "non-negative" } else { "positive" };
        return Err(Error::ParameterDomain(format!("{name} must be {bound}, got {value}")));
    }
    Ok(())
}

fn harmonic(basis: &PhaseBasis, e_c: f64, e_j: f64, e_l: f64, phase_offset: f64) -> Result<FluxoniumOperators> {
    let n = basis.dimension();
    if n < MIN_HARMONIC_LEVELS {
        return Err(Error::Truncation(format!(
            "harmonic basis needs at least {MIN_HARMONIC_LEVELS} levels to represent cos φ, got {n}"
        )));
    }
    let length = (8.0 * e_c / e_l).powf(0.25);
    let omega = (8.0 * e_c * e_l).sqrt();
    let basis = basis.clone().with_oscillator_length(length);

    // θ = φ − 2πΦ_ext = ℓ (a + a†)/√2
    let theta =
        DMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i + 1 == j || j + 1 == i {
                    length / SQRT_2 * (i.max(j) as f64).sqrt()
                } else {
                    0.0
                }
            },
        );
    let eig = SymmetricEigen::new(theta.clone());
    let v = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let matrix_function = |f: &dyn Fn(f64) -> f64| {
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(lambda[k]);
        }
        &scaled * v.transpose()
    };
    let cos_phi = matrix_function(&|t| (t + phase_offset).cos());
    let sin_half = matrix_function(&|t| (0.5 * (t + phase_offset)).sin());

    let mut h = cos_phi * (-e_j);
    for k in 0..n {
        h[(k, k)] += omega * (k as f64 + 0.5);
    }
    let phi = theta + DMatrix::identity(n, n) * phase_offset;
    let n_scale = 1.0 / (SQRT_2 * length);
    let n_op = DMatrix::from_fn(n, n, |i, j| {
        // n = i (a† − a)/(√2 ℓ)
        if i == j + 1 {
            C64::new(0.0, n_scale * (i as f64).sqrt())
        } else if j == i + 1 {
            C64::new(0.0, -n_scale * (j as f64).sqrt())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(FluxoniumOperators {
        hamiltonian: OperatorMatrix::dense_real(basis.clone(), symmetrize(h)),
        phi: OperatorMatrix::dense_real(basis.clone(), phi),
        n: OperatorMatrix::dense(basis.clone(), n_op),
        sin_half_phi: OperatorMatrix::dense_real(basis, symmetrize(sin_half)),
    })
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn grid(basis: &PhaseBasis, e_c: f64, e_j: f64, e_l: f64, phase_offset: f64) -> Result<FluxoniumOperators> {
    let (points, step) = basis.grid().expect("grid basis has an extent");
    let n = points.len();
    let p = basis.stencil_half_width();
    let second = second_derivative_stencil(p);
    let first = first_derivative_stencil(p);
    let kinetic = 4.0 * e_c / (step * step);

    let mut h = BandedMatrix::zeros(n, p);
    let mut n_op = BandedMatrix::zeros(n, p);
    let mut phi = BandedMatrix::zeros(n, 0);
    let mut sin_half = BandedMatrix::zeros(n, 0);
    for (i, &x) in points.iter().enumerate() {
        let potential = 0.5 * e_l * (x - phase_offset).powi(2) - e_j * x.cos();
        h.set(i, i, C64::new(-kinetic * second[0] + potential, 0.0));
        phi.set(i, i, C64::new(x, 0.0));
        sin_half.set(i, i, C64::new((0.5 * x).sin(), 0.0));
        for k in 1..=p {
            if i + k < n {
                let hk = C64::new(-kinetic * second[k], 0.0);
                h.set(i, i + k, hk);
                h.set(i + k, i, hk);
                // n = −i d/dφ
                let nk = first[k] / step;
                n_op.set(i, i + k, C64::new(0.0, -nk));
                n_op.set(i + k, i, C64::new(0.0, nk));
            }
        }
    }
    Ok(FluxoniumOperators {
        hamiltonian: OperatorMatrix::banded(basis.clone(), h),
        phi: OperatorMatrix::banded(basis.clone(), phi),
        n: OperatorMatrix::banded(basis.clone(), n_op),
        sin_half_phi: OperatorMatrix::banded(basis.clone(), sin_half),
    })
}

/// `p!² / ((p−k)! (p+k)!)` evaluated as a running product.
fn factorial_ratio(p: usize, k: usize) -> f64 {
    (1..=k).map(|j| (p + 1 - j) as f64 / (p + j) as f64).product()
}

/// Central second-derivative weights `c_0..c_p` of order `2p`.
pub(crate) fn second_derivative_stencil(p: usize) -> Vec<f64> {
    let mut c = vec![0.0; p + 1];
    for k in 1..=p {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        c[k] = 2.0 * sign * factorial_ratio(p, k) / (k * k) as f64;
    }
    c[0] = -2.0 * (1..=p).map(|k| 1.0 / (k * k) as f64).sum::<f64>();
    c
}

/// Central first-derivative weights `d_0..d_p` (`d_0 = 0`) of order `2p`.
pub(crate) fn first_derivative_stencil(p: usize) -> Vec<f64> {
    let mut d = vec![0.0; p + 1];
    for k in 1..=p {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        d[k] = sign * factorial_ratio(p, k) / k as f64;
    }
    d
}
