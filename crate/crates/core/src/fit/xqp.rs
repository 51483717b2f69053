use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lm::{least_squares, FitProblem, FitResult};
use crate::error::{Error, Result};
use crate::loss::gap_ratio_sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityPoint {
    /// GHz
    pub f0: f64,
    /// Internal Q in the low-power limit.
    pub q_int: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XqpFit {
    pub x_qp: f64,
    pub x_qp_error: Option<f64>,
    /// Infinite when the fitted non-quasiparticle loss is not positive.
    pub q0: f64,
    pub inverse_q0: f64,
    pub inverse_q0_error: Option<f64>,
    pub result: FitResult,
    pub warnings: Vec<String>,
}

/// Two-parameter fit of `1/Q_int = 1/Q0 + (α/π)√(2Δ/h f0) x_qp` across
/// resonators of one film, with relative residuals. Δ in µeV.
///
/// The model is linear in `(1/Q0, x_qp)`; unphysical signs are reported, not
/// clamped.
pub fn fit_xqp_frequency(points: &[QualityPoint], alpha: f64, delta: f64) -> Result<XqpFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(format!("≥3 points required, got {}", points.len())));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::ParameterDomain(format!("kinetic fraction must lie in (0, 1], got {alpha}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::ParameterDomain(format!("gap must be positive, got {delta} µeV")));
    }
    for (k, p) in points.iter().enumerate() {
        if !(p.f0.is_finite() && p.f0 > 0.0 && p.q_int.is_finite() && p.q_int > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "point {k}: f0 = {}, Q_int = {} must be positive",
                p.f0, p.q_int
            )));
        }
    }
    let basis: Vec<f64> = points.iter().map(|p| alpha / PI * gap_ratio_sqrt(delta, p.f0)).collect();
    let q: Vec<f64> = points.iter().map(|p| p.q_int).collect();
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        Ok(q.iter().zip(&basis).map(|(qk, bk)| qk * (p[0] + bk * p[1]) - 1.0).collect())
    };
    let mean_inv_q = q.iter().map(|v| 1.0 / v).sum::<f64>() / q.len() as f64;
    let mean_basis = basis.iter().sum::<f64>() / basis.len() as f64;
    let names = vec!["inverse_q0".to_string(), "x_qp".to_string()];
    let problem = FitProblem::new(names, residual, vec![0.0, 0.0], vec![mean_inv_q, mean_inv_q / mean_basis]);
    let result = least_squares(&problem)?;
    let (inverse_q0, x_qp) = (result.parameters[0], result.parameters[1]);
    let mut warnings = Vec::new();
    if x_qp < 0.0 {
        warnings.push(format!("fitted x_qp = {x_qp:.3e} is negative; the data do not follow the quasiparticle trend"));
    }
    let q0 = if inverse_q0 > 0.0 {
        1.0 / inverse_q0
    } else {
        warnings.push(format!("fitted 1/Q0 = {inverse_q0:.3e} is not positive; reporting Q0 as unbounded"));
        f64::INFINITY
    };
    Ok(XqpFit {
        x_qp,
        x_qp_error: result.standard_error("x_qp"),
        q0,
        inverse_q0,
        inverse_q0_error: result.standard_error("inverse_q0"),
        result,
        warnings,
    })
}
