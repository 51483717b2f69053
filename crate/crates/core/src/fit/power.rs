use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{least_squares, FitProblem, FitResult};
use crate::error::{Error, Result};
use crate::loss::{collapse_curve, PowerLossSpec};
use crate::units::A_CRIT;

/// Fewest in-window points accepted by [`fit_power_sweep`].
pub const MIN_POWER_POINTS: usize = 4;

/// A relative standard error above this marks γ as poorly constrained.
pub const GAMMA_RELATIVE_ERROR_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub mean_n: f64,
    pub q_int: f64,
    /// Nonlinearity fitted at this drive.
    #[serde(default)]
    pub a: f64,
}

fn default_fraction() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepFitInput {
    pub points: Vec<PowerPoint>,
    /// Points with `a` above this fraction of a_crit are excluded.
    #[serde(default = "default_fraction")]
    pub a_crit_fraction: f64,
}

impl PowerSweepFitInput {
    pub fn new(points: Vec<PowerPoint>) -> Self {
        Self { points, a_crit_fraction: default_fraction() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepFit {
    pub spec: PowerLossSpec,
    pub result: FitResult,
    /// Largest nonlinearity admitted to the fit.
    pub a_max: f64,
    /// Photon-number span of the points used.
    pub n_range: (f64, f64),
    pub used: usize,
    /// Input indices left out because their nonlinearity exceeds `a_max`.
    pub excluded: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Best `(δ0, β ≥ 0)` for fixed γ with relative weights; returns the weighted cost.
fn project(points: &[PowerPoint], gamma: f64) -> (f64, f64, f64) {
    let m = points.len();
    let a = DMatrix::from_fn(m, 2, |k, j| {
        let w = points[k].q_int;
        if j == 0 {
            w
        } else {
            w * (collapse_curve(gamma * points[k].mean_n) - 1.0)
        }
    });
    let b = DVector::from_element(m, 1.0);
    let cost = |d0: f64, beta: f64| (0..m).map(|k| (a[(k, 0)] * d0 + a[(k, 1)] * beta - 1.0).powi(2)).sum::<f64>();
    let only_d0 = || {
        let d0 = a.column(0).sum() / a.column(0).norm_squared();
        (d0, 0.0, cost(d0, 0.0))
    };
    match a.clone().svd(true, true).solve(&b, 1e-14) {
        Ok(x) if x[1] >= 0.0 && x[0] > 0.0 => (x[0], x[1], cost(x[0], x[1])),
        _ => only_d0(),
    }
}

/// Fits `1/Q_int(⟨n⟩)` to points inside the weak-drive window.
///
/// Residuals are relative, `Q_int · (1/Q_model − 1/Q_int)`. γ is seeded by a
/// scan over a logarithmic grid with `(δ0, β)` solved linearly at each value.
/// Points are sorted and exact duplicates dropped, so the result does not
/// depend on input order.
pub fn fit_power_sweep(input: &PowerSweepFitInput) -> Result<PowerSweepFit> {
    if !(input.a_crit_fraction.is_finite() && input.a_crit_fraction > 0.0) {
        return Err(Error::ParameterDomain(format!("a_crit_fraction must be positive, got {}", input.a_crit_fraction)));
    }
    for (k, p) in input.points.iter().enumerate() {
        if !(p.mean_n.is_finite() && p.mean_n >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "point {k}: photon number {} is negative or not finite",
                p.mean_n
            )));
        }
        if !(p.q_int.is_finite() && p.q_int > 0.0) {
            return Err(Error::ParameterDomain(format!("point {k}: Q_int {} must be positive", p.q_int)));
        }
        if !(p.a.is_finite() && p.a >= 0.0) {
            return Err(Error::ParameterDomain(format!("point {k}: nonlinearity {} must be non-negative", p.a)));
        }
    }
    let a_max = input.a_crit_fraction * A_CRIT;
    let mut warnings = Vec::new();
    let excluded: Vec<usize> = (0..input.points.len()).filter(|&k| input.points[k].a > a_max).collect();
    let mut pts: Vec<PowerPoint> = input.points.iter().copied().filter(|p| p.a <= a_max).collect();
    pts.sort_by(|x, y| x.mean_n.total_cmp(&y.mean_n).then(x.q_int.total_cmp(&y.q_int)).then(x.a.total_cmp(&y.a)));
    let before = pts.len();
    pts.dedup_by(|x, y| x.mean_n == y.mean_n && x.q_int == y.q_int);
    if pts.len() < before {
        warnings.push(format!("dropped {} duplicate points", before - pts.len()));
    }
    if pts.len() < MIN_POWER_POINTS {
        return Err(Error::TooFewPoints(format!(
            "{} points with a ≤ {a_max:.3e}; at least {MIN_POWER_POINTS} are required",
            pts.len()
        )));
    }
    let n_min = pts.iter().map(|p| p.mean_n).filter(|&n| n > 0.0).fold(f64::INFINITY, f64::min);
    let n_max = pts.last().map(|p| p.mean_n).unwrap_or(0.0);
    if !(n_max > 0.0) {
        return Err(Error::TooFewPoints("all points sit at zero photon number".into()));
    }
    let (g_lo, g_hi) = ((1e-3 / n_max).ln(), (1e3 / n_min).ln());
    let mut seed = (0.0, 0.0, 0.0, f64::INFINITY);
    for k in 0..=240 {
        let gamma = (g_lo + (g_hi - g_lo) * k as f64 / 240.0).exp();
        let (d0, beta, cost) = project(&pts, gamma);
        if cost < seed.3 {
            seed = (d0, beta, gamma, cost);
        }
    }
    let (d0, beta, gamma, _) = seed;
    let data = pts.clone();
    let residual = move |p: &[f64]| -> Result<Vec<f64>> {
        Ok(data.iter().map(|pt| pt.q_int * (p[0] + p[1] * (collapse_curve(p[2] * pt.mean_n) - 1.0)) - 1.0).collect())
    };
    let names = ["delta0", "beta", "gamma"].map(String::from).to_vec();
    let problem = FitProblem::new(names, residual, vec![d0, beta, gamma], vec![d0, beta.max(1e-3 * d0), gamma])
        .with_bounds(vec![(f64::MIN_POSITIVE, f64::INFINITY), (0.0, f64::INFINITY), (0.0, f64::INFINITY)]);
    let mut result = least_squares(&problem)?;
    let [d0, beta, gamma] = [result.parameters[0], result.parameters[1], result.parameters[2]];
    let gamma_ok = result.standard_error("gamma").is_some_and(|s| s <= GAMMA_RELATIVE_ERROR_LIMIT * gamma);
    if !gamma_ok {
        let msg = "gamma poorly constrained: the photon-number range does not resolve the saturation knee".to_string();
        warnings.push(msg.clone());
        result.diagnostics.push(msg);
    }
    Ok(PowerSweepFit {
        spec: PowerLossSpec::new(1.0 / d0, beta, gamma),
        result,
        a_max,
        n_range: (pts[0].mean_n, n_max),
        used: pts.len(),
        excluded,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::q_int_power;

    #[test]
    fn too_few_points_in_window() {
        let spec = PowerLossSpec::new(6e4, 5e-6, 0.08);
        let pts: Vec<PowerPoint> = (0..6)
            .map(|k| {
                let n = 10f64.powi(k - 2);
                PowerPoint { mean_n: n, q_int: q_int_power(&spec, n).unwrap(), a: if k < 3 { 1e-4 } else { 0.5 } }
            })
            .collect();
        let err = fit_power_sweep(&PowerSweepFitInput::new(pts)).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints(_)), "{err}");
    }
}
