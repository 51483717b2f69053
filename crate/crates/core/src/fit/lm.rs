//! Bounded Levenberg–Marquardt with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ResidualFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a;
type JacobianFn<'a> = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative change of the residual norm on an accepted step.
    pub residual_tolerance: f64,
    /// Largest `|Δp_j| / scale_j` on a step.
    pub step_tolerance: f64,
    /// Forward-difference step as a fraction of the parameter scale.
    pub difference_step: f64,
    /// Damping used after the first rejected undamped step.
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            residual_tolerance: 1e-10,
            step_tolerance: 1e-12,
            difference_step: 1e-7,
            initial_damping: 1e-3,
        }
    }
}

/// A bounded nonlinear least-squares problem `min ½‖r(p)‖²`.
///
/// Complex residuals are passed as stacked real and imaginary parts.
pub struct FitProblem<'a> {
    pub names: Vec<String>,
    pub residual: Box<ResidualFn<'a>>,
    pub jacobian: Option<Box<JacobianFn<'a>>>,
    pub initial_guess: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    /// Characteristic magnitude of each parameter.
    pub scale: Vec<f64>,
    pub options: FitOptions,
}

impl<'a> FitProblem<'a> {
    pub fn new(
        names: Vec<String>,
        residual: impl Fn(&[f64]) -> Result<Vec<f64>> + Sync + 'a,
        initial_guess: Vec<f64>,
        scale: Vec<f64>,
    ) -> Self {
        let n = initial_guess.len();
        Self {
            names,
            residual: Box::new(residual),
            jacobian: None,
            initial_guess,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            scale,
            options: FitOptions::default(),
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_jacobian(mut self, jacobian: impl Fn(&[f64]) -> Result<DMatrix<f64>> + Sync + 'a) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }

    pub fn with_options(mut self, options: FitOptions) -> Self {
        self.options = options;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.initial_guess.len();
        if n == 0 {
            return Err(Error::InvalidProblem("no free parameters".into()));
        }
        if self.names.len() != n || self.bounds.len() != n || self.scale.len() != n {
            return Err(Error::InvalidProblem(format!(
                "{n} parameters but {} names, {} bounds and {} scales",
                self.names.len(),
                self.bounds.len(),
                self.scale.len()
            )));
        }
        for (k, ((&p, &(lo, hi)), &s)) in self.initial_guess.iter().zip(&self.bounds).zip(&self.scale).enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidProblem(format!("scale of {} must be positive, got {s}", self.names[k])));
            }
            if !(p.is_finite() && lo <= p && p <= hi) {
                return Err(Error::InvalidProblem(format!(
                    "initial {} = {p} lies outside [{lo}, {hi}]",
                    self.names[k]
                )));
            }
        }
        Ok(())
    }

    fn residuals(&self, p: &[f64]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec((self.residual)(p)?))
    }

    fn jacobian_at(&self, p: &[f64], r: &DVector<f64>) -> Result<DMatrix<f64>> {
        if let Some(j) = &self.jacobian {
            return j(p);
        }
        let columns: Vec<DVector<f64>> = (0..p.len())
            .into_par_iter()
            .map(|j| {
                let (lo, hi) = self.bounds[j];
                let mut h = self.options.difference_step * self.scale[j];
                if p[j] + h > hi {
                    h = -h;
                }
                if p[j] + h < lo {
                    return Ok(DVector::zeros(r.len()));
                }
                let mut q = p.to_vec();
                q[j] += h;
                let h = q[j] - p[j];
                let rq = self.residuals(&q)?;
                Ok((rq - r) / h)
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_columns(&columns))
    }
}

/// Outcome of [`least_squares`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub parameters: Vec<f64>,
    /// `s² (JᵀJ)⁻¹` at the optimum with `s² = ‖r‖²/(m − n)`; absent when
    /// `JᵀJ` is numerically singular.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub residual_count: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Residual norm after the start and after every accepted step.
    pub history: Vec<f64>,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.parameters[k])
    }

    pub fn standard_error(&self, name: &str) -> Option<f64> {
        let k = self.names.iter().position(|n| n == name)?;
        self.covariance.as_ref().map(|c| c[k][k].max(0.0).sqrt())
    }

    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        self.covariance.as_ref().map(|c| (0..c.len()).map(|k| c[k][k].max(0.0).sqrt()).collect())
    }
}

fn clamp(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn is_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Solves `min ‖J δ + r‖² + λ‖D δ‖²` through a QR factorization of the
/// stacked system.
fn damped_step(j: &DMatrix<f64>, r: &DVector<f64>, diag: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let (m, n) = j.shape();
    let mut a = DMatrix::zeros(m + n, n);
    a.rows_mut(0, m).copy_from(j);
    let mut b = DVector::zeros(m + n);
    b.rows_mut(0, m).copy_from(&(-r));
    for k in 0..n {
        a[(m + k, k)] = (lambda * diag[k]).sqrt();
    }
    let qr = a.qr();
    let rhs = qr.q().transpose() * b;
    let step = qr.r().solve_upper_triangular(&rhs)?;
    is_finite(&step).then_some(step)
}

fn covariance(j: &DMatrix<f64>, cost2: f64, diagnostics: &mut Vec<String>) -> Option<Vec<Vec<f64>>> {
    let (m, n) = j.shape();
    // Column equilibration keeps the singularity test independent of units.
    let norms: Vec<f64> = (0..n).map(|k| j.column(k).norm()).collect();
    if norms.iter().any(|&c| c == 0.0 || !c.is_finite()) {
        diagnostics.push("covariance unavailable: a parameter does not affect the residuals".into());
        return None;
    }
    let scaled = DMatrix::from_fn(m, n, |i, k| j[(i, k)] / norms[k]);
    let svd = scaled.svd(false, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        diagnostics.push(format!("covariance unavailable: Jacobian condition {:.2e}", smax / smin));
        return None;
    }
    let v_t = svd.v_t.as_ref()?;
    let s2 = if m > n { cost2 / (m - n) as f64 } else { 1.0 };
    let mut cov = vec![vec![0.0; n]; n];
    for (a, row) in cov.iter_mut().enumerate() {
        for (b, c) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                let sk = svd.singular_values[k];
                acc += v_t[(k, a)] * v_t[(k, b)] / (sk * sk);
            }
            *c = s2 * acc / (norms[a] * norms[b]);
        }
    }
    Some(cov)
}

/// Damped Gauss–Newton. Each iteration first tries the current damping
/// (zero initially, so a linear problem is solved in one step), raises it ×10
/// on rejection and lowers it ÷10 on acceptance. Trial points are clamped to
/// the bounds; a trial point with a non-finite or failing residual counts as
/// rejected.
pub fn least_squares(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let opts = problem.options;
    let n = problem.initial_guess.len();
    let mut p = problem.initial_guess.clone();
    let mut r = problem.residuals(&p)?;
    let m = r.len();
    if m < n {
        return Err(Error::InvalidProblem(format!("{m} residuals cannot determine {n} parameters")));
    }
    if !is_finite(&r) {
        return Err(Error::FitAborted("residual is not finite at the initial guess".into()));
    }
    let mut cost2 = r.norm_squared();
    let mut history = vec![cost2.sqrt()];
    let mut diagnostics = Vec::new();
    let mut lambda = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = problem.jacobian_at(&p, &r)?;

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        if !jac.iter().all(|v| v.is_finite()) {
            return Err(Error::FitAborted(format!("non-finite Jacobian at iteration {iterations}")));
        }
        if cost2 == 0.0 {
            converged = true;
            break;
        }
        let col_sq: Vec<f64> = (0..n).map(|k| jac.column(k).norm_squared()).collect();
        let floor = col_sq.iter().cloned().fold(0.0, f64::max) * 1e-15;
        let diag = DVector::from_iterator(n, col_sq.iter().map(|&d| d.max(floor).max(f64::MIN_POSITIVE)));
        loop {
            let Some(step) = damped_step(&jac, &r, &diag, lambda) else {
                lambda = if lambda == 0.0 { opts.initial_damping } else { lambda * 10.0 };
                if lambda > 1e20 {
                    diagnostics.push("damped system could not be solved".into());
                    break 'outer;
                }
                continue;
            };
            let mut trial = p.clone();
            for k in 0..n {
                trial[k] += step[k];
            }
            clamp(&mut trial, &problem.bounds);
            let taken: Vec<f64> = (0..n).map(|k| (trial[k] - p[k]) / problem.scale[k]).collect();
            let step_size = taken.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let trial_r = match problem.residuals(&trial) {
                Ok(v) if is_finite(&v) => Some(v),
                Ok(_) => {
                    diagnostics.push(format!("non-finite residual at a trial point in iteration {iterations}"));
                    None
                }
                Err(e) => {
                    diagnostics.push(format!("trial point rejected in iteration {iterations}: {e}"));
                    None
                }
            };
            if let Some(tr) = trial_r.filter(|tr| tr.norm_squared() < cost2) {
                let new_cost2 = tr.norm_squared();
                let rel_change = (cost2.sqrt() - new_cost2.sqrt()) / cost2.sqrt();
                p = trial;
                r = tr;
                cost2 = new_cost2;
                history.push(cost2.sqrt());
                lambda = if lambda < 1e-12 { 0.0 } else { lambda / 10.0 };
                if rel_change < opts.residual_tolerance || step_size < opts.step_tolerance {
                    converged = true;
                    break 'outer;
                }
                jac = problem.jacobian_at(&p, &r)?;
                continue 'outer;
            }
            if step_size < opts.step_tolerance {
                converged = true;
                break 'outer;
            }
            lambda = if lambda == 0.0 { opts.initial_damping } else { lambda * 10.0 };
            if lambda > 1e20 {
                diagnostics.push("damping saturated without decreasing the residual".into());
                converged = true;
                break 'outer;
            }
        }
    }
    if !converged {
        diagnostics.push(format!("stopped after {iterations} iterations without meeting a tolerance"));
    }
    let final_jac = problem.jacobian_at(&p, &r)?;
    let covariance = covariance(&final_jac, cost2, &mut diagnostics);
    diagnostics.dedup();
    Ok(FitResult {
        names: problem.names.clone(),
        parameters: p,
        covariance,
        residual_norm: cost2.sqrt(),
        residual_count: m,
        converged,
        iterations,
        history,
        diagnostics,
    })
}
