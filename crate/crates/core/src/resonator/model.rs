use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::cubic::{branch_detuning, SweepDirection};
use crate::error::{Error, Result};
use crate::units::A_CRIT;

type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NonBifurcated,
    Bifurcated,
}

/// One resonance at one drive power.
///
/// `f0` is the low-power resonance frequency in GHz. The asymmetry is stored
/// as `x_a = δf / f0`. `a` is the effective nonlinearity at this drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceParams {
    pub f0: f64,
    pub q_int: f64,
    pub q_ext: f64,
    #[serde(default)]
    pub x_a: f64,
    #[serde(default)]
    pub a: f64,
}

impl ResonanceParams {
    pub fn new(f0: f64, q_int: f64, q_ext: f64) -> Self {
        Self { f0, q_int, q_ext, x_a: 0.0, a: 0.0 }
    }

    pub fn with_asymmetry(mut self, x_a: f64) -> Self {
        self.x_a = x_a;
        self
    }

    /// Sets the asymmetry from a frequency offset δf in GHz.
    pub fn with_delta_f(mut self, delta_f: f64) -> Self {
        self.x_a = delta_f / self.f0;
        self
    }

    pub fn with_nonlinearity(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn delta_f(&self) -> f64 {
        self.x_a * self.f0
    }

    pub fn q_tot(&self) -> f64 {
        1.0 / (1.0 / self.q_int + 1.0 / self.q_ext)
    }

    pub fn regime(&self) -> Regime {
        if self.a < A_CRIT {
            Regime::NonBifurcated
        } else {
            Regime::Bifurcated
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("f0", self.f0), ("q_int", self.q_int), ("q_ext", self.q_ext)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.x_a.is_finite() {
            return Err(Error::ParameterDomain("asymmetry must be finite".into()));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::ParameterDomain(format!("nonlinearity must be non-negative, got {}", self.a)));
        }
        Ok(())
    }
}

/// Linear map from drive power to nonlinearity, `a = a_ref · P / P_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveScaling {
    pub a_ref: f64,
    /// Reference power at the resonator, W.
    pub p_ref: f64,
}

impl DriveScaling {
    pub fn nonlinearity_at(&self, p_in: f64) -> f64 {
        self.a_ref * p_in / self.p_ref
    }
}

/// Transmission background: quadratic gain and linear phase in
/// `x_m = (f − f_m)/f_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub g0: f64,
    #[serde(default)]
    pub g1: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default)]
    pub p1: f64,
    pub f_m: f64,
}

impl Baseline {
    pub fn unit(f_m: f64) -> Self {
        Self { g0: 1.0, g1: 0.0, g2: 0.0, p0: 0.0, p1: 0.0, f_m }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g0.is_finite() && self.g0 > 0.0) {
            return Err(Error::ParameterDomain(format!("baseline g0 must be positive, got {}", self.g0)));
        }
        if !(self.f_m.is_finite() && self.f_m > 0.0) {
            return Err(Error::ParameterDomain("baseline reference frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn eval(&self, f: f64) -> C64 {
        let xm = (f - self.f_m) / self.f_m;
        let gain = self.g0 + self.g1 * xm + self.g2 * xm * xm;
        C64::from_polar(gain, self.p0 + self.p1 * xm)
    }
}

/// Resonator response in reduced units, without baseline.
///
/// `x0 = (f − f0)/f0`; `q_r` is the loaded Q.
pub fn s21_reduced(q_r: f64, q_c: f64, x_a: f64, a: f64, x0: f64, direction: SweepDirection) -> C64 {
    let y = if a == 0.0 { q_r * x0 } else { branch_detuning(q_r * x0, a, direction) };
    let num = C64::new(q_r / q_c, -2.0 * q_r * x_a);
    let den = C64::new(1.0, 2.0 * y);
    C64::new(1.0, 0.0) - num / den
}

/// Hanger transmission with Duffing self-consistency, times the baseline.
pub fn s21_model(params: &ResonanceParams, baseline: &Baseline, f: f64, direction: SweepDirection) -> C64 {
    let x0 = (f - params.f0) / params.f0;
    s21_reduced(params.q_tot(), params.q_ext, params.x_a, params.a, x0, direction) * baseline.eval(f)
}
