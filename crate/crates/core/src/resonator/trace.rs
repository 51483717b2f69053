use std::f64::consts::PI;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::cubic::SweepDirection;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Shortest trace `normalize_trace` accepts.
pub const MIN_NORMALIZE_POINTS: usize = 20;

/// Line attenuation measured at a few frequencies, dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationTable {
    /// `(frequency GHz, attenuation dB)`, ascending in frequency.
    points: Vec<(f64, f64)>,
}

impl AttenuationTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::ParameterDomain(format!(
                "attenuation table needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(f, db)| !f.is_finite() || !db.is_finite()) {
            return Err(Error::ParameterDomain("attenuation table has non-finite entries".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::ParameterDomain("attenuation table has repeated frequencies".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Quadratic through the three tabulated points nearest to `f`.
    pub fn at(&self, f: f64) -> f64 {
        let n = self.points.len();
        let nearest =
            self.points.iter().enumerate().min_by(|a, b| (a.1 .0 - f).abs().total_cmp(&(b.1 .0 - f).abs())).unwrap().0;
        let start = nearest.saturating_sub(1).min(n - 3);
        let p = &self.points[start..start + 3];
        let mut acc = 0.0;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if i != j {
                    w *= (f - p[j].0) / (p[i].0 - p[j].0);
                }
            }
            acc += w * p[i].1;
        }
        acc
    }
}

/// One frequency sweep of complex transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    /// Strictly increasing, GHz.
    pub frequencies: Vec<f64>,
    pub s21: Vec<C64>,
    /// Instrument output power, dBm.
    #[serde(default)]
    pub drive_power: Option<f64>,
    #[serde(default)]
    pub line_attenuation: Option<AttenuationTable>,
    #[serde(default)]
    pub sweep_direction: SweepDirection,
}

impl SweepTrace {
    pub fn new(frequencies: Vec<f64>, s21: Vec<C64>) -> Result<Self> {
        let trace =
            Self { frequencies, s21, drive_power: None, line_attenuation: None, sweep_direction: SweepDirection::Up };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.s21.len() {
            return Err(Error::ParameterDomain(format!(
                "{} frequencies but {} samples",
                self.frequencies.len(),
                self.s21.len()
            )));
        }
        if self.frequencies.len() < 3 {
            return Err(Error::ParameterDomain("trace needs at least 3 points".into()));
        }
        for (k, w) in self.frequencies.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::ParameterDomain(format!("frequency not strictly increasing at index {}", k + 1)));
            }
        }
        if let Some(k) = self.frequencies.iter().position(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::ParameterDomain(format!("invalid frequency at index {k}")));
        }
        if let Some(k) = self.s21.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::ParameterDomain(format!("non-finite S21 at index {k}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Power reaching the resonator at `f0`, W, if the drive is known.
    pub fn input_power(&self, f0: f64) -> Option<f64> {
        let dbm = self.drive_power?;
        let att = self.line_attenuation.as_ref().map_or(0.0, |t| t.at(f0));
        Some(crate::units::dbm_to_watts(dbm, att))
    }
}

/// Number of samples at each end treated as off-resonant wings.
pub(crate) fn wing_count(n: usize) -> usize {
    (n / 10).max(5).min(n / 2)
}

pub(crate) fn wing_indices(n: usize) -> impl Iterator<Item = usize> {
    let w = wing_count(n);
    (0..w).chain((n - w)..n)
}

pub(crate) fn unwrap_phase(values: &[C64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for z in values {
        let raw = z.arg();
        if let Some(p) = prev {
            let mut d = raw + offset - p;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        let v = raw + offset;
        out.push(v);
        prev = Some(v);
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Gain and phase line removed by [`normalize_trace`]:
/// `S_norm(f) = S(f) / (gain · e^{i(phase0 + slope·(f − f_c))})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub gain: f64,
    pub phase0: f64,
    /// rad/GHz
    pub slope: f64,
    /// Center frequency the phase line is referenced to, GHz.
    pub f_c: f64,
}

impl Normalization {
    pub fn factor(&self, f: f64) -> C64 {
        C64::from_polar(self.gain, self.phase0 + self.slope * (f - self.f_c))
    }
}

/// Scales the off-resonant median of |S21| to one and removes the linear
/// phase (cable delay) fitted on the wings. The input is left untouched.
pub fn normalize_trace(trace: &SweepTrace) -> Result<SweepTrace> {
    Ok(normalize_with_factor(trace)?.0)
}

pub(crate) fn normalize_with_factor(trace: &SweepTrace) -> Result<(SweepTrace, Normalization)> {
    trace.validate()?;
    let n = trace.len();
    if n < MIN_NORMALIZE_POINTS {
        return Err(Error::Preprocessing(format!(
            "trace has {n} points; at least {MIN_NORMALIZE_POINTS} are needed to identify the wings"
        )));
    }
    let gain = median(wing_indices(n).map(|k| trace.s21[k].norm()).collect());
    if !(gain > 0.0) {
        return Err(Error::Preprocessing("off-resonant magnitude is zero".into()));
    }
    let phase = unwrap_phase(&trace.s21);
    let f_c = 0.5 * (trace.frequencies[0] + trace.frequencies[n - 1]);
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in wing_indices(n) {
        let x = trace.frequencies[k] - f_c;
        sx += x;
        sy += phase[k];
        sxx += x * x;
        sxy += x * phase[k];
        m += 1.0;
    }
    let denom = m * sxx - sx * sx;
    let slope = if denom > 0.0 { (m * sxy - sx * sy) / denom } else { 0.0 };
    let phase0 = (sy - slope * sx) / m;
    let norm = Normalization { gain, phase0, slope, f_c };
    let s21 = trace.frequencies.iter().zip(&trace.s21).map(|(&f, &z)| z / norm.factor(f)).collect();
    Ok((SweepTrace { s21, ..trace.clone() }, norm))
}
