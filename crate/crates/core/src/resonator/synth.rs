use nalgebra::Complex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::cubic::SweepDirection;
use super::model::{s21_model, Baseline, ResonanceParams};
use super::trace::SweepTrace;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// `points` frequencies spanning `±half_span` linewidths (f0/Q_tot) around f0.
pub fn linewidth_grid(f0: f64, q_tot: f64, half_span: f64, points: usize) -> Vec<f64> {
    let lw = f0 / q_tot;
    let step = 2.0 * half_span * lw / (points - 1) as f64;
    (0..points).map(|k| f0 - half_span * lw + k as f64 * step).collect()
}

/// Model trace on `frequencies`, optionally with complex Gaussian noise at
/// `snr_db` relative to the local baseline magnitude.
pub fn synthesize_trace<R: Rng + ?Sized>(
    params: &ResonanceParams,
    baseline: &Baseline,
    frequencies: Vec<f64>,
    direction: SweepDirection,
    snr_db: Option<f64>,
    rng: &mut R,
) -> Result<SweepTrace> {
    params.validate()?;
    baseline.validate()?;
    let mut s21: Vec<C64> = frequencies.iter().map(|&f| s21_model(params, baseline, f, direction)).collect();
    if let Some(snr) = snr_db {
        if !snr.is_finite() {
            return Err(Error::ParameterDomain("SNR must be finite".into()));
        }
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let rel = 10f64.powf(-snr / 20.0) / std::f64::consts::SQRT_2;
        for (z, &f) in s21.iter_mut().zip(&frequencies) {
            let sigma = baseline.eval(f).norm() * rel;
            *z += C64::new(sigma * unit.sample(rng), sigma * unit.sample(rng));
        }
    }
    let mut trace = SweepTrace::new(frequencies, s21)?;
    trace.sweep_direction = direction;
    Ok(trace)
}

/// Ranges for randomly drawn resonances and backgrounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisRanges {
    /// GHz
    pub f0: (f64, f64),
    /// Drawn log-uniformly.
    pub q_int: (f64, f64),
    /// Drawn log-uniformly.
    pub q_ext: (f64, f64),
    pub a: (f64, f64),
    /// Asymmetry as a fraction of the linewidth, `x_a · Q_tot`.
    pub asymmetry: (f64, f64),
    /// Baseline phase slope `p1`, rad per unit `x_m`.
    pub phase_slope: (f64, f64),
    pub points: usize,
    /// Half span in linewidths.
    pub half_span: f64,
}

impl Default for SynthesisRanges {
    fn default() -> Self {
        Self {
            f0: (4.0, 8.0),
            q_int: (1e4, 1e5),
            q_ext: (1e4, 1e5),
            a: (0.1, 0.6),
            asymmetry: (-0.2, 0.2),
            phase_slope: (-2000.0, 2000.0),
            points: 801,
            half_span: 8.0,
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Draws a resonance, a smooth background and a frequency grid.
pub fn draw_resonance<R: Rng + ?Sized>(rng: &mut R, ranges: &SynthesisRanges) -> (ResonanceParams, Baseline, Vec<f64>) {
    let f0 = uniform(rng, ranges.f0);
    let q_int = log_uniform(rng, ranges.q_int);
    let q_ext = log_uniform(rng, ranges.q_ext);
    let mut params = ResonanceParams::new(f0, q_int, q_ext).with_nonlinearity(uniform(rng, ranges.a));
    params.x_a = uniform(rng, ranges.asymmetry) / params.q_tot();
    let baseline = Baseline {
        g0: uniform(rng, (0.5, 2.0)),
        g1: uniform(rng, (-20.0, 20.0)),
        g2: uniform(rng, (-1e4, 1e4)),
        p0: uniform(rng, (-std::f64::consts::PI, std::f64::consts::PI)),
        p1: uniform(rng, ranges.phase_slope),
        f_m: f0,
    };
    let grid = linewidth_grid(f0, params.q_tot(), ranges.half_span, ranges.points);
    (params, baseline, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_draws_repeat() {
        let r = SynthesisRanges::default();
        let a = draw_resonance(&mut ChaCha8Rng::seed_from_u64(7), &r);
        let b = draw_resonance(&mut ChaCha8Rng::seed_from_u64(7), &r);
        assert_eq!(a, b);
    }

    #[test]
    fn noise_level_matches_snr() {
        let p = ResonanceParams::new(5.0, 1e5, 1e5);
        let b = Baseline { g0: 2.0, ..Baseline::unit(5.0) };
        let f = linewidth_grid(5.0, p.q_tot(), 8.0, 4001);
        let clean =
            synthesize_trace(&p, &b, f.clone(), SweepDirection::Up, None, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let noisy =
            synthesize_trace(&p, &b, f, SweepDirection::Up, Some(40.0), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let rms = (clean.s21.iter().zip(&noisy.s21).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 4001.0).sqrt();
        assert!((rms / (2.0 * 1e-2) - 1.0).abs() < 0.05, "{rms}");
    }
}
