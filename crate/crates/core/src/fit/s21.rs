use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lm::{least_squares, FitProblem, FitResult};
use crate::error::{Error, Result};
use crate::resonator::{
    normalize_with_factor, s21_model, Baseline, Normalization, Regime, ResonanceParams, SweepDirection, SweepTrace,
};

type C64 = Complex<f64>;

/// A jump is a sample-to-sample step this many times larger than the median step.
pub const JUMP_RATIO: f64 = 10.0;

/// Dip depth required, in units of the RMS noise.
pub const MIN_DIP_TO_NOISE: f64 = 3.0;

/// A fit whose RMS residual is within this factor of the estimated noise is
/// accepted without trying further starts.
const NOISE_FLOOR_FACTOR: f64 = 1.25;

/// Dip depth relative to the background below which even a noiseless trace
/// counts as flat.
pub const MIN_DIP_DEPTH: f64 = 1e-6;

/// A jump must also stand this far above both adjacent steps, which keeps a
/// steep but continuous near-critical slope from counting.
const JUMP_NEIGHBOR_RATIO: f64 = 5.0;
const MIN_FIT_POINTS: usize = 20;
const LINEAR_START: [f64; 1] = [0.0];
const NONLINEAR_STARTS: [f64; 4] = [0.05, 0.3, 0.6, 1.0];
const BIFURCATED_STARTS: [f64; 3] = [1.0, 1.6, 2.5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S21Fit {
    pub params: ResonanceParams,
    pub baseline: Baseline,
    pub result: FitResult,
    pub regime: Regime,
    /// Half-open sample range `[start, end)` the fit used.
    pub fit_range: (usize, usize),
    /// Index `k` of a discontinuity between samples `k` and `k + 1`.
    pub jump_index: Option<usize>,
    /// RMS complex noise of the normalized trace.
    pub noise_rms: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// RMS complex noise from the median sample-to-sample step, which the
/// resonance itself barely moves.
fn noise_rms(z: &[C64]) -> f64 {
    let steps: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    // |Δz| is Rayleigh with scale √2σ for per-component σ; its median is 2σ√ln2.
    let sigma = median(steps) / (2.0 * std::f64::consts::LN_2.sqrt());
    sigma * std::f64::consts::SQRT_2
}

/// Largest deviation from a smooth complex quadratic background, smoothed over
/// five samples.
fn dip_depth(f: &[f64], z: &[C64]) -> f64 {
    let n = f.len();
    let fc = 0.5 * (f[0] + f[n - 1]);
    let half = 0.5 * (f[n - 1] - f[0]);
    let x: Vec<f64> = f.iter().map(|v| (v - fc) / half).collect();
    let a = DMatrix::from_fn(n, 3, |i, j| x[i].powi(j as i32));
    let svd = a.clone().svd(true, true);
    let fit = |vals: DVector<f64>| -> DVector<f64> { &a * svd.solve(&vals, 1e-14).expect("svd with u and v") };
    let re = fit(DVector::from_iterator(n, z.iter().map(|w| w.re)));
    let im = fit(DVector::from_iterator(n, z.iter().map(|w| w.im)));
    let resid: Vec<C64> = (0..n).map(|k| z[k] - C64::new(re[k], im[k])).collect();
    let width = 5.min(n);
    resid.windows(width).map(|w| (w.iter().sum::<C64>() / width as f64).norm()).fold(0.0, f64::max)
}

/// Index of an isolated large step, if any.
fn find_jump(z: &[C64]) -> Option<usize> {
    let steps: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let global = median(steps.clone());
    let (k, &big) = steps.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let before = if k > 0 { steps[k - 1] } else { 0.0 };
    let after = steps.get(k + 1).copied().unwrap_or(0.0);
    (big > JUMP_RATIO * global && big > JUMP_NEIGHBOR_RATIO * before.max(after)).then_some(k)
}

struct Guess {
    f_obs: f64,
    q_tot: f64,
    q_int: f64,
    q_ext: f64,
    x_a: f64,
}

/// Resonance at the fastest motion along the circle, Q from the half-speed
/// width, Q_ext from the dip on resonance.
fn initial_guess(f: &[f64], z: &[C64]) -> Guess {
    let n = f.len();
    let mut speed = vec![0.0; n];
    for k in 1..n - 1 {
        speed[k] = (z[k + 1] - z[k - 1]).norm() / (f[k + 1] - f[k - 1]);
    }
    speed[0] = speed[1];
    speed[n - 1] = speed[n - 2];
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(1);
            let hi = (k + 2).min(n);
            speed[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let peak = (0..n).max_by(|&a, &b| smooth[a].total_cmp(&smooth[b])).unwrap_or(n / 2);
    let half = 0.5 * smooth[peak];
    let left = (0..peak).rev().find(|&k| smooth[k] < half);
    let right = (peak + 1..n).find(|&k| smooth[k] < half);
    let width = match (left, right) {
        (Some(l), Some(r)) => f[r] - f[l],
        (Some(l), None) => 2.0 * (f[peak] - f[l]),
        (None, Some(r)) => 2.0 * (f[r] - f[peak]),
        (None, None) => 0.25 * (f[n - 1] - f[0]),
    };
    let f_obs = f[peak];
    let q_tot = (f_obs / width.max(f64::MIN_POSITIVE)).clamp(10.0, 1e9);
    let dip = C64::new(1.0, 0.0) - z[peak];
    let ratio = dip.re.clamp(1e-3, 0.999);
    let q_ext = q_tot / ratio;
    let q_int = 1.0 / (1.0 / q_tot - 1.0 / q_ext);
    let x_a = (-dip.im / (2.0 * q_tot)).clamp(-1.0 / q_tot, 1.0 / q_tot);
    Guess { f_obs, q_tot, q_int, q_ext, x_a }
}

/// Starting point of one local fit.
#[derive(Debug, Clone, Copy)]
struct Start {
    f0: f64,
    q_int: f64,
    q_ext: f64,
    x_a: f64,
    a: f64,
}

impl Start {
    /// Heuristic start with the dip placed at `f_obs` for nonlinearity `a`.
    fn shifted(guess: &Guess, a: f64) -> Self {
        let f0 = guess.f_obs / (1.0 - a / guess.q_tot);
        Self { f0, q_int: guess.q_int, q_ext: guess.q_ext, x_a: guess.x_a, a }
    }

    fn q_tot(&self) -> f64 {
        1.0 / (1.0 / self.q_int + 1.0 / self.q_ext)
    }
}

/// Closed-form start from the normalized trace.
///
/// `1/(1 − S21)` lies on a straight line whose foot from the origin is
/// `1/N`, with `N = Q/Q_ext − 2iQ x_a`. That fixes the effective detuning
/// `y = Im(N/(1 − S21))/2` of every sample, and the cubic
/// `y = Q (f − f0)/f0 + a/(1 + 4y²)` is then linear in `(Q/f0, Q, a)`.
fn algebraic_start(f: &[f64], z: &[C64], nonlinear: bool) -> Option<Start> {
    let w: Vec<C64> = z.iter().map(|v| C64::new(1.0, 0.0) - v).collect();
    let w_max = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k].norm() >= 0.2 * w_max).collect();
    if keep.len() < 5 {
        return None;
    }
    let u: Vec<C64> = keep.iter().map(|&k| w[k].inv()).collect();
    let m = u.iter().sum::<C64>() / u.len() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for v in &u {
        let d = v - m;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = C64::new(theta.cos(), theta.sin());
    let along = m.re * dir.re + m.im * dir.im;
    let foot = m - dir * along;
    if foot.norm() == 0.0 {
        return None;
    }
    let n = foot.inv();
    let y: Vec<f64> = u.iter().map(|v| 0.5 * (n * v).im).collect();
    let cols = if nonlinear { 3 } else { 2 };
    let a = DMatrix::from_fn(keep.len(), cols, |i, j| match j {
        0 => f[keep[i]],
        1 => 1.0,
        _ => 1.0 / (1.0 + 4.0 * y[i] * y[i]),
    });
    let sol = a.svd(true, true).solve(&DVector::from_column_slice(&y), 1e-14).ok()?;
    let q_tot = -sol[1];
    let f0 = q_tot / sol[0];
    let a_fit = if nonlinear { sol[2].max(0.0) } else { 0.0 };
    let q_ext = q_tot / n.re;
    if !(q_tot > 0.0 && f0 > 0.0 && q_ext > q_tot && f0.is_finite()) {
        return None;
    }
    let q_int = 1.0 / (1.0 / q_tot - 1.0 / q_ext);
    let x_a = (-n.im / (2.0 * q_tot)).clamp(-1.0 / q_tot, 1.0 / q_tot);
    Some(Start { f0, q_int, q_ext, x_a, a: a_fit })
}

fn baseline_from(norm: &Normalization, f_m: f64) -> Baseline {
    Baseline {
        g0: norm.gain,
        g1: 0.0,
        g2: 0.0,
        p0: norm.phase0 + norm.slope * (f_m - norm.f_c),
        p1: norm.slope * f_m,
        f_m,
    }
}

struct Layout {
    nonlinear: bool,
    f_m: f64,
}

impl Layout {
    fn names(&self) -> Vec<String> {
        let mut v = vec!["f0", "q_int", "q_ext", "x_a"];
        if self.nonlinear {
            v.push("a");
        }
        v.extend(["g0", "g1", "g2", "p0", "p1"]);
        v.into_iter().map(String::from).collect()
    }

    fn unpack(&self, p: &[f64]) -> (ResonanceParams, Baseline) {
        let (a, rest) = if self.nonlinear { (p[4], &p[5..]) } else { (0.0, &p[4..]) };
        let params = ResonanceParams { f0: p[0], q_int: p[1], q_ext: p[2], x_a: p[3], a };
        let baseline = Baseline { g0: rest[0], g1: rest[1], g2: rest[2], p0: rest[3], p1: rest[4], f_m: self.f_m };
        (params, baseline)
    }
}

fn fit_from_start(
    f: &[f64],
    raw: &[C64],
    direction: SweepDirection,
    start: &Start,
    base: &Baseline,
    nonlinear: bool,
) -> Result<FitResult> {
    let layout = Layout { nonlinear, f_m: base.f_m };
    let q_tot = start.q_tot();
    let lw = start.f0 / q_tot;
    let span = f[f.len() - 1] - f[0];
    let x_span = f.iter().map(|v| ((v - base.f_m) / base.f_m).abs()).fold(0.0, f64::max).max(1e-12);
    let mut p0 = vec![start.f0, start.q_int, start.q_ext, start.x_a];
    let mut scale = vec![lw, start.q_int, start.q_ext, 1.0 / q_tot];
    let mut bounds = vec![(f[0] - span, f[f.len() - 1] + span), (1.0, 1e12), (1.0, 1e12), (-1.0, 1.0)];
    if nonlinear {
        p0.push(start.a);
        scale.push(0.1);
        bounds.push((0.0, 100.0));
    }
    let g = base.g0;
    p0.extend([base.g0, base.g1, base.g2, base.p0, base.p1]);
    scale.extend([g, g / x_span, g / (x_span * x_span), 1.0, 1.0 / x_span]);
    bounds.extend([
        (1e-12 * g, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ]);
    let names = layout.names();
    let residual = move |p: &[f64]| -> Result<Vec<f64>> {
        let (params, baseline) = layout.unpack(p);
        let mut out = Vec::with_capacity(2 * f.len());
        for (&fk, &zk) in f.iter().zip(raw) {
            let d = s21_model(&params, &baseline, fk, direction) - zk;
            out.push(d.re);
            out.push(d.im);
        }
        Ok(out)
    };
    least_squares(&FitProblem::new(names, residual, p0, scale).with_bounds(bounds))
}

/// Fits the hanger model with a smooth background to one trace.
///
/// The trace is normalized first to seed the background. With
/// `allow_nonlinear` the Duffing parameter `a` is free and several starting
/// values are tried; otherwise `a = 0` and a discontinuity in the trace is an
/// error. A detected discontinuity restricts the fit to the samples swept
/// before it.
pub fn fit_s21(trace: &SweepTrace, allow_nonlinear: bool) -> Result<S21Fit> {
    let (normalized, norm) = normalize_with_factor(trace)?;
    let n = trace.len();
    let z = &normalized.s21;
    let noise = noise_rms(z);
    let depth = dip_depth(&trace.frequencies, z);
    if depth < MIN_DIP_TO_NOISE * noise || depth < MIN_DIP_DEPTH {
        return Err(Error::NoResonance(format!(
            "deviation from a smooth background is {depth:.3e}, below {MIN_DIP_TO_NOISE}× the noise ({noise:.3e})"
        )));
    }
    let jump = find_jump(z);
    let range = match (jump, trace.sweep_direction) {
        (None, _) => (0, n),
        (Some(k), _) if !allow_nonlinear => {
            return Err(Error::Bifurcated(format!(
                "discontinuity between {:.9} and {:.9} GHz; fit with the nonlinear model or restrict the interval",
                trace.frequencies[k],
                trace.frequencies[k + 1]
            )))
        }
        (Some(k), SweepDirection::Up) => (0, k + 1),
        (Some(k), SweepDirection::Down) => (k + 1, n),
    };
    if range.1 - range.0 < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints(format!(
            "only {} samples precede the discontinuity; at least {MIN_FIT_POINTS} are needed",
            range.1 - range.0
        )));
    }
    let f = &trace.frequencies[range.0..range.1];
    let raw = &trace.s21[range.0..range.1];
    let guess = initial_guess(f, &z[range.0..range.1]);
    let base = baseline_from(&norm, guess.f_obs);
    let a_starts: &[f64] = match (allow_nonlinear, jump) {
        (false, _) => &LINEAR_START,
        (true, None) => &NONLINEAR_STARTS,
        (true, Some(_)) => &BIFURCATED_STARTS,
    };
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    let mut keep = |r: Result<FitResult>| match r {
        Ok(r) if best.as_ref().is_none_or(|b| r.residual_norm < b.residual_norm) => best = Some(r),
        Ok(_) => {}
        Err(e) => last_err = Some(e),
    };
    // A fit from the closed-form start that already sits at the noise floor
    // makes the heuristic starts redundant.
    let floor = NOISE_FLOOR_FACTOR * noise * norm.gain * (f.len() as f64).sqrt();
    let algebraic = algebraic_start(f, &z[range.0..range.1], allow_nonlinear)
        .map(|start| fit_from_start(f, raw, trace.sweep_direction, &start, &base, allow_nonlinear));
    let settled = matches!(&algebraic, Some(Ok(r)) if r.converged && r.residual_norm <= floor);
    if let Some(r) = algebraic {
        keep(r);
    }
    if !settled {
        let starts: Vec<Start> = a_starts.iter().map(|&a| Start::shifted(&guess, a)).collect();
        let fits: Vec<Result<FitResult>> = starts
            .par_iter()
            .map(|start| fit_from_start(f, raw, trace.sweep_direction, start, &base, allow_nonlinear))
            .collect();
        fits.into_iter().for_each(&mut keep);
    }
    let Some(mut result) = best else {
        return Err(last_err.unwrap_or_else(|| Error::FitAborted("no start produced a fit".into())));
    };
    if let Some(k) = jump {
        result.diagnostics.push(format!("discontinuity after sample {k}; fitted samples {}..{}", range.0, range.1));
    }
    let layout = Layout { nonlinear: allow_nonlinear, f_m: base.f_m };
    let (params, baseline) = layout.unpack(&result.parameters);
    Ok(S21Fit {
        params,
        baseline,
        regime: params.regime(),
        result,
        fit_range: range,
        jump_index: jump,
        noise_rms: noise,
    })
}
