use fluxkit::resonator::{
    bistable_window, branch_detuning, linewidth_grid, normalize_trace, photon_number, s21_model, solve_detuning,
    synthesize_trace, Baseline, ResonanceParams, SweepDirection, SweepTrace,
};
use fluxkit::units::A_CRIT;
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

fn cubic(y: f64, y0: f64, a: f64) -> f64 {
    4.0 * y * y * y - 4.0 * y0 * y * y + y - y0 - a
}

/// Roots from sign changes of the raw cubic on a uniform grid, refined by bisection.
fn bracketing_oracle(y0: f64, a: f64, samples: usize) -> Vec<f64> {
    let (lo, hi) = (y0 - 1e-3, y0 + a + 1e-3);
    let h = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    let mut prev = cubic(lo, y0, a);
    for k in 1..=samples {
        let x = lo + k as f64 * h;
        let cur = cubic(x, y0, a);
        if prev == 0.0 {
            roots.push(x - h);
        } else if prev.signum() != cur.signum() {
            let (mut l, mut r) = (x - h, x);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                if cubic(m, y0, a).signum() == cubic(l, y0, a).signum() {
                    l = m;
                } else {
                    r = m;
                }
            }
            roots.push(0.5 * (l + r));
        }
        prev = cur;
    }
    roots
}

fn discriminant(y0: f64, a: f64) -> f64 {
    let (p, q, r, s) = (4.0, -4.0 * y0, 1.0, -(y0 + a));
    18.0 * p * q * r * s - 4.0 * q.powi(3) * s + q * q * r * r - 4.0 * p * r.powi(3) - 27.0 * p * p * s * s
}

#[test]
fn three_roots_match_bracketing_oracle() {
    let roots = solve_detuning(2.0, 1.0);
    let oracle = bracketing_oracle(2.0, 1.0, 1_000_000);
    assert_eq!(roots.len(), oracle.len());
    for (r, o) in roots.iter().zip(&oracle) {
        assert!((r - o).abs() < 1e-10, "{r} vs {o}");
    }
}

#[test]
fn double_root_at_critical_drive() {
    let y0 = -(3f64.sqrt()) / 2.0;
    let d = discriminant(y0, A_CRIT);
    assert!(d.abs() < 1e-9, "{d}");
    let roots = solve_detuning(y0, A_CRIT);
    let triple = -1.0 / (2.0 * 3f64.sqrt());
    for r in roots {
        assert!((r - triple).abs() < 1e-4, "{r}");
    }
}

#[test]
fn window_edges_match_discriminant_zeros() {
    for a in [0.8, 1.0, 2.5] {
        let (lo, hi) = bistable_window(a).unwrap();
        // Discriminant is positive (three roots) strictly inside; scan for its zeros.
        let (start, stop, n) = (-a - 3.0, 1.0, 400_000);
        let h = (stop - start) / n as f64;
        let mut edges = Vec::new();
        for k in 0..n {
            let (x0, x1) = (start + k as f64 * h, start + (k + 1) as f64 * h);
            if discriminant(x0, a).signum() != discriminant(x1, a).signum() {
                let (mut l, mut r) = (x0, x1);
                for _ in 0..100 {
                    let m = 0.5 * (l + r);
                    if discriminant(m, a).signum() == discriminant(l, a).signum() {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                edges.push(0.5 * (l + r));
            }
        }
        assert_eq!(edges.len(), 2, "a = {a}: {edges:?}");
        assert!((edges[0] - lo).abs() < 1e-6, "a = {a}: {} vs {lo}", edges[0]);
        assert!((edges[1] - hi).abs() < 1e-6, "a = {a}: {} vs {hi}", edges[1]);
    }
}

fn sweep(params: &ResonanceParams, dir: SweepDirection, grid: &[f64]) -> Vec<C64> {
    grid.iter().map(|&f| s21_model(params, &Baseline::unit(params.f0), f, dir)).collect()
}

#[test]
fn hysteresis_only_inside_the_window() {
    let base = ResonanceParams::new(6.0, 5e4, 3e4).with_asymmetry(2e-6);
    let grid = linewidth_grid(6.0, base.q_tot(), 6.0, 2001);
    for a in [0.3, 0.5] {
        let p = base.with_nonlinearity(a);
        assert_eq!(sweep(&p, SweepDirection::Up, &grid), sweep(&p, SweepDirection::Down, &grid));
    }
    let p = base.with_nonlinearity(1.0);
    let (lo, hi) = bistable_window(1.0).unwrap();
    let up = sweep(&p, SweepDirection::Up, &grid);
    let down = sweep(&p, SweepDirection::Down, &grid);
    let mut differing = 0;
    for ((f, u), d) in grid.iter().zip(&up).zip(&down) {
        let y0 = p.q_tot() * (f - p.f0) / p.f0;
        if y0 < lo || y0 > hi {
            assert_eq!(u, d, "differs outside window at y0 = {y0}");
        } else if (u - d).norm() > 1e-3 {
            differing += 1;
        }
    }
    assert!(differing > 0);
}

#[test]
fn linear_response_is_a_circle() {
    let p = ResonanceParams::new(5.5, 4e4, 2e4).with_asymmetry(3e-6);
    let grid = linewidth_grid(5.5, p.q_tot(), 10.0, 401);
    let z = sweep(&p, SweepDirection::Up, &grid);
    // Algebraic circle fit: x² + y² + D x + E y + F = 0
    let a = DMatrix::from_fn(z.len(), 3, |i, j| [z[i].re, z[i].im, 1.0][j]);
    let b = DVector::from_iterator(z.len(), z.iter().map(|w| -(w.re * w.re + w.im * w.im)));
    let sol = a.svd(true, true).solve(&b, 1e-15).unwrap();
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r = (cx * cx + cy * cy - sol[2]).sqrt();
    let worst = z.iter().map(|w| ((w.re - cx).hypot(w.im - cy) - r).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8 * 2.0 * r, "residual {worst}, diameter {}", 2.0 * r);
}

#[test]
fn photon_number_reference_value() {
    // f0 = 6 GHz, Q_tot = 1e4, Q_ext = 2e4, P_in = 1 fW
    let p = ResonanceParams::new(6.0, 2e4, 2e4);
    assert!((p.q_tot() - 1e4).abs() < 1e-9);
    let n = photon_number(&p, 1e-15, 6.0).unwrap().mean_n;
    assert!((n - 66.720_854_765_498_33).abs() < 1e-9, "{n}");
}

#[test]
fn photon_number_quadruples_with_q_tot() {
    // Q_ext fixed at 2e4; Q_int chosen so that Q_tot goes 5e3 -> 1e4.
    let low = ResonanceParams::new(6.0, 2e4 / 3.0, 2e4);
    let high = ResonanceParams::new(6.0, 2e4, 2e4);
    assert!((high.q_tot() / low.q_tot() - 2.0).abs() < 1e-14);
    let n1 = photon_number(&low, 3e-16, 6.0).unwrap().mean_n;
    let n2 = photon_number(&high, 3e-16, 6.0).unwrap().mean_n;
    assert!((n2 / n1 - 4.0).abs() < 1e-13);
}

fn synthetic(half_span: f64, points: usize) -> SweepTrace {
    synthetic_with(ResonanceParams::new(5.0, 8e4, 4e4).with_asymmetry(1e-6), half_span, points)
}

fn synthetic_with(p: ResonanceParams, half_span: f64, points: usize) -> SweepTrace {
    let grid = linewidth_grid(5.0, p.q_tot(), half_span, points);
    synthesize_trace(&p, &Baseline::unit(5.0), grid, SweepDirection::Up, None, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap()
}

fn with_background(trace: &SweepTrace, gain: f64, phi0: f64, tau: f64) -> SweepTrace {
    let s21 =
        trace.frequencies.iter().zip(&trace.s21).map(|(&f, &z)| z * C64::from_polar(gain, phi0 + tau * f)).collect();
    SweepTrace { s21, ..trace.clone() }
}

fn rms(a: &[C64], b: &[C64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn normalization_is_idempotent() {
    let t = with_background(&synthetic(8.0, 801), 0.3, 1.0, 40.0);
    let once = normalize_trace(&t).unwrap();
    let twice = normalize_trace(&once).unwrap();
    assert!(rms(&once.s21, &twice.s21) < 1e-9);
    assert_eq!(once.frequencies, t.frequencies);
}

#[test]
fn normalization_undoes_gain_and_delay() {
    // Wide span so the wings are transparent to well below the tolerance.
    let clean = synthetic_with(ResonanceParams::new(5.0, 2e6, 2e6), 5e5, 4001);
    let raw = with_background(&clean, 3.7, -2.0, 250.0);
    let norm = normalize_trace(&raw).unwrap();
    assert!(rms(&norm.s21, &clean.s21) < 1e-6, "{}", rms(&norm.s21, &clean.s21));
    // Whatever the span, a background multiplies out exactly.
    let narrow = synthetic(8.0, 801);
    let a = normalize_trace(&narrow).unwrap();
    let b = normalize_trace(&with_background(&narrow, 0.02, 2.5, -90.0)).unwrap();
    assert!(rms(&a.s21, &b.s21) < 1e-9);
}

#[test]
fn pure_delay_becomes_flat() {
    let f: Vec<f64> = (0..500).map(|k| 6.0 + k as f64 * 2e-5).collect();
    let s21 = f.iter().map(|&x| C64::from_polar(0.8, 0.4 - 700.0 * x)).collect();
    let norm = normalize_trace(&SweepTrace::new(f, s21).unwrap()).unwrap();
    let worst = norm.s21.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
    assert!(norm.s21.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
}

proptest! {
    #[test]
    fn subcritical_drive_has_one_root(y0 in -50.0..50.0f64, frac in 0.0..0.999f64) {
        prop_assert_eq!(solve_detuning(y0, frac * A_CRIT).len(), 1);
    }

    #[test]
    fn roots_lie_between_y0_and_y0_plus_a(y0 in -20.0..20.0f64, a in 0.0..5.0f64) {
        let roots = solve_detuning(y0, a);
        prop_assert!(roots.len() == 1 || roots.len() == 3);
        prop_assert!(roots.windows(2).all(|w| w[0] <= w[1]));
        for y in roots {
            prop_assert!(y >= y0 - 1e-12 && y <= y0 + a + 1e-12);
        }
    }

    #[test]
    fn supercritical_drive_is_bistable(a in 0.78..10.0f64) {
        let (lo, hi) = bistable_window(a).unwrap();
        prop_assert!(lo < hi);
        prop_assert_eq!(solve_detuning(0.5 * (lo + hi), a).len(), 3);
    }

    #[test]
    fn branches_agree_where_single_valued(y0 in -20.0..20.0f64, a in 0.0..3.0f64) {
        if solve_detuning(y0, a).len() == 1 {
            prop_assert_eq!(branch_detuning(y0, a, SweepDirection::Up), branch_detuning(y0, a, SweepDirection::Down));
        }
    }

    #[test]
    fn photon_number_is_linear_in_power(p in 1e-20..1e-10f64, k in 0.0..100.0f64, q_int in 1e3..1e6f64) {
        let r = ResonanceParams::new(5.0, q_int, 3e4);
        let n1 = photon_number(&r, p, 5.0).unwrap().mean_n;
        let nk = photon_number(&r, k * p, 5.0).unwrap().mean_n;
        prop_assert!((nk - k * n1).abs() <= 1e-12 * nk.abs().max(1e-300));
    }
}
