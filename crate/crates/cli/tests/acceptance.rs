//! Acceptance suite: one line per criterion, exit status nonzero on any
//! failure outside the known-failure list.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fluxkit::circuit::{dressed_point, CircuitSpec, CoupledSystemSpec, ModeSpec};
use fluxkit::fit::{fit_s21, fit_spectrum, fit_xqp_frequency, QualityPoint, SpectrumObservation, TransitionKind};
use fluxkit::loss::{
    array_rate, gamma_inductive, gamma_qp_array, inductive_rate, loss_tangent_power, loss_tangent_scaling, q_ind,
    q_int_power, q_int_quasiparticle, t1_budget_at_flux, LossChannel, QuasiparticleSpec, LOSS_TABLE,
};
use fluxkit::quantum::{build_operators, diagonalize, PhaseBasis};
use fluxkit::resonator::{
    bistable_window, draw_resonance, solve_detuning, synthesize_trace, SweepDirection, SynthesisRanges,
};
use fluxkit::units::A_CRIT;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

struct Verdict {
    passed: bool,
    detail: String,
    /// Set when the failure is the documented, expected one.
    known_failure: bool,
}

impl Verdict {
    fn check(passed: bool, detail: String) -> Self {
        Self { passed, detail, known_failure: false }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
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

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

const FIG_D: (f64, f64, f64) = (0.88, 2.65, 0.72);
const FIG_E: (f64, f64, f64) = (0.96, 3.95, 0.74);

fn eigen_oracle() -> Verdict {
    let start = Instant::now();
    let grid = PhaseBasis::discretized_phase(2001, 12.0 * PI).unwrap();
    let harmonic = PhaseBasis::default();
    let cases: Vec<((f64, f64, f64), f64)> =
        [FIG_D, FIG_E].iter().flat_map(|&p| (0..21).map(move |k| (p, k as f64 / 20.0))).collect();
    let worst = cases
        .par_iter()
        .map(|&((e_c, e_j, e_l), flux)| {
            let levels = |basis: &PhaseBasis| {
                let ops = build_operators(basis, e_c, e_j, e_l, flux).unwrap();
                diagonalize(&ops.hamiltonian, 5).unwrap().energies().to_vec()
            };
            let (h, g) = (levels(&harmonic), levels(&grid));
            h.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let t = start.elapsed();
    Verdict::check(
        worst < 1e-6 && t < Duration::from_secs(30),
        format!("{} circuits x 21 flux points, 5 levels: max |harmonic - grid| = {worst:.2e} GHz (< 1e-6), {:.1} s (< 30 s)", 2, secs(t)),
    )
}

fn cubic(y: f64, y0: f64, a: f64) -> f64 {
    4.0 * y * y * y - 4.0 * y0 * y * y + y - y0 - a
}

/// Real roots from sign changes of the cubic on a uniform grid over
/// `[y0, y0 + a]`, each refined by bisection.
fn bracketed_roots(y0: f64, a: f64, samples: usize) -> Vec<f64> {
    let (lo, hi) = (y0 - 1e-9, y0 + a + 1e-9);
    let h = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    for k in 0..samples {
        let (l, r) = (lo + k as f64 * h, lo + (k + 1) as f64 * h);
        let (fl, fr) = (cubic(l, y0, a), cubic(r, y0, a));
        if fl == 0.0 {
            roots.push(l);
            continue;
        }
        if fl.signum() == fr.signum() {
            continue;
        }
        let (mut l, mut r) = (l, r);
        while r - l > 0.0 {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            if cubic(m, y0, a).signum() == fl.signum() {
                l = m;
            } else {
                r = m;
            }
        }
        roots.push(0.5 * (l + r));
    }
    roots
}

/// Bistability from the shape of the response: the map `y ↦ y − a/(1 + 4y²)`
/// from detuning to generator detuning folds back where its slope is negative.
fn folds(a: f64) -> bool {
    (0..=200_000).map(|k| -2.0 + 4.0 * k as f64 / 200_000.0).any(|y: f64| {
        let s = 1.0 + 4.0 * y * y;
        1.0 + 8.0 * a * y / (s * s) < 0.0
    })
}

fn cubic_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<(f64, f64)> =
        (0..10_000).map(|_| (rng.random_range(-4.0..2.0), rng.random_range(0.0..3.0))).collect();
    let results: Vec<(bool, f64)> = pairs
        .par_iter()
        .map(|&(y0, a)| {
            let got = solve_detuning(y0, a);
            let want = bracketed_roots(y0, a, 20_000);
            let err = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
            (got.len() == want.len(), err)
        })
        .collect();
    let count_ok = results.iter().all(|r| r.0);
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let three = pairs.iter().filter(|&&(y0, a)| solve_detuning(y0, a).len() == 3).count();

    let scan: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let mismatches: Vec<f64> = scan
        .par_iter()
        .copied()
        .filter(|&a| {
            let solver = bistable_window(a).is_some_and(|(lo, hi)| solve_detuning(0.5 * (lo + hi), a).len() == 3);
            solver != folds(a) || solver != (a > A_CRIT)
        })
        .collect();
    let t = start.elapsed();
    Verdict::check(
        count_ok && worst < 1e-9 && mismatches.is_empty() && t < Duration::from_secs(10),
        format!(
            "10^4 pairs ({three} bistable): root counts {}, max |Δy| = {worst:.1e} (< 1e-9); \
             a scan of 1001 values: {} disagreements with a > 4√3/9; {:.1} s (< 10 s)",
            if count_ok { "agree" } else { "DIFFER" },
            mismatches.len(),
            secs(t)
        ),
    )
}

fn algebraic_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_q: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    let basis = PhaseBasis::harmonic(40).unwrap();
    for k in 0..1000 {
        let qp = QuasiparticleSpec::new(rng.random_range(1e-7..1e-3)).with_delta(rng.random_range(100.0..1000.0));
        let f = rng.random_range(0.1..12.0);
        let resonator = q_int_quasiparticle(&qp.with_alpha(1.0), f64::INFINITY, f).unwrap();
        worst_q = worst_q.max(rel(1.0 / resonator, 1.0 / q_ind(&qp, f).unwrap()));

        let (m2, e_l) = (rng.random_range(1e-3..5.0), rng.random_range(0.2..2.0));
        let micro = array_rate(m2, e_l, &qp, f).unwrap();
        worst_rate = worst_rate.max(rel(micro, inductive_rate(m2, e_l, q_ind(&qp, f).unwrap()).unwrap()));

        // Through real eigenstates on a subset of draws.
        if k % 20 == 0 {
            let (e_c, e_j, flux) = (rng.random_range(0.5..1.5), rng.random_range(1.0..5.0), rng.random_range(0.0..0.5));
            let ops = build_operators(&basis, e_c, e_j, e_l, flux).unwrap();
            let sol = diagonalize(&ops.hamiltonian, 2).unwrap();
            let f01 = sol.transition(0, 1).unwrap();
            let a = gamma_qp_array(&sol, &ops.phi, e_l, &qp, f01, 0, 1).unwrap();
            let b = gamma_inductive(&sol, &ops.phi, e_l, q_ind(&qp, f01).unwrap(), 0, 1).unwrap();
            worst_gamma = worst_gamma.max(rel(a, b));
        }
    }
    let worst = worst_q.max(worst_rate).max(worst_gamma);
    Verdict::check(
        worst < 1e-12,
        format!(
            "10^3 draws: resonator Q (α = 1) vs inductor Q {worst_q:.1e}, array rate vs lossy inductor {worst_rate:.1e}, \
             through eigenstates {worst_gamma:.1e} (< 1e-12 relative)"
        ),
    )
}

fn power_contract() -> Verdict {
    let grid: Vec<f64> =
        std::iter::once(0.0).chain((0..=160).map(|k| 10f64.powf(-2.0 + 8.0 * k as f64 / 160.0))).collect();
    let mut zero_exact = true;
    let mut monotone = true;
    let mut worst_sat: f64 = 0.0;
    for row in &LOSS_TABLE {
        let spec = row.spec();
        zero_exact &= q_int_power(&spec, 0.0).unwrap() == spec.q0;
        let q: Vec<f64> = grid.iter().map(|&n| q_int_power(&spec, n).unwrap()).collect();
        monotone &= q.windows(2).all(|w| w[1] >= w[0]);
        let saturated = 1.0 / (1.0 / spec.q0 - spec.beta);
        worst_sat = worst_sat.max(rel(q_int_power(&spec, 1e4 / spec.gamma).unwrap(), saturated));
    }
    Verdict::check(
        zero_exact && monotone && worst_sat < 0.01,
        format!(
            "31 rows: Q(0) = Q0 {}, monotone on [0, 1e6] {}, max distance from saturation at γn = 1e4: {:.2}% (< 1%)",
            if zero_exact { "exactly" } else { "VIOLATED" },
            if monotone { "yes" } else { "NO" },
            100.0 * worst_sat
        ),
    )
}

fn loss_tangent_collapse() -> Verdict {
    let u: Vec<f64> = (0..=120).map(|k| 10f64.powf(-3.0 + 8.0 * k as f64 / 120.0)).collect();
    let curves: Vec<Vec<f64>> = LOSS_TABLE
        .iter()
        .map(|row| {
            let spec = row.spec();
            let n: Vec<f64> = u.iter().map(|u| u / spec.gamma).collect();
            loss_tangent_scaling(&spec, &n).unwrap()
        })
        .collect();
    let mut spread: f64 = 0.0;
    for k in 0..u.len() {
        let (lo, hi) = curves.iter().map(|c| c[k]).fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)));
        spread = spread.max(hi - lo);
    }
    // The same rows through the raw loss tangent, rescaled by hand.
    let mut raw_spread: f64 = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        for (row, curve) in LOSS_TABLE.iter().zip(&curves) {
            let spec = row.spec();
            let d = loss_tangent_power(&spec, uk / spec.gamma).unwrap();
            raw_spread = raw_spread.max(((d - (spec.delta0() - spec.beta)) / spec.beta - curve[k]).abs());
        }
    }
    Verdict::check(
        spread < 1e-9 && raw_spread < 1e-9,
        format!("31 rows at 121 values of γn in [1e-3, 1e5]: max pairwise deviation {spread:.1e}, vs direct rescaling {raw_spread:.1e} (< 1e-9)"),
    )
}

fn s21_round_trip() -> Verdict {
    let start = Instant::now();
    let ranges = SynthesisRanges::default();
    let errors: Vec<Result<[f64; 4], String>> = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
            let (truth, baseline, grid) = draw_resonance(&mut rng, &ranges);
            let trace = synthesize_trace(&truth, &baseline, grid, SweepDirection::Up, Some(50.0), &mut rng)
                .map_err(|e| e.to_string())?;
            let fit = fit_s21(&trace, true).map_err(|e| format!("trace {k}: {e}"))?;
            let p = fit.params;
            Ok([rel(p.q_int, truth.q_int), rel(p.q_ext, truth.q_ext), rel(p.f0, truth.f0), rel(p.a, truth.a)])
        })
        .collect();
    let t = start.elapsed();
    let failures: Vec<&String> = errors.iter().filter_map(|e| e.as_ref().err()).collect();
    let mut worst = [0.0f64; 4];
    for e in errors.iter().flatten() {
        for (w, v) in worst.iter_mut().zip(e) {
            *w = w.max(*v);
        }
    }
    Verdict::check(
        failures.is_empty() && worst[0] < 0.01 && worst[1] < 0.01 && worst[2] < 0.01 && worst[3] < 0.05 && t < Duration::from_secs(60),
        format!(
            "100 traces at 50 dB, a in [0.1, 0.6]: worst Q_int {:.2}%, Q_ext {:.2}%, f0 {:.1e} (< 1%), a {:.2}% (< 5%), {} fit errors, {:.1} s (< 60 s)",
            100.0 * worst[0],
            100.0 * worst[1],
            worst[2],
            100.0 * worst[3],
            failures.len(),
            secs(t)
        ),
    )
}

fn fig_d_system(e_c: f64, e_j: f64, e_l: f64, f_r: f64, g: f64) -> CoupledSystemSpec {
    let qubit = CircuitSpec::new(e_c, e_j, e_l, 0.0).with_truncation(PhaseBasis::harmonic(60).unwrap());
    CoupledSystemSpec { qubit_levels: 6, ..CoupledSystemSpec::new(qubit, vec![ModeSpec::readout(f_r, g)]) }
}

fn two_tone(spec: &CoupledSystemSpec, points: usize, noise: f64, seed: u64) -> Vec<SpectrumObservation> {
    let dist = Normal::new(0.0, noise).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 0..points {
        let flux = 0.5 * k as f64 / (points - 1) as f64;
        let p = dressed_point(spec, flux).unwrap();
        let sigma = (noise > 0.0).then_some(noise);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let frequency = p.qubit_levels[j] - p.qubit_levels[i] + dist.sample(&mut rng);
            out.push(SpectrumObservation { flux, frequency, kind: TransitionKind::Qubit { i, j }, sigma });
        }
        let frequency = p.mode_freqs[0] + dist.sample(&mut rng);
        out.push(SpectrumObservation { flux, frequency, kind: TransitionKind::Resonator, sigma });
    }
    out
}

/// Largest error over the energies and the bare resonator frequency, GHz,
/// and the error in the coupling.
fn parameter_error(fit: &CoupledSystemSpec, truth: &CoupledSystemSpec) -> (f64, f64) {
    let pack = |s: &CoupledSystemSpec| [s.qubit.e_c, s.qubit.e_j, s.qubit.e_l, s.modes[0].bare_frequency];
    let energies = pack(fit).iter().zip(pack(truth)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (energies, (fit.modes[0].coupling.strength() - truth.modes[0].coupling.strength()).abs())
}

fn spectrum_round_trip() -> Verdict {
    let start_time = Instant::now();
    let truth = fig_d_system(0.88, 2.65, 0.72, 7.5, 0.08);
    let start = fig_d_system(0.85, 2.75, 0.70, 7.48, 0.07);
    let clean = fit_spectrum(&two_tone(&truth, 60, 0.0, 0), &start).map(|f| parameter_error(&f.spec, &truth));
    let noisy: Vec<Result<(f64, f64), String>> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let fit = fit_spectrum(&two_tone(&truth, 60, 1e-3, seed), &start).map_err(|e| e.to_string())?;
            Ok(parameter_error(&fit.spec, &truth))
        })
        .collect();
    match (clean, noisy.into_iter().collect::<Result<Vec<_>, String>>()) {
        (Ok(clean), Ok(noisy)) => {
            let med = median(noisy.iter().map(|e| e.0).collect());
            let med_g = median(noisy.iter().map(|e| e.1).collect());
            Verdict::check(
                clean.0 < 1e-4 && med < 5e-3,
                format!(
                    "60 flux points, max error over E_C, E_J, E_L, f_res: noiseless {:.1e} GHz (< 1e-4); \
                     with 1 MHz noise, median over 20 seeds {:.2} MHz (< 5 MHz); coupling g median error {:.1} MHz; {:.1} s",
                    clean.0,
                    med * 1e3,
                    med_g * 1e3,
                    secs(start_time.elapsed())
                ),
            )
        }
        (c, n) => Verdict::check(false, format!("fit error: {:?} {:?}", c.err(), n.err())),
    }
}

fn xqp_extraction() -> Verdict {
    let qp = QuasiparticleSpec::new(3.9e-5);
    let scan: Vec<QualityPoint> = (0..9)
        .map(|k| {
            let f0 = 4.0 + 0.5 * k as f64;
            QualityPoint { f0, q_int: q_int_quasiparticle(&qp, 5e5, f0).unwrap() }
        })
        .collect();
    let fit = fit_xqp_frequency(&scan, 1.0, 600.0);
    let increasing = [1e-6, 1.2e-5, 3.9e-5, 1e-4].iter().all(|&x| {
        let q: Vec<f64> = (0..=80)
            .map(|k| q_int_quasiparticle(&QuasiparticleSpec::new(x), 5e5, 2.0 + 0.1 * k as f64).unwrap())
            .collect();
        q.windows(2).all(|w| w[1] > w[0])
    });
    match fit {
        Ok(fit) => {
            let err = rel(fit.x_qp, 3.9e-5);
            Verdict::check(
                err < 1e-10 && increasing,
                format!(
                    "9-point scan at x_qp = 3.9e-5: relative error {err:.1e} (< 1e-10); Q_int rises with frequency for four densities over 2-10 GHz: {}",
                    if increasing { "yes" } else { "NO" }
                ),
            )
        }
        Err(e) => Verdict::check(false, format!("fit error: {e}")),
    }
}

fn f01_at(c: &CircuitSpec, flux: f64) -> f64 {
    let ops = c.at_flux(flux).operators().unwrap();
    diagonalize(&ops.hamiltonian, 2).unwrap().transition(0, 1).unwrap()
}

/// Flux in [0, ½] where f01 equals `target`; f01 falls monotonically there.
fn flux_for_f01(c: &CircuitSpec, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f01_at(c, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Crossing of the array and dielectric curves from an independent flux scan.
const FROZEN_CROSSING_GHZ: f64 = 2.582_587_698_4;

fn t1_trend() -> Verdict {
    let c = CircuitSpec::new(FIG_D.0, FIG_D.1, FIG_D.2, 0.0);
    let array = [LossChannel::QuasiparticleArray(QuasiparticleSpec::new(3.9e-5))];
    let dielectric = [LossChannel::Dielectric { q_cap: 1e4 }];
    let freqs: Vec<f64> = (0..=66).map(|k| 0.7 + 0.05 * k as f64).collect();
    let rows: Vec<(f64, f64, f64)> = freqs
        .par_iter()
        .map(|&f| {
            let flux = flux_for_f01(&c, f);
            let a = t1_budget_at_flux(&array, &c, flux).unwrap();
            let d = t1_budget_at_flux(&dielectric, &c, flux).unwrap();
            (a.f01, a.total_t1, d.total_t1)
        })
        .collect();
    let inductive_breaks: Vec<f64> = rows.windows(2).filter(|w| w[1].1 <= w[0].1).map(|w| w[1].0).collect();
    let dielectric_ok = rows.windows(2).all(|w| w[1].2 < w[0].2);

    // Crossing: the array curve starts above the dielectric one at high
    // frequency and below at low frequency.
    let sign_changes: Vec<usize> = (0..rows.len() - 1)
        .filter(|&k| (rows[k].1 - rows[k].2).signum() != (rows[k + 1].1 - rows[k + 1].2).signum())
        .collect();
    let crossing = sign_changes.first().map(|&k| {
        let both = [array[0], dielectric[0]];
        let excess = |f: f64| {
            let b = t1_budget_at_flux(&both, &c, flux_for_f01(&c, f)).unwrap();
            b.rate("quasiparticle-array").unwrap() - b.rate("dielectric").unwrap()
        };
        let (mut lo, mut hi) = (rows[k].0, rows[k + 1].0);
        let lo_sign = excess(lo).signum();
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if excess(mid).signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    });
    let crossing_ok = sign_changes.len() == 1 && crossing.is_some_and(|f| (f - FROZEN_CROSSING_GHZ).abs() < 1e-6);
    let inductive_ok = inductive_breaks.is_empty();
    let detail = format!(
        "f01 in [0.7, 4] GHz, 67 points: inductive T1 increasing {}; dielectric T1 decreasing {}; \
         {} crossing(s), at {} GHz (frozen {FROZEN_CROSSING_GHZ})",
        if inductive_ok {
            "yes".to_string()
        } else {
            format!(
                "NO (falls at {} of 66 steps, {:.2}-{:.2} GHz)",
                inductive_breaks.len(),
                inductive_breaks.first().unwrap(),
                inductive_breaks.last().unwrap()
            )
        },
        if dielectric_ok { "yes" } else { "NO" },
        sign_changes.len(),
        crossing.map_or("-".into(), |f| format!("{f:.10}")),
    );
    Verdict {
        passed: inductive_ok && dielectric_ok && crossing_ok,
        known_failure: !inductive_ok && dielectric_ok && crossing_ok,
        detail,
    }
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = "seed = 42\n[circuit]\ne_c = 0.88\ne_j = 2.65\ne_l = 0.72\nqubit_levels = 6\n\
[[circuit.modes]]\nbare_frequency = 7.5\ng = 0.08\n\
[synthesize.traces]\ncount = 24\nsnr_db = 40.0\ndirections = \"both\"\n\
[synthesize.spectrum]\nflux = { start = 0.0, stop = 0.5, points = 16 }\nnoise_ghz = 0.001\n";
    std::fs::write(dir.path().join("run.toml"), cfg).unwrap();
    let run = |out: &str, jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_fluxkit"))
            .current_dir(dir.path())
            .args(["--config", "run.toml", "--out", out, "--jobs", jobs, "synthesize"])
            .status()
            .is_ok_and(|s| s.success())
    };
    let ran = run("a", "1") && run("b", "1") && run("c", "4");
    let (a, b, c) = (tree(&dir.path().join("a")), tree(&dir.path().join("b")), tree(&dir.path().join("c")));
    Verdict::check(
        ran && !a.is_empty() && a == b && a == c,
        format!(
            "synthesize with seed 42, {} files: two runs {}, --jobs 1 vs 4 {}",
            a.len(),
            if a == b { "identical" } else { "DIFFER" },
            if a == c { "identical" } else { "DIFFER" }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("eigen-oracle equivalence", eigen_oracle),
        ("cubic-root oracle", cubic_oracle),
        ("algebraic identities", algebraic_identities),
        ("power-dependence contract", power_contract),
        ("loss-tangent collapse", loss_tangent_collapse),
        ("synthetic S21 round trip", s21_round_trip),
        ("spectrum-fit round trip", spectrum_round_trip),
        ("x_qp extraction", xqp_extraction),
        ("T1 trend discrimination", t1_trend),
        ("determinism", determinism),
    ];
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let tag = match (v.passed, v.known_failure) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} [{}] {name}: {}", k + 1, v.detail);
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
