use fluxkit::circuit::{
    coupled_hamiltonian, coupled_spectrum, fluxonium_spectrum, wire_inductance, CircuitSpec, CoupledSystemSpec,
    ModeSpec, WireGeometry,
};
use fluxkit::quantum::{diagonalize, matrix_element, PhaseBasis};
use proptest::prelude::*;

fn fig_d(flux: f64) -> CircuitSpec {
    CircuitSpec::new(0.88, 2.65, 0.72, flux)
}

fn f01(spec: &CircuitSpec) -> f64 {
    let sol = fluxonium_spectrum(spec, 2).unwrap();
    sol.energies()[1] - sol.energies()[0]
}

#[test]
fn half_flux_minimum_of_second_device() {
    let spec = CircuitSpec::new(0.96, 3.95, 0.74, 0.5);
    assert!((f01(&spec) - 0.3627216878).abs() < 1e-7);
}

#[test]
fn vanishing_josephson_energy_gives_plasma_frequency() {
    for flux in [0.0, 0.2, 0.5, 0.77] {
        let spec = CircuitSpec::new(0.88, 1e-9, 0.72, flux);
        assert!((f01(&spec) - (8.0_f64 * 0.88 * 0.72).sqrt()).abs() < 1e-6);
    }
}

#[test]
fn first_transition_falls_toward_half_flux() {
    let values: Vec<f64> = (0..51).map(|k| f01(&fig_d(0.5 * k as f64 / 50.0))).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

fn readout(f_res: f64, g: f64) -> CoupledSystemSpec {
    CoupledSystemSpec::new(fig_d(0.0), vec![ModeSpec::readout(f_res, g)])
}

#[test]
fn decoupled_resonator_sits_at_bare_frequency() {
    let flux: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();
    let spec = coupled_spectrum(&readout(7.5, 0.0), 3, &flux).unwrap();
    for f in &spec.dressed_resonator_freq {
        assert!((f - 7.5).abs() < 1e-9);
    }
    let bare = f01(&fig_d(0.3));
    assert!((spec.transition(3, 0, 1).unwrap() - bare).abs() < 1e-9);
}

/// Flux in (0, 0.5) where the bare f01 equals `f`.
fn crossing_flux(f: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f01(&fig_d(mid)) > f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn resonant_splitting_matches_two_level_model() {
    let g = 0.01;
    let f_res = 3.0;
    let flux = crossing_flux(f_res);
    let qubit = fig_d(flux);
    let ops = qubit.operators().unwrap();
    let sol = diagonalize(&ops.hamiltonian, 2).unwrap();
    let n01 = matrix_element(&ops.n, &sol, 0, 1).unwrap().norm();
    let coupled = coupled_hamiltonian(&readout(f_res, g), flux).unwrap();
    let dressed = diagonalize(&coupled.operator, coupled.dimension()).unwrap();
    let mut near: Vec<f64> = dressed.relative_energies().into_iter().filter(|e| (e - f_res).abs() < 0.2).collect();
    near.sort_by(f64::total_cmp);
    assert_eq!(near.len(), 2);
    let splitting = near[1] - near[0];
    let expected = 2.0 * g * n01;
    assert!((splitting / expected - 1.0).abs() < 0.05, "{splitting} vs {expected}");
}

// Independent product-basis solve with a finite-difference qubit, frozen here.
const DRESSED: [(f64, f64, f64, f64); 5] = [
    (0.0, 7.500140461, 4.082561297, 7.175352339),
    (0.1, 7.500160086, 4.019792761, 6.830233198),
    (0.2, 7.500133878, 3.791108480, 5.810932608),
    (0.3, 7.500198977, 3.171226390, 4.594381075),
    (0.5, 7.500094429, 0.661164574, 3.238639356),
];

#[test]
fn dressed_spectrum_matches_frozen_regression() {
    let flux: Vec<f64> = DRESSED.iter().map(|d| d.0).collect();
    let spec = coupled_spectrum(&readout(7.5, 0.05), 3, &flux).unwrap();
    for (k, &(_, res, f01, f02)) in DRESSED.iter().enumerate() {
        assert!((spec.dressed_resonator_freq[k] - res).abs() < 1e-6, "{} vs {res}", spec.dressed_resonator_freq[k]);
        assert!((spec.transition(k, 0, 1).unwrap() - f01).abs() < 1e-6);
        assert!((spec.transition(k, 0, 2).unwrap() - f02).abs() < 1e-6);
    }
}

#[test]
fn two_avoided_crossings_per_flux_period() {
    let flux: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let spec = coupled_spectrum(&readout(7.5, 0.1), 3, &flux).unwrap();
    let pull: Vec<f64> = spec.dressed_resonator_freq.iter().map(|f| (f - 7.5).abs()).collect();
    let mut sorted = pull.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let spikes: Vec<f64> = flux.iter().zip(&pull).filter(|(_, p)| **p > 3.0 * median).map(|(f, _)| *f).collect();
    assert_eq!(spikes, vec![0.25, 0.75]);
}

#[test]
fn dispersive_pull_flips_across_the_qubit_crossing() {
    let spec = readout(3.0, 0.01);
    let cross = crossing_flux(3.0);
    let below = coupled_spectrum(&spec, 2, &[cross - 0.01]).unwrap().dressed_resonator_freq[0] - 3.0;
    let above = coupled_spectrum(&spec, 2, &[cross + 0.01]).unwrap().dressed_resonator_freq[0] - 3.0;
    assert!(below.signum() != above.signum(), "{below} {above}");
    for pull in [below, above] {
        assert!(pull.abs() < 0.01);
    }
}

#[test]
fn second_mode_is_reported() {
    let qubit = CircuitSpec::new(0.96, 3.95, 0.74, 0.0).with_truncation(PhaseBasis::harmonic(80).unwrap());
    let spec = CoupledSystemSpec::new(qubit, vec![ModeSpec::readout(7.2, 0.05), ModeSpec::spurious(8.1, 0.05)]);
    let s = coupled_spectrum(&spec, 3, &[0.1, 0.4]).unwrap();
    for modes in &s.dressed_mode_freqs {
        assert!((modes[0] - 7.2).abs() < 0.05 && (modes[1] - 8.1).abs() < 0.05);
    }
}

#[test]
fn wire_examples() {
    let w = wire_inductance(&WireGeometry::new(300.0, 1960.0, 2.0)).unwrap();
    assert!((w.kinetic_inductance - 294.0).abs() < 1e-9);
    assert!((w.kinetic_fraction - 0.9917).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectrum_mirrors_about_half_flux(flux in 0.0f64..1.0) {
        let spec = CoupledSystemSpec {
            qubit_levels: 6,
            ..CoupledSystemSpec::new(fig_d(0.0).with_truncation(PhaseBasis::harmonic(60).unwrap()), vec![ModeSpec::readout(7.5, 0.05)])
        };
        let a = coupled_spectrum(&spec, 4, &[flux]).unwrap();
        let b = coupled_spectrum(&spec, 4, &[1.0 - flux]).unwrap();
        for (x, y) in a.transitions[0].iter().zip(&b.transitions[0]) {
            prop_assert!((x - y).abs() < 1e-8);
            prop_assert!(*x >= 0.0);
        }
    }

    #[test]
    fn wire_inductance_scales_with_length(sheet in 1.0f64..500.0, length in 10.0f64..5000.0, width in 0.1f64..10.0) {
        let one = wire_inductance(&WireGeometry::new(sheet, length, width)).unwrap();
        let two = wire_inductance(&WireGeometry::new(sheet, 2.0 * length, width)).unwrap();
        prop_assert!((two.total_inductance - 2.0 * one.total_inductance).abs() <= 1e-12 * two.total_inductance);
        prop_assert!(one.kinetic_fraction > 0.0 && one.kinetic_fraction < 1.0);
    }
}
