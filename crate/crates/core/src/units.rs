//! Physical constants and unit conversions.
//!
//! Energies are carried as frequencies in GHz (E/h) throughout the crate,
//! rates are returned in 1/µs and times in µs.

/// Planck constant, J·s (exact, SI 2019).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Boltzmann constant, J/K (exact, SI 2019).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge, C (exact, SI 2019).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// h·(1 GHz) expressed in µeV, ≈ 4.1357.
pub const UEV_PER_GHZ: f64 = PLANCK * 1e9 / ELEMENTARY_CHARGE * 1e6;

/// Onset of bistability for the Duffing detuning cubic, 4√3/9.
pub const A_CRIT: f64 = 0.769_800_358_919_501;

/// Gap of the WSi films, µeV.
pub const DELTA_WSI_UEV: f64 = 600.0;

/// Geometric inductance of a strip per square, pH/□.
pub const GEOMETRIC_SHEET_INDUCTANCE_PH: f64 = 2.5;

/// 1 GHz expressed in 1/µs.
pub(crate) const GHZ_TO_PER_US: f64 = 1.0e3;

/// Converts instrument power in dBm plus a loss in dB into watts.
pub fn dbm_to_watts(dbm: f64, attenuation_db: f64) -> f64 {
    1.0e-3 * 10f64.powf((dbm - attenuation_db) / 10.0)
}

/// Thermal enhancement factor coth(h f / 2 k_B T).
pub fn thermal_coth(f_ghz: f64, temperature_k: f64) -> f64 {
    let x = PLANCK * f_ghz * 1e9 / (2.0 * BOLTZMANN * temperature_k);
    1.0 / x.tanh()
}
