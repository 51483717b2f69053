//! Resonator and qubit loss channels: quasiparticle, power-dependent and
//! dielectric.

mod power;
mod quasiparticle;
mod qubit;

pub use power::{
    collapse_curve, loss_tangent_power, loss_tangent_scaling, q_int_power, LossTableRow, PowerLossSpec,
    ResonatorLayout, LOSS_TABLE,
};
pub use quasiparticle::{gap_ratio_sqrt, q_ind, q_int_quasiparticle, QuasiparticleSpec};
pub use qubit::{
    array_rate, dielectric_rate, gamma_dielectric, gamma_inductive, gamma_qp_array, gamma_qp_single_junction,
    gap_regime_warning, inductive_rate, junction_rate, t1_budget, t1_budget_at_flux, thermal_warning, ChannelRate,
    LossBudget, LossChannel,
};
