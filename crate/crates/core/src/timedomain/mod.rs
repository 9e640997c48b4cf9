//! Exact-in-time spectral solver for `U_tt + sigma U_t + lap^2 U = 0`,
//! `U(0) = 0`, `U_t(0) = f`, on a periodic box.

mod analysis;
mod multiplier;
mod series;
mod spectral;

pub use analysis::{
    boundary_flux_f2, decay_fit, energies, energy_inequality_check, energy_inequality_for,
    observability_ratio, observability_window, sup_norm_series, DecayFit, EnergyInequalityReport,
    EnergyPair, ObservabilityReport, SupKind, TimeSetup,
};
pub use multiplier::{multiplier, multiplier_dt, multiplier_values, regime, MultiplierValues, Regime};
pub use series::{time_to_frequency, PointSeries};
pub use spectral::{
    evolve, BoxParams, BoxSnapshot, FieldKind, SpaceOp, SpectralBoxField, FLUX_KINDS, WRAP_GUARD,
};
