//! Reconstruction from multi-frequency Cauchy data and the quantities of
//! the stability estimate.

mod functional;
mod noise;
mod reconstruct;
mod stability;
mod sweep;

pub use functional::{boundary_functional, sample_fourier, FourierSample, FourierSampleSet};
pub use noise::{add_noise, component_rms};
pub use reconstruct::{reconstruct, relative_l2_error, Reconstruction, IMAG_WARN_RATIO};
pub use stability::{
    continuation_envelope_check, epsilon_data, i_of_k, mu_lower_bound, mu_prefactor, tail_integral,
    tail_profile, AnalyticContinuationParams, EnvelopeReport,
};
pub use sweep::{monotone_with_slack, stability_sweep, sweep_cells, StabilityRecord, SweepConfig};
