//! Frequency-domain forward solver built on the explicit Green's function.

mod kernel;
mod probe;
mod residual;
mod synth;

pub use kernel::{green_kernel, GreenKernelValues};
pub use probe::{
    analyticity_probe, resolvent_growth_probe, ContourProbe, ContourRect, ResolventProbeReport,
    Slab,
};
pub use residual::{residual_check, ResidualProbe, ResidualReport, STENCIL_MARGIN};
pub use synth::{
    field_at, field_at_many, point_field, synthesize_cauchy, synthesize_dataset, PointField,
};


