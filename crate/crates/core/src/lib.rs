//! Forward, time-domain and inverse solvers for the damped plate equation
//! `lap^2 u - k^2 u - i k sigma u = f` with Cauchy data on a sphere.

pub mod error;
pub mod forward;
pub mod grid;
pub mod inverse;
pub mod ode;
pub mod par;
pub mod source;
pub mod trace;
pub mod timedomain;
pub mod wavenumber;

pub use error::{Error, Result};
pub use grid::{frequency_integral, FrequencyGrid, SphereGrid, Vec3};
pub use par::{with_execution, Execution};
pub use source::{make_source_field, Bump, SourceField, SourceSpec};
pub use trace::{boundary_norm_sq, CauchyDataset, CauchyTrace, Provenance};
pub use wavenumber::{kappa_of, DampedWavenumber};
