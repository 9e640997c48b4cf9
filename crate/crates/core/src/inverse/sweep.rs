//! Reconstruction error over a grid of damping, band limit and noise.

use serde::{Deserialize, Serialize};

use super::functional::sample_fourier;
use super::noise::add_noise;
use super::reconstruct::{reconstruct, relative_l2_error};
use super::stability::epsilon_data;
use crate::error::{invalid, Error, Result};
use crate::forward::synthesize_dataset;
use crate::grid::{fibonacci_directions, FrequencyGrid, SphereGrid};
use crate::source::{make_source_field, SourceField, SourceSpec};
use crate::trace::{CauchyDataset, Provenance};

/// Everything a sweep needs. Frequencies are equispaced in `sqrt(k)` with
/// spacing at most `sqrt_step`, and every band limit is a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub source: SourceSpec,
    pub source_radius: f64,
    pub n_vol: usize,
    pub sphere_radius: f64,
    pub n_sphere: usize,
    pub n_dir: usize,
    pub delta: f64,
    pub sqrt_step: f64,
    pub sigmas: Vec<f64>,
    pub k_max: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Declared bound on the source norm.
    pub q: f64,
    /// Declared smoothness index of the source.
    pub smoothness: u32,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigmas.is_empty() || self.k_max.is_empty() || self.noise_levels.is_empty() || self.seeds.is_empty() {
            return Err(invalid("sweep lists must be nonempty"));
        }
        if !(self.delta > 0.0) || self.k_max.iter().any(|k| !(*k > self.delta)) {
            return Err(invalid("band limits must exceed delta > 0"));
        }
        if !(self.sphere_radius > self.source_radius) {
            return Err(invalid("measurement sphere must enclose the source ball"));
        }
        if self.n_dir == 0 || self.n_sphere == 0 || self.n_vol == 0 {
            return Err(invalid("counts must be positive"));
        }
        Ok(())
    }

    fn band_grid(&self) -> Result<FrequencyGrid> {
        let mut breaks = vec![self.delta];
        let mut ks = self.k_max.clone();
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        breaks.extend(ks);
        FrequencyGrid::sqrt_piecewise(&breaks, self.sqrt_step)
    }
}

/// One sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub sigma: f64,
    pub k_max: f64,
    pub noise: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub rel_error: f64,
    pub imag_ratio: f64,
    pub q: f64,
    pub smoothness: u32,
}

/// Outcome of each cell in `(sigma, K, noise, seed)` order; a failing cell
/// carries its coordinates and does not stop the others.
pub fn sweep_cells(cfg: &SweepConfig) -> Result<Vec<Result<StabilityRecord>>> {
    cfg.validate()?;
    let truth = make_source_field(&cfg.source, cfg.n_vol, cfg.source_radius)?;
    let sphere = SphereGrid::with_count(cfg.sphere_radius, cfg.n_sphere)?;
    let grid = cfg.band_grid()?;
    let dirs = fibonacci_directions(cfg.n_dir);
    let mut out = Vec::new();
    for &sigma in &cfg.sigmas {
        let data = synthesize_dataset(&truth, &sphere, &grid, sigma, Provenance::default());
        for &k_max in &cfg.k_max {
            for &noise in &cfg.noise_levels {
                for &seed in &cfg.seeds {
                    let cell = match &data {
                        Ok(d) => run_cell(cfg, &truth, d, &dirs, k_max, noise, seed),
                        Err(e) => Err(invalid(e.to_string())),
                    };
                    out.push(cell.map_err(|e| Error::Cell {
                        sigma,
                        k_max,
                        noise,
                        seed,
                        source: Box::new(e),
                    }));
                }
            }
        }
    }
    Ok(out)
}

/// Like [`sweep_cells`], failing on the first bad cell.
pub fn stability_sweep(cfg: &SweepConfig) -> Result<Vec<StabilityRecord>> {
    sweep_cells(cfg)?.into_iter().collect()
}

fn run_cell(
    cfg: &SweepConfig,
    truth: &SourceField,
    full: &CauchyDataset,
    dirs: &[crate::Vec3],
    k_max: f64,
    noise: f64,
    seed: u64,
) -> Result<StabilityRecord> {
    let band = full.restricted(cfg.delta, k_max)?;
    let noisy = add_noise(&band, noise, seed)?;
    let epsilon = epsilon_data(&noisy)?;
    let samples = sample_fourier(&noisy, dirs, noisy.frequencies.nodes())?;
    let rec = reconstruct(&samples, truth.support_radius(), truth.n_per_axis(), k_max)?;
    Ok(StabilityRecord {
        sigma: full.sigma,
        k_max,
        noise,
        seed,
        epsilon,
        rel_error: relative_l2_error(&rec.field, truth)?,
        imag_ratio: rec.imag_ratio,
        q: cfg.q,
        smoothness: cfg.smoothness,
    })
}

/// Whether `values` never rise (`increasing = false`) or never fall by more
/// than `slack` relative to the previous entry.
pub fn monotone_with_slack(values: &[f64], increasing: bool, slack: f64) -> bool {
    values.windows(2).all(|w| {
        if increasing {
            w[1] >= w[0] * (1.0 - slack)
        } else {
            w[1] <= w[0] * (1.0 + slack)
        }
    })
}
