//! Experiment configuration: one JSON file, every field optional.
//!
//! ```json
//! {
//!   "radius": 1.5,               // measurement sphere R
//!   "source_radius": 1.2,        // source ball R_hat < R
//!   "delta": 0.1,                // lowest frequency
//!   "slab_half_height": 0.5,     // d
//!   "sigmas": [0.5],
//!   "k_max": [8.0],              // band limits K
//!   "nk": 32,                    // frequencies for synth, sqrt-uniform on [delta, max K]
//!   "n_sphere": 512,
//!   "n_vol": 16,                 // source cells per axis
//!   "n_dir": 128,                // reconstruction directions
//!   "box": { "half_length": 16.0, "n_box": 64 },
//!   "times": [],                 // decay-series sample times
//!   "dt": 0.02,                  // flux time step
//!   "energy_pairs": [],          // [[t1, t2], ...]
//!   "observation_time": null,    // T for the observability run
//!   "noise_levels": [0.0],
//!   "seeds": [0],
//!   "source": [{ "kind": "gaussian", "center": [0, 0, 0], "width": 0.3, "amplitude": 1 }],
//!   "sqrt_step": 0.25,           // sweep grid spacing in sqrt(k)
//!   "q": 1.0,                    // declared source-norm bound
//!   "smoothness": 2,             // declared smoothness index
//!   "output_dir": null
//! }
//! ```

use std::path::{Path, PathBuf};

use platelab_core::inverse::SweepConfig;
use platelab_core::timedomain::{observability_window, BoxParams};
use platelab_core::{make_source_field, Bump, SourceField, SourceSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub half_length: f64,
    pub n_box: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub radius: f64,
    pub source_radius: f64,
    pub delta: f64,
    pub slab_half_height: f64,
    pub sigmas: Vec<f64>,
    pub k_max: Vec<f64>,
    pub nk: usize,
    pub n_sphere: usize,
    pub n_vol: usize,
    pub n_dir: usize,
    #[serde(rename = "box")]
    pub box_: BoxConfig,
    pub times: Vec<f64>,
    pub dt: f64,
    pub energy_pairs: Vec<(f64, f64)>,
    pub observation_time: Option<f64>,
    pub noise_levels: Vec<f64>,
    pub seeds: Vec<u64>,
    pub source: SourceSpec,
    pub sqrt_step: f64,
    pub q: f64,
    pub smoothness: u32,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radius: 1.5,
            source_radius: 1.2,
            delta: 0.1,
            slab_half_height: 0.5,
            sigmas: vec![0.5],
            k_max: vec![8.0],
            nk: 32,
            n_sphere: 512,
            n_vol: 16,
            n_dir: 128,
            box_: BoxConfig {
                half_length: 16.0,
                n_box: 64,
            },
            times: Vec::new(),
            dt: 0.02,
            energy_pairs: Vec::new(),
            observation_time: None,
            noise_levels: vec![0.0],
            seeds: vec![0],
            source: SourceSpec::new(vec![Bump::Gaussian {
                center: [0.0; 3],
                width: 0.3,
                amplitude: 1.0,
            }]),
            sqrt_step: 0.25,
            q: 1.0,
            smoothness: 2,
            output_dir: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    /// Pretty JSON with every field spelled out, defaults included.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, in hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.radius,
            self.source_radius,
            self.delta,
            self.slab_half_height,
            self.dt,
            self.sqrt_step,
            self.q,
            self.box_.half_length,
        ];
        if !all_finite(&scalars) {
            return Err(bad("numeric fields must be finite"));
        }
        if !(self.source_radius > 0.0 && self.source_radius < self.radius) {
            return Err(bad(format!(
                "need 0 < source_radius < radius, got {} and {}",
                self.source_radius, self.radius
            )));
        }
        if !(self.delta > 0.0) {
            return Err(bad("delta must be positive"));
        }
        if !(self.slab_half_height > 0.0 && self.dt > 0.0 && self.sqrt_step > 0.0 && self.q > 0.0) {
            return Err(bad("slab_half_height, dt, sqrt_step and q must be positive"));
        }
        let counts = [
            ("nk", self.nk),
            ("n_sphere", self.n_sphere),
            ("n_vol", self.n_vol),
            ("n_dir", self.n_dir),
            ("box.n_box", self.box_.n_box),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, n)| *n == 0) {
            return Err(bad(format!("{name} must be positive")));
        }
        if self.nk < 2 {
            return Err(bad("nk must be at least 2"));
        }
        if self.sigmas.is_empty() || self.k_max.is_empty() || self.noise_levels.is_empty() || self.seeds.is_empty() {
            return Err(bad("sigmas, k_max, noise_levels and seeds must be nonempty"));
        }
        if !all_finite(&self.sigmas) || self.sigmas.iter().any(|s| *s < 0.0) {
            return Err(bad("sigmas must be finite and nonnegative"));
        }
        if !all_finite(&self.k_max) || self.k_max.iter().any(|k| *k <= self.delta) {
            return Err(bad("every band limit must be finite and exceed delta"));
        }
        if !all_finite(&self.noise_levels) || self.noise_levels.iter().any(|s| *s < 0.0) {
            return Err(bad("noise levels must be finite and nonnegative"));
        }
        if !all_finite(&self.times) || self.times.iter().any(|t| *t < 0.0) {
            return Err(bad("times must be finite and nonnegative"));
        }
        if self.energy_pairs.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && 0.0 <= *a && a <= b)) {
            return Err(bad("energy pairs need 0 <= t1 <= t2"));
        }
        if let Some(t) = self.observation_time {
            let (lo, hi) = observability_window(self.radius);
            if !(t > lo && t < hi) {
                return Err(bad(format!(
                    "observation_time {t} outside the admissible window ({lo}, {hi}) for radius {}",
                    self.radius
                )));
            }
        }
        for b in &self.source.bumps {
            b.validate(self.source_radius).map_err(|e| bad(e.to_string()))?;
        }
        self.box_params().validate().map_err(|e| bad(e.to_string()))?;
        Ok(())
    }

    pub fn box_params(&self) -> BoxParams {
        BoxParams {
            half_length: self.box_.half_length,
            n_box: self.box_.n_box,
        }
    }

    pub fn source_field(&self) -> Result<SourceField> {
        Ok(make_source_field(&self.source, self.n_vol, self.source_radius)?)
    }

    pub fn max_k(&self) -> f64 {
        self.k_max.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            source: self.source.clone(),
            source_radius: self.source_radius,
            n_vol: self.n_vol,
            sphere_radius: self.radius,
            n_sphere: self.n_sphere,
            n_dir: self.n_dir,
            delta: self.delta,
            sqrt_step: self.sqrt_step,
            sigmas: self.sigmas.clone(),
            k_max: self.k_max.clone(),
            noise_levels: self.noise_levels.clone(),
            seeds: self.seeds.clone(),
            q: self.q,
            smoothness: self.smoothness,
        }
    }
}
