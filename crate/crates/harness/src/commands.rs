//! The `synth`, `recon`, `timesim` and `sweep` pipelines.

use std::path::Path;

use log::{info, warn};
use platelab_core::forward::synthesize_dataset;
use platelab_core::grid::fibonacci_directions;
use platelab_core::inverse::{
    add_noise, monotone_with_slack, reconstruct, relative_l2_error, sample_fourier, sweep_cells, StabilityRecord,
};
use platelab_core::timedomain::{
    decay_fit, energy_inequality_for, observability_ratio, sup_norm_series, SpectralBoxField, SupKind, TimeSetup,
};
use platelab_core::{FrequencyGrid, Provenance, SphereGrid};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::dataset::{read_dataset, write_dataset, DatasetManifest, StoredDataset};
use crate::error::{HarnessError, Result};
use crate::output::{num, write_atomic, Table};

/// Relative slack allowed in the sweep's monotonicity verdicts.
pub const TREND_SLACK: f64 = 0.05;

fn results_dir(out: &Path) -> std::path::PathBuf {
    out.join("results")
}

/// Echoes the resolved configuration, defaults included, next to the outputs.
fn echo_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    write_atomic(&out.join("config.json"), format!("{}\n", cfg.to_json()).as_bytes())
}

fn first<T: Copy + std::fmt::Debug>(what: &str, v: &[T]) -> T {
    if v.len() > 1 {
        warn!("{what} has {} entries; using the first, {:?}", v.len(), v[0]);
    }
    v[0]
}

/// Synthesizes boundary data at the first sigma, noise level and seed and
/// stores it, with the exact source, in `out`.
pub fn run_synth(cfg: &ExperimentConfig, out: &Path, force: bool) -> Result<DatasetManifest> {
    let f = cfg.source_field()?;
    let sphere = SphereGrid::with_count(cfg.radius, cfg.n_sphere)?;
    let grid = FrequencyGrid::sqrt_uniform(cfg.delta, cfg.max_k(), cfg.nk)?;
    let sigma = first("sigmas", &cfg.sigmas);
    let noise = first("noise_levels", &cfg.noise_levels);
    let seed = first("seeds", &cfg.seeds);
    let provenance = Provenance {
        config_hash: cfg.hash(),
        seed,
        noise_level: 0.0,
    };
    info!("synthesizing {} frequencies on {} sphere points", grid.len(), sphere.len());
    let clean = synthesize_dataset(&f, &sphere, &grid, sigma, provenance)?;
    let data = add_noise(&clean, noise, seed)?;
    let manifest = write_dataset(out, &StoredDataset::new(data, Some(f)), force)?;
    echo_config(cfg, out)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconSummary {
    pub sigma: f64,
    pub k_max: f64,
    pub n_freq: usize,
    pub n_dir: usize,
    /// `None` when no truth is stored or it is identically zero.
    pub rel_error: Option<f64>,
    pub imag_ratio: f64,
    pub max_abs: f64,
}

/// Reconstructs from the dataset in `dataset_dir` using every node up to the
/// largest configured band limit, and writes `reconstruction.json`,
/// `reconstruction.bin` and `results/recon.csv` into `out`.
pub fn run_recon(dataset_dir: &Path, cfg: &ExperimentConfig, out: &Path) -> Result<ReconSummary> {
    let (stored, manifest) = read_dataset(dataset_dir)?;
    let ds = &stored.dataset;
    let k_max = cfg.max_k().min(ds.frequencies.end());
    let ks: Vec<f64> = ds.frequencies.nodes().iter().copied().filter(|k| *k <= k_max).collect();
    if ks.is_empty() {
        return Err(HarnessError::Config(format!(
            "no dataset frequency lies below the band limit {k_max}"
        )));
    }
    let (radius, n) = match &stored.truth {
        Some(t) => (t.support_radius(), t.n_per_axis()),
        None => (cfg.source_radius, cfg.n_vol),
    };
    let dirs = fibonacci_directions(cfg.n_dir);
    let samples = sample_fourier(ds, &dirs, &ks)?;
    let rec = reconstruct(&samples, radius, n, k_max)?;
    let truth_state = match &stored.truth {
        None => "absent",
        Some(t) if t.l2_norm_sq() == 0.0 => "zero",
        Some(_) => "stored",
    };
    let rel_error = match &stored.truth {
        Some(t) if t.l2_norm_sq() > 0.0 => Some(relative_l2_error(&rec.field, t)?),
        _ => None,
    };
    let rec_store = serde_json::json!({
        "name": "f_rec",
        "shape": [n, n, n],
        "dtype": "f64",
        "encoding": "little-endian f64, row-major, cell-centred on [-a, a]^3",
        "support_radius": radius,
        "dataset_config_hash": manifest.provenance.config_hash,
    });
    let bytes: Vec<u8> = rec.field.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(&out.join("reconstruction.bin"), &bytes)?;
    let meta = serde_json::to_string_pretty(&rec_store).expect("metadata serializes") + "\n";
    write_atomic(&out.join("reconstruction.json"), meta.as_bytes())?;
    let summary = ReconSummary {
        sigma: ds.sigma,
        k_max,
        n_freq: ks.len(),
        n_dir: dirs.len(),
        rel_error,
        imag_ratio: rec.imag_ratio,
        max_abs: rec.field.max_abs(),
    };
    let mut t = Table::new(&[
        ("sigma", "1/t"),
        ("k_max", "1/L"),
        ("n_freq", "count"),
        ("n_dir", "count"),
        ("noise", "1"),
        ("seed", "-"),
        ("truth", "-"),
        ("rel_error", "1"),
        ("imag_ratio", "1"),
        ("config_hash", "-"),
    ]);
    t.push(vec![
        num(summary.sigma),
        num(k_max),
        ks.len().to_string(),
        dirs.len().to_string(),
        num(ds.provenance.noise_level),
        ds.provenance.seed.to_string(),
        truth_state.to_string(),
        rel_error.map(num).unwrap_or_default(),
        num(rec.imag_ratio),
        manifest.provenance.config_hash.clone(),
    ]);
    t.write(&results_dir(out).join("recon.csv"))?;
    echo_config(cfg, out)?;
    Ok(summary)
}

/// Status of a fitted decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FitStatus {
    Fitted { slope: f64, intercept: f64 },
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayResult {
    pub sigma: f64,
    pub sup_u: Vec<f64>,
    pub sup_grad_u: Vec<f64>,
    pub fit_u: FitStatus,
    pub fit_grad_u: FitStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TimesimSummary {
    pub decay: Vec<DecayResult>,
    /// `(sigma, t1, t2, E0(t1), E0(t2), F^2, margin)`.
    pub energy: Vec<[f64; 7]>,
    /// `(sigma, T, ||f||^2, F^2, ratio)`.
    pub observability: Vec<(f64, f64, f64, f64, Option<f64>)>,
}

fn fit(times: &[f64], values: &[f64]) -> FitStatus {
    if values.iter().all(|v| *v == 0.0) {
        return FitStatus::Skipped("zero field".to_string());
    }
    match decay_fit(times, values) {
        Ok(f) => FitStatus::Fitted {
            slope: f.slope,
            intercept: f.intercept,
        },
        Err(e) => FitStatus::Skipped(e.to_string()),
    }
}

/// Runs the decay series, energy pairs and observability ratio requested by
/// `cfg` for every sigma and writes `decay.csv`, `decay_fit.csv`,
/// `energy.csv` and `observability.csv` under `out/results`. A wrap-around
/// guard trip aborts the run before anything is written.
pub fn run_timesim(cfg: &ExperimentConfig, out: &Path) -> Result<TimesimSummary> {
    let f = cfg.source_field()?;
    let setup = TimeSetup {
        params: cfg.box_params(),
        sphere: SphereGrid::with_count(cfg.radius, cfg.n_sphere)?,
        dt: cfg.dt,
    };
    let mut summary = TimesimSummary::default();
    for &sigma in &cfg.sigmas {
        let field = SpectralBoxField::from_source(&f, setup.params, sigma)?;
        if !cfg.times.is_empty() {
            let sup_u = sup_norm_series(&field, &cfg.times, SupKind::Value)?;
            let sup_grad_u = sup_norm_series(&field, &cfg.times, SupKind::Gradient)?;
            summary.decay.push(DecayResult {
                sigma,
                fit_u: fit(&cfg.times, &sup_u),
                fit_grad_u: fit(&cfg.times, &sup_grad_u),
                sup_u,
                sup_grad_u,
            });
        }
        for &(t1, t2) in &cfg.energy_pairs {
            let r = energy_inequality_for(&field, t1, t2, &setup)?;
            summary.energy.push([sigma, t1, t2, r.e0_t1, r.e0_t2, r.flux, r.margin]);
        }
        if let Some(t_obs) = cfg.observation_time {
            let r = observability_ratio(&f, sigma, t_obs, &setup)?;
            summary
                .observability
                .push((sigma, t_obs, r.source_norm_sq, r.flux, r.ratio));
        }
    }
    write_timesim(&summary, cfg, out)?;
    Ok(summary)
}

fn write_timesim(s: &TimesimSummary, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let dir = results_dir(out);
    let mut decay = Table::new(&[("sigma", "1/t"), ("t", "t"), ("sup_u", "1"), ("sup_grad_u", "1/L")]);
    let mut fits = Table::new(&[
        ("sigma", "1/t"),
        ("quantity", "-"),
        ("slope", "1"),
        ("intercept", "1"),
        ("status", "-"),
    ]);
    for d in &s.decay {
        for (i, t) in cfg.times.iter().enumerate() {
            decay.push(vec![num(d.sigma), num(*t), num(d.sup_u[i]), num(d.sup_grad_u[i])]);
        }
        for (name, status) in [("sup_u", &d.fit_u), ("sup_grad_u", &d.fit_grad_u)] {
            let row = match status {
                FitStatus::Fitted { slope, intercept } => [num(*slope), num(*intercept), "fitted".to_string()],
                FitStatus::Skipped(why) => [String::new(), String::new(), format!("skipped: {why}")],
            };
            let mut cells = vec![num(d.sigma), name.to_string()];
            cells.extend(row);
            fits.push(cells);
        }
    }
    let mut energy = Table::new(&[
        ("sigma", "1/t"),
        ("t1", "t"),
        ("t2", "t"),
        ("e0_t1", "1"),
        ("e0_t2", "1"),
        ("flux_f2", "1"),
        ("margin", "1"),
    ]);
    for row in &s.energy {
        energy.push(row.iter().map(|v| num(*v)).collect());
    }
    let mut obs = Table::new(&[
        ("sigma", "1/t"),
        ("radius", "L"),
        ("t_obs", "t"),
        ("source_norm_sq", "1"),
        ("flux_f2", "1"),
        ("ratio", "1"),
    ]);
    for (sigma, t, norm, flux, ratio) in &s.observability {
        obs.push(vec![
            num(*sigma),
            num(cfg.radius),
            num(*t),
            num(*norm),
            num(*flux),
            ratio.map(num).unwrap_or_else(|| "undefined".to_string()),
        ]);
    }
    decay.write(&dir.join("decay.csv"))?;
    fits.write(&dir.join("decay_fit.csv"))?;
    energy.write(&dir.join("energy.csv"))?;
    obs.write(&dir.join("observability.csv"))?;
    echo_config(cfg, out)
}

/// One cell of the sweep as recorded in the CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    pub k_max: f64,
    pub noise: f64,
    pub seed: u64,
    pub outcome: std::result::Result<StabilityRecord, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendVerdict {
    pub check: &'static str,
    pub sigma: Option<f64>,
    pub k_max: Option<f64>,
    pub noise: f64,
    pub seed: u64,
    pub errors: Vec<f64>,
    /// `pass`, `fail`, or `incomplete` when a cell in the group failed.
    pub verdict: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<TrendVerdict>,
}

impl SweepSummary {
    pub fn all_trends_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict == "pass")
    }
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn verdict(values: &[Option<f64>], increasing: bool) -> (&'static str, Vec<f64>) {
    let errors: Vec<f64> = values.iter().flatten().copied().collect();
    if errors.len() < values.len() {
        ("incomplete", errors)
    } else if monotone_with_slack(&errors, increasing, TREND_SLACK) {
        ("pass", errors)
    } else {
        ("fail", errors)
    }
}

/// Error nonincreasing in K for each `(sigma, noise, seed)` and nondecreasing
/// in sigma for each `(K, noise, seed)`, each with [`TREND_SLACK`].
pub fn trend_verdicts(rows: &[SweepRow], cfg: &ExperimentConfig) -> Vec<TrendVerdict> {
    let lookup = |s: f64, k: f64, n: f64, seed: u64| {
        rows.iter()
            .find(|r| r.sigma == s && r.k_max == k && r.noise == n && r.seed == seed)
            .and_then(|r| r.outcome.as_ref().ok())
            .map(|rec| rec.rel_error)
    };
    let sigmas = sorted_unique(&cfg.sigmas);
    let ks = sorted_unique(&cfg.k_max);
    let mut out = Vec::new();
    for &noise in &cfg.noise_levels {
        for &seed in &cfg.seeds {
            if ks.len() > 1 {
                for &s in &sigmas {
                    let vals: Vec<_> = ks.iter().map(|&k| lookup(s, k, noise, seed)).collect();
                    let (v, errors) = verdict(&vals, false);
                    out.push(TrendVerdict {
                        check: "monotone_in_k",
                        sigma: Some(s),
                        k_max: None,
                        noise,
                        seed,
                        errors,
                        verdict: v,
                    });
                }
            }
            if sigmas.len() > 1 {
                for &k in &ks {
                    let vals: Vec<_> = sigmas.iter().map(|&s| lookup(s, k, noise, seed)).collect();
                    let (v, errors) = verdict(&vals, true);
                    out.push(TrendVerdict {
                        check: "monotone_in_sigma",
                        sigma: None,
                        k_max: Some(k),
                        noise,
                        seed,
                        errors,
                        verdict: v,
                    });
                }
            }
        }
    }
    out
}

/// Runs every `(sigma, K, noise, seed)` cell and writes `stability.csv` and
/// `stability_summary.csv` under `out/results`. Failed cells are recorded
/// and do not stop the sweep.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepSummary> {
    let sweep = cfg.sweep_config();
    let cells = sweep_cells(&sweep)?;
    let mut coords = Vec::new();
    for &sigma in &sweep.sigmas {
        for &k in &sweep.k_max {
            for &noise in &sweep.noise_levels {
                for &seed in &sweep.seeds {
                    coords.push((sigma, k, noise, seed));
                }
            }
        }
    }
    let rows: Vec<SweepRow> = coords
        .into_iter()
        .zip(cells)
        .map(|((sigma, k_max, noise, seed), cell)| {
            if let Err(e) = &cell {
                warn!("{e}");
            }
            SweepRow {
                sigma,
                k_max,
                noise,
                seed,
                outcome: cell.map_err(|e| e.to_string()),
            }
        })
        .collect();
    let verdicts = trend_verdicts(&rows, cfg);
    let hash = cfg.hash();

    let mut table = Table::new(&[
        ("sigma", "1/t"),
        ("k_max", "1/L"),
        ("noise", "1"),
        ("seed", "-"),
        ("status", "-"),
        ("epsilon", "1"),
        ("rel_error", "1"),
        ("imag_ratio", "1"),
        ("q", "1"),
        ("smoothness", "-"),
        ("message", "-"),
    ]);
    for r in &rows {
        let mut cells = vec![num(r.sigma), num(r.k_max), num(r.noise), r.seed.to_string()];
        match &r.outcome {
            Ok(rec) => cells.extend([
                "ok".to_string(),
                num(rec.epsilon),
                num(rec.rel_error),
                num(rec.imag_ratio),
                num(rec.q),
                rec.smoothness.to_string(),
                String::new(),
            ]),
            Err(msg) => cells.extend([
                "error".to_string(),
                String::new(),
                String::new(),
                String::new(),
                num(cfg.q),
                cfg.smoothness.to_string(),
                msg.clone(),
            ]),
        }
        table.push(cells);
    }
    let mut summary = Table::new(&[
        ("check", "-"),
        ("sigma", "1/t"),
        ("k_max", "1/L"),
        ("noise", "1"),
        ("seed", "-"),
        ("errors", "1"),
        ("slack", "1"),
        ("verdict", "-"),
        ("config_hash", "-"),
    ]);
    let ok = rows.iter().filter(|r| r.outcome.is_ok()).count();
    summary.push(vec![
        "cells_ok".to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!("{ok}/{}", rows.len()),
        String::new(),
        (if ok == rows.len() { "pass" } else { "fail" }).to_string(),
        hash.clone(),
    ]);
    for v in &verdicts {
        summary.push(vec![
            v.check.to_string(),
            v.sigma.map(num).unwrap_or_default(),
            v.k_max.map(num).unwrap_or_default(),
            num(v.noise),
            v.seed.to_string(),
            v.errors.iter().map(|e| num(*e)).collect::<Vec<_>>().join(";"),
            num(TREND_SLACK),
            v.verdict.to_string(),
            hash.clone(),
        ]);
    }
    let dir = results_dir(out);
    table.write(&dir.join("stability.csv"))?;
    summary.write(&dir.join("stability_summary.csv"))?;
    echo_config(cfg, out)?;
    Ok(SweepSummary { rows, verdicts })
}
