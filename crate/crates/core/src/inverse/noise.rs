//! Additive complex gaussian noise scaled by per-component RMS.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Result};
use crate::trace::{CauchyDataset, COMPONENTS};

/// Standard complex gaussian (`E|z|^2 = 1`) for one `(frequency, point,
/// component)` cell. The generator is positioned by the cell index, so the
/// draw does not depend on evaluation order.
fn draw(seed: u64, freq: usize, point: usize, comp: usize) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(freq as u64);
    // Two u64 per cell, i.e. four 32-bit words.
    rng.set_word_pos(((point * COMPONENTS + comp) as u128) * 4);
    let unit = |x: u64| ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let (u1, u2) = (unit(rng.next_u64()), unit(rng.next_u64()));
    let r = (-u1.ln()).sqrt();
    Complex64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

/// RMS of each of the eight trace components over all frequencies and points.
pub fn component_rms(dataset: &CauchyDataset) -> [f64; COMPONENTS] {
    let mut acc = [0.0; COMPONENTS];
    let mut count = 0usize;
    for t in &dataset.traces {
        for p in 0..t.len() {
            for (a, c) in acc.iter_mut().zip(t.components(p)) {
                *a += c.norm_sqr();
            }
            count += 1;
        }
    }
    acc.map(|a| if count > 0 { (a / count as f64).sqrt() } else { 0.0 })
}

/// Perturbs every component by `level * rms(component) * z` with `z` a
/// standard complex gaussian keyed by `(seed, frequency, point, component)`.
pub fn add_noise(dataset: &CauchyDataset, level: f64, seed: u64) -> Result<CauchyDataset> {
    if !(level.is_finite() && level >= 0.0) {
        return Err(invalid(format!("noise level must be finite and >= 0, got {level}")));
    }
    let mut out = dataset.clone();
    out.provenance.seed = seed;
    out.provenance.noise_level = level;
    if level == 0.0 {
        return Ok(out);
    }
    let rms = component_rms(dataset);
    let traces = crate::par::map_range(dataset.traces.len(), |fi| {
        let mut t = dataset.traces[fi].clone();
        for p in 0..t.len() {
            let mut c = t.components(p);
            for (j, v) in c.iter_mut().enumerate() {
                *v += level * rms[j] * draw(seed, fi, p, j);
            }
            t.set_components(p, c);
        }
        t
    });
    out.traces = traces;
    Ok(out)
}
