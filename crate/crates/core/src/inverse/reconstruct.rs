//! Band-limited Fourier inversion on the polar grid `(Re kappa(k), d)`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use super::functional::FourierSampleSet;
use crate::error::{invalid, Result};
use crate::grid::norm;
use crate::par;
use crate::source::SourceField;
use crate::wavenumber::DampedWavenumber;
use crate::FrequencyGrid;

/// Reconstructed source and the largest imaginary part relative to the
/// largest real part, a consistency diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub field: SourceField,
    pub imag_ratio: f64,
}

/// Imaginary residue above which a warning is logged.
pub const IMAG_WARN_RATIO: f64 = 0.1;

/// `f_rec(x) = (2 pi)^-3 sum_k sum_d w_k (4 pi / N_dir) rho^2 rho' value e^{i rho d.x}`
/// with `rho = Re kappa`, using the samples with `k <= k_max`. The result
/// lives on the cell grid of radius `support_radius` with `n_per_axis` cells
/// per axis and is zeroed outside the ball.
pub fn reconstruct(
    samples: &FourierSampleSet,
    support_radius: f64,
    n_per_axis: usize,
    k_max: f64,
) -> Result<Reconstruction> {
    let template = SourceField::zeros(support_radius, n_per_axis)?;
    let nk = samples.ks.iter().take_while(|k| **k <= k_max).count();
    if samples.is_empty() || samples.directions.is_empty() || nk == 0 {
        return Err(invalid("reconstruction needs at least one sample with k <= k_max"));
    }
    let weights: Vec<f64> = if nk == 1 {
        vec![0.0]
    } else {
        FrequencyGrid::from_nodes(samples.ks[..nk].to_vec())?.weights().to_vec()
    };
    let nd = samples.directions.len();
    let n = n_per_axis;
    let coords: Vec<f64> = (0..n).map(|i| template.coord(i)).collect();
    let dir_weight = 4.0 * PI / nd as f64;
    let scale = (2.0 * PI).powi(-3);

    // Per sample: its weighted value and the three axis phase tables.
    let mut coef = Vec::with_capacity(nk * nd);
    let mut tables: Vec<Complex64> = Vec::with_capacity(nk * nd * 3 * n);
    for ik in 0..nk {
        let wn = DampedWavenumber::real(samples.ks[ik], samples.sigma)?;
        let rho = wn.kappa.re;
        let drho = wn.dkappa_dk().re;
        let radial = weights[ik] * rho * rho * drho * dir_weight * scale;
        for id in 0..nd {
            let s = samples.get(ik, id);
            coef.push(radial * s.value);
            for a in 0..3 {
                let w = rho * s.direction[a];
                tables.extend(coords.iter().map(|x| Complex64::from_polar(1.0, w * x)));
            }
        }
    }
    let slabs: Vec<Vec<Complex64>> = par::map_range(n, |i| {
        let mut slab = vec![Complex64::new(0.0, 0.0); n * n];
        for (s, c) in coef.iter().enumerate() {
            let t = &tables[s * 3 * n..(s + 1) * 3 * n];
            let (tx, ty, tz) = (&t[..n], &t[n..2 * n], &t[2 * n..]);
            let a = c * tx[i];
            for j in 0..n {
                let ab = a * ty[j];
                let row = &mut slab[j * n..(j + 1) * n];
                for (r, z) in row.iter_mut().zip(tz) {
                    *r += ab * z;
                }
            }
        }
        slab
    });
    let mut values = Vec::with_capacity(n * n * n);
    let (mut max_re, mut max_im): (f64, f64) = (0.0, 0.0);
    for (idx, z) in slabs.iter().flatten().enumerate() {
        if norm(&template.point(idx)) <= support_radius {
            max_re = max_re.max(z.re.abs());
            max_im = max_im.max(z.im.abs());
            values.push(z.re);
        } else {
            values.push(0.0);
        }
    }
    let imag_ratio = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    if imag_ratio > IMAG_WARN_RATIO {
        warn!("reconstruction imaginary residue is {imag_ratio:.3} of the real part");
    }
    Ok(Reconstruction {
        field: SourceField::from_values(support_radius, n_per_axis, values)?,
        imag_ratio,
    })
}

/// `||rec - truth|| / ||truth||` in the grid L2 norm.
pub fn relative_l2_error(rec: &SourceField, truth: &SourceField) -> Result<f64> {
    if !rec.same_geometry(truth) {
        return Err(invalid("fields live on different grids"));
    }
    let t = truth.l2_norm_sq();
    if t == 0.0 {
        return Err(invalid("reference field has zero norm"));
    }
    let diff: f64 = rec
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        * truth.cell_volume();
    Ok((diff / t).sqrt())
}
