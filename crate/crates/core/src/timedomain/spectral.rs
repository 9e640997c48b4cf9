//! Periodic-box spectral representation of the initial velocity and exact
//! evolution of the plate wave equation through the time multiplier.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::multiplier::{values as multiplier_values, MultiplierValues};
use crate::error::{invalid, Error, Result};
use crate::grid::{norm, Vec3};
use crate::par;
use crate::source::SourceField;

/// Largest allowed ratio between the field amplitude on the box boundary and
/// its supremum before a run is declared contaminated by periodic images.
pub const WRAP_GUARD: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Periodic box `[-half_length, half_length)^3` with `n_box` modes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxParams {
    pub half_length: f64,
    pub n_box: usize,
}

impl BoxParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_length.is_finite() && self.half_length > 0.0) {
            return Err(invalid("box half-length must be positive"));
        }
        if self.n_box < 4 || self.n_box % 2 != 0 {
            return Err(invalid(format!("n_box must be even and >= 4, got {}", self.n_box)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_box as f64
    }

    /// Spacing of the frequency lattice, `pi / L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    /// Modes with `|n| < n_box / 2` are kept; this is the matching `|xi|`.
    pub fn xi_cutoff(&self) -> f64 {
        0.5 * self.n_box as f64 * self.dxi()
    }

    /// Grid coordinate `-L + j h`.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    /// Signed mode number of FFT index `m`.
    pub fn mode(&self, m: usize) -> i64 {
        let n = self.n_box as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    fn cutoff_sq(&self) -> i64 {
        let h = self.n_box as i64 / 2;
        h * h
    }
}

/// Which derivative of `U` to evaluate: a time order in `0..=2` and a
/// spatial operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldKind {
    pub time_order: u8,
    pub space: SpaceOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceOp {
    Identity,
    Grad(usize),
    Lap,
    GradLap(usize),
}

impl FieldKind {
    pub const U: Self = Self::new(0, SpaceOp::Identity);
    pub const UT: Self = Self::new(1, SpaceOp::Identity);
    pub const UTT: Self = Self::new(2, SpaceOp::Identity);
    pub const LAP: Self = Self::new(0, SpaceOp::Lap);
    pub const UT_LAP: Self = Self::new(1, SpaceOp::Lap);

    pub const fn new(time_order: u8, space: SpaceOp) -> Self {
        Self { time_order, space }
    }

    pub const fn grad(axis: usize) -> Self {
        Self::new(0, SpaceOp::Grad(axis))
    }

    pub const fn ut_grad(axis: usize) -> Self {
        Self::new(1, SpaceOp::Grad(axis))
    }

    pub const fn grad_lap(axis: usize) -> Self {
        Self::new(0, SpaceOp::GradLap(axis))
    }

    pub fn validate(&self) -> Result<()> {
        let axis_ok = match self.space {
            SpaceOp::Grad(a) | SpaceOp::GradLap(a) => a < 3,
            _ => true,
        };
        if self.time_order > 2 || !axis_ok {
            return Err(invalid(format!("unsupported field kind {self:?}")));
        }
        Ok(())
    }

    /// Short column label, e.g. `U_t`, `grad_x U`, `lap U_t`.
    pub fn label(&self) -> String {
        let u = match self.time_order {
            0 => "U",
            1 => "U_t",
            _ => "U_tt",
        };
        let ax = |a: usize| ["x", "y", "z"][a];
        match self.space {
            SpaceOp::Identity => u.to_string(),
            SpaceOp::Grad(a) => format!("d{}/d{}", u, ax(a)),
            SpaceOp::Lap => format!("lap {u}"),
            SpaceOp::GradLap(a) => format!("d(lap {u})/d{}", ax(a)),
        }
    }

    #[inline]
    pub(crate) fn time_factor(&self, m: &MultiplierValues) -> f64 {
        match self.time_order {
            0 => m.m,
            1 => m.dm,
            _ => m.d2m,
        }
    }

    /// Fourier symbol of the spatial operator at `xi`.
    pub(crate) fn space_symbol(&self, xi: &Vec3) -> Complex64 {
        let xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        match self.space {
            SpaceOp::Identity => Complex64::new(1.0, 0.0),
            SpaceOp::Grad(a) => Complex64::new(0.0, xi[a]),
            SpaceOp::Lap => Complex64::new(-xi2, 0.0),
            SpaceOp::GradLap(a) => Complex64::new(0.0, -xi[a] * xi2),
        }
    }
}

/// The ten scalar fields entering the boundary flux.
pub const FLUX_KINDS: [FieldKind; 10] = [
    FieldKind::UTT,
    FieldKind::UT,
    FieldKind::ut_grad(0),
    FieldKind::ut_grad(1),
    FieldKind::ut_grad(2),
    FieldKind::UT_LAP,
    FieldKind::LAP,
    FieldKind::grad_lap(0),
    FieldKind::grad_lap(1),
    FieldKind::grad_lap(2),
];

/// Fourier coefficients of a real source on the periodic box, restricted to
/// the ball `|n| < n_box / 2` and stored in FFT index order.
#[derive(Clone, Debug)]
pub struct SpectralBoxField {
    pub params: BoxParams,
    pub sigma: f64,
    support_radius: f64,
    /// Cell centre where `|f|` peaks; reference point for the image guard.
    peak_point: Vec3,
    coeffs: Vec<Complex64>,
}

impl SpectralBoxField {
    /// Coefficients `c_n = (2L)^-3 sum_i w_i f_i e^{-i xi_n . y_i}` of the
    /// midpoint-rule source, computed by three separable passes.
    pub fn from_source(f: &SourceField, params: BoxParams, sigma: f64) -> Result<Self> {
        params.validate()?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(invalid("damping must be finite and >= 0"));
        }
        if f.support_radius() > 0.5 * params.half_length {
            return Err(invalid(format!(
                "source radius {} leaves less than L/2 margin in a box of half-length {}",
                f.support_radius(),
                params.half_length
            )));
        }
        let nyquist = PI / f.spacing();
        if params.xi_cutoff() > nyquist {
            return Err(invalid(format!(
                "box cutoff {} exceeds the source grid's Nyquist frequency {nyquist}; refine the source",
                params.xi_cutoff()
            )));
        }
        let n = params.n_box;
        let ns = f.n_per_axis();
        let dxi = params.dxi();
        // phase[m * ns + i] = e^{-i xi_m y_i}
        let phase: Vec<Complex64> = (0..n * ns)
            .map(|idx| {
                let (m, i) = (idx / ns, idx % ns);
                Complex64::from_polar(1.0, -(params.mode(m) as f64) * dxi * f.coord(i))
            })
            .collect();
        let vals = f.values();
        let scale = f.cell_volume() / (2.0 * params.half_length).powi(3);

        // a[(i * ns + j) * n + m3]
        let a: Vec<Vec<Complex64>> = par::map_range(ns * ns, |ij| {
            let row = &vals[ij * ns..(ij + 1) * ns];
            let mut out = vec![ZERO; n];
            if row.iter().all(|v| *v == 0.0) {
                return out;
            }
            for (m3, o) in out.iter_mut().enumerate() {
                let p = &phase[m3 * ns..(m3 + 1) * ns];
                *o = row.iter().zip(p).map(|(v, e)| e * *v).sum::<Complex64>() * scale;
            }
            out
        });
        // b[i][m2 * n + m3]
        let b: Vec<Vec<Complex64>> = par::map_range(ns, |i| {
            let mut out = vec![ZERO; n * n];
            for j in 0..ns {
                let aij = &a[i * ns + j];
                if aij.iter().all(|z| *z == ZERO) {
                    continue;
                }
                for m2 in 0..n {
                    let e = phase[m2 * ns + j];
                    let dst = &mut out[m2 * n..(m2 + 1) * n];
                    for (d, s) in dst.iter_mut().zip(aij) {
                        *d += s * e;
                    }
                }
            }
            out
        });
        let cut2 = params.cutoff_sq();
        let slabs: Vec<Vec<Complex64>> = par::map_range(n, |m1| {
            let n1 = params.mode(m1);
            let mut out = vec![ZERO; n * n];
            for m2 in 0..n {
                let n2 = params.mode(m2);
                for m3 in 0..n {
                    let n3 = params.mode(m3);
                    if n1 * n1 + n2 * n2 + n3 * n3 >= cut2 {
                        continue;
                    }
                    let mut acc = ZERO;
                    for (i, bi) in b.iter().enumerate() {
                        acc += bi[m2 * n + m3] * phase[m1 * ns + i];
                    }
                    out[m2 * n + m3] = acc;
                }
            }
            out
        });
        Ok(Self {
            params,
            sigma,
            support_radius: f.support_radius(),
            peak_point: f.point(peak_index(vals)),
            coeffs: slabs.concat(),
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub(crate) fn peak_point(&self) -> Vec3 {
        self.peak_point
    }

    /// Wave vector of flat FFT index `idx`.
    pub fn wave_vector(&self, idx: usize) -> Vec3 {
        let n = self.params.n_box;
        let dxi = self.params.dxi();
        [
            self.params.mode(idx / (n * n)) as f64 * dxi,
            self.params.mode(idx / n % n) as f64 * dxi,
            self.params.mode(idx % n) as f64 * dxi,
        ]
    }

    fn index_of_negated(&self, idx: usize) -> usize {
        let n = self.params.n_box;
        let neg = |m: usize| (n - m) % n;
        (neg(idx / (n * n)) * n + neg(idx / n % n)) * n + neg(idx % n)
    }

    /// `max |c_n - conj(c_-n)|`, zero for a real source up to roundoff.
    pub fn max_conjugate_asymmetry(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.index_of_negated(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Parseval: `int |f|^2` over the box as represented by the kept modes.
    pub fn l2_norm_sq(&self) -> f64 {
        (2.0 * self.params.half_length).powi(3)
            * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Evaluates the requested fields at time `t` on the box grid.
    pub fn snapshot(&self, t: f64, kinds: &[FieldKind]) -> Result<BoxSnapshot> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(invalid(format!("time must be finite and >= 0, got {t}")));
        }
        for k in kinds {
            k.validate()?;
        }
        let n = self.params.n_box;
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let guard_field = self.grid_values(t, FieldKind::U, &fft);
        let guard_ratio = boundary_ratio(&guard_field.0, n);
        if guard_ratio > WRAP_GUARD {
            return Err(Error::WrapAround {
                t,
                ratio: guard_ratio,
            });
        }
        let mut fields = Vec::with_capacity(kinds.len());
        let mut max_imag: f64 = guard_field.1;
        for kind in kinds {
            let (vals, imag) = if *kind == FieldKind::U {
                guard_field.clone()
            } else {
                self.grid_values(t, *kind, &fft)
            };
            max_imag = max_imag.max(imag);
            fields.push((*kind, vals));
        }
        Ok(BoxSnapshot {
            t,
            params: self.params,
            fields,
            max_imag_residue: max_imag,
            guard_ratio,
        })
    }

    /// Real part of one field on the grid and the largest imaginary residue.
    fn grid_values(&self, t: f64, kind: FieldKind, fft: &Arc<dyn Fft<f64>>) -> (Vec<f64>, f64) {
        let n = self.params.n_box;
        let mut data: Vec<Complex64> = vec![ZERO; self.coeffs.len()];
        let sigma = self.sigma;
        par::for_each_chunk_mut(&mut data, n * n, |m1, slab| {
            for (off, d) in slab.iter_mut().enumerate() {
                let idx = m1 * n * n + off;
                let c = self.coeffs[idx];
                if c == ZERO {
                    continue;
                }
                let xi = self.wave_vector(idx);
                let mv = multiplier_values(t, norm(&xi), sigma);
                let sign = if (m1 + off / n + off % n) % 2 == 0 { 1.0 } else { -1.0 };
                *d = c * kind.space_symbol(&xi) * (kind.time_factor(&mv) * sign);
            }
        });
        ifft3(&mut data, n, fft);
        let imag = data.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
        (data.iter().map(|z| z.re).collect(), imag)
    }
}

fn peak_index(vals: &[f64]) -> usize {
    (0..vals.len()).fold(0, |best, i| if vals[i].abs() > vals[best].abs() { i } else { best })
}

/// Max of `|v|` on the grid planes at `x_a = -L` over the max everywhere.
fn boundary_ratio(values: &[f64], n: usize) -> f64 {
    let mut sup: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for (idx, v) in values.iter().enumerate() {
        let a = v.abs();
        sup = sup.max(a);
        if idx / (n * n) == 0 || idx / n % n == 0 || idx % n == 0 {
            edge = edge.max(a);
        }
    }
    if sup > 0.0 {
        edge / sup
    } else {
        0.0
    }
}

/// In-place unnormalised inverse 3-D FFT of an `n^3` row-major array.
fn ifft3(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    // Last axis: contiguous rows.
    par::for_each_chunk_mut(data, n * n, |_, slab| fft.process(slab));
    // Middle axis: columns within each slab.
    par::for_each_chunk_mut(data, n * n, |_, slab| {
        let mut line = vec![ZERO; n];
        for l in 0..n {
            for j in 0..n {
                line[j] = slab[j * n + l];
            }
            fft.process(&mut line);
            for j in 0..n {
                slab[j * n + l] = line[j];
            }
        }
    });
    // First axis: transform each (j, l) pencil; one output plane per j.
    let planes: Vec<Vec<Complex64>> = {
        let src: &[Complex64] = data;
        par::map_range(n, |j| {
            let mut plane = vec![ZERO; n * n];
            for i in 0..n {
                for l in 0..n {
                    plane[l * n + i] = src[(i * n + j) * n + l];
                }
            }
            fft.process(&mut plane);
            plane
        })
    };
    for (j, plane) in planes.iter().enumerate() {
        for l in 0..n {
            for i in 0..n {
                data[(i * n + j) * n + l] = plane[l * n + i];
            }
        }
    }
}

/// Fields on the box grid at one time.
#[derive(Clone, Debug)]
pub struct BoxSnapshot {
    pub t: f64,
    pub params: BoxParams,
    pub fields: Vec<(FieldKind, Vec<f64>)>,
    pub max_imag_residue: f64,
    pub guard_ratio: f64,
}

impl BoxSnapshot {
    pub fn get(&self, kind: FieldKind) -> Option<&[f64]> {
        self.fields
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, v)| v.as_slice())
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        let n = self.params.n_box;
        [
            self.params.coord(idx / (n * n)),
            self.params.coord(idx / n % n),
            self.params.coord(idx % n),
        ]
    }

    pub fn sup_norm(&self, kind: FieldKind) -> Option<f64> {
        self.get(kind)
            .map(|v| v.iter().fold(0.0, |m: f64, x| m.max(x.abs())))
    }
}

/// Builds the spectral field for `f` and takes snapshots at `times`.
pub fn evolve(
    f: &SourceField,
    params: BoxParams,
    sigma: f64,
    times: &[f64],
    kinds: &[FieldKind],
) -> Result<Vec<BoxSnapshot>> {
    let field = SpectralBoxField::from_source(f, params, sigma)?;
    times.iter().map(|&t| field.snapshot(t, kinds)).collect()
}
