//! Empirical checks on the resolvent: growth of the boundary data in `k`
//! and analyticity of `u(x, k)` in complex `k`.

use num_complex::Complex64;

use super::kernel::Kernel;
use super::synth::{field_u, synthesize_cauchy};
use crate::error::{invalid, Result};
use crate::grid::{norm, FrequencyGrid, SphereGrid, Vec3};
use crate::par;
use crate::source::SourceField;
use crate::trace::boundary_norm_sq;
use crate::wavenumber::kappa_of;

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventProbeReport {
    pub k_nodes: Vec<f64>,
    /// Full boundary norm at each node.
    pub norms: Vec<f64>,
    /// `int |u|^2 ds` at each node.
    pub u_norms: Vec<f64>,
    /// Fixed growth rate `2 R (sigma + 1)` multiplying `sqrt(k)`.
    pub growth_rate: f64,
    /// Smallest offset with `ln norm <= c0 + rate sqrt(k) + 4 ln k` at every
    /// node; `None` when every norm is zero.
    pub c0: Option<f64>,
}

impl ResolventProbeReport {
    pub fn is_degenerate(&self) -> bool {
        self.c0.is_none()
    }

    /// Value of the fitted log-envelope at `k`.
    pub fn envelope(&self, k: f64) -> Option<f64> {
        self.c0
            .map(|c0| c0 + self.growth_rate * k.sqrt() + 4.0 * k.ln())
    }

    /// Whether every positive sample lies on or under the envelope.
    pub fn bound_holds(&self) -> bool {
        self.k_nodes.iter().zip(&self.norms).all(|(k, n)| {
            *n == 0.0 || self.envelope(*k).is_some_and(|e| n.ln() <= e + 1e-12 * e.abs().max(1.0))
        })
    }
}

fn envelope_shape(rate: f64, k: f64) -> f64 {
    rate * k.sqrt() + 4.0 * k.ln()
}

pub fn resolvent_growth_probe(
    f: &SourceField,
    grid: &SphereGrid,
    frequencies: &FrequencyGrid,
    sigma: f64,
) -> Result<ResolventProbeReport> {
    let growth_rate = 2.0 * grid.radius * (sigma + 1.0);
    let mut norms = Vec::with_capacity(frequencies.len());
    let mut u_norms = Vec::with_capacity(frequencies.len());
    for &k in frequencies.nodes() {
        let trace = synthesize_cauchy(f, grid, k, sigma)?;
        norms.push(boundary_norm_sq(&trace, grid)?);
        let mags: Vec<f64> = trace.u.iter().map(|u| u.norm_sqr()).collect();
        u_norms.push(grid.integrate(&mags)?);
    }
    let c0 = frequencies
        .nodes()
        .iter()
        .zip(&norms)
        .filter(|(_, n)| **n > 0.0)
        .map(|(k, n)| n.ln() - envelope_shape(growth_rate, *k))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    Ok(ResolventProbeReport {
        k_nodes: frequencies.nodes().to_vec(),
        norms,
        u_norms,
        growth_rate,
        c0,
    })
}

/// The strip `(delta, inf) x (-d, d)` of complex frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slab {
    pub delta: f64,
    pub d: f64,
}

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]` in the `k` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ContourRect {
    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.re_max - self.re_min) + (self.im_max - self.im_min))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourProbe {
    /// `|contour integral of u(x, k) dk|`.
    pub magnitude: f64,
    pub max_abs_u: f64,
    pub perimeter: f64,
}

impl ContourProbe {
    /// Magnitude relative to `max |u| * perimeter`.
    pub fn relative(&self) -> f64 {
        let scale = self.max_abs_u * self.perimeter;
        if scale > 0.0 {
            self.magnitude / scale
        } else {
            0.0
        }
    }
}

/// Splits `n` trapezoid panels across the sides in proportion to length.
fn panels_per_side(rect: &ContourRect, n: usize) -> [usize; 4] {
    let w = rect.re_max - rect.re_min;
    let h = rect.im_max - rect.im_min;
    let lens = [w, h, w, h];
    let per = rect.perimeter();
    let mut counts = lens.map(|l| ((n as f64 * l / per).round() as usize).max(1));
    let total: usize = counts.iter().sum();
    // Put any rounding surplus or deficit on a horizontal side.
    let (i, _) = if w >= h { (0, w) } else { (1, h) };
    counts[i] = (counts[i] + n).saturating_sub(total).max(1);
    counts
}

/// Trapezoid-rule contour integral of `u(x, .)` around `rect`.
pub fn analyticity_probe(
    f: &SourceField,
    x: &Vec3,
    rect: &ContourRect,
    slab: &Slab,
    sigma: f64,
    n_contour: usize,
) -> Result<ContourProbe> {
    if !(rect.re_min < rect.re_max && rect.im_min < rect.im_max) {
        return Err(invalid("contour rectangle is empty"));
    }
    if !(rect.re_min > slab.delta && rect.im_min > -slab.d && rect.im_max < slab.d) {
        return Err(invalid(format!(
            "rectangle must lie strictly inside ({}, inf) x ({}, {})",
            slab.delta, -slab.d, slab.d
        )));
    }
    if rect.im_min <= -0.5 * sigma {
        return Err(invalid(
            "rectangle reaches Im k <= -sigma/2, where kappa has a branch cut",
        ));
    }
    if n_contour < 4 {
        return Err(invalid("contour needs at least four panels"));
    }
    if norm(x) <= f.support_radius() {
        return Err(invalid("probe point must lie outside the source ball"));
    }
    let samples = f.samples();
    let corners = rect.corners();
    let counts = panels_per_side(rect, n_contour);
    let mut nodes = Vec::new();
    for side in 0..4 {
        let (a, b) = (corners[side], corners[(side + 1) % 4]);
        let m = counts[side];
        let dz = (b - a) / m as f64;
        for j in 0..=m {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            nodes.push((a + dz * j as f64, dz * w));
        }
    }
    let values = par::try_map_range(nodes.len(), |i| -> Result<Complex64> {
        let kappa = kappa_of(nodes[i].0, sigma)?;
        Ok(field_u(&samples, x, &Kernel::new(kappa)))
    })?;
    let mut integral = Complex64::new(0.0, 0.0);
    let mut max_abs_u: f64 = 0.0;
    for ((_, w), u) in nodes.iter().zip(&values) {
        integral += u * w;
        max_abs_u = max_abs_u.max(u.norm());
    }
    Ok(ContourProbe {
        magnitude: integral.norm(),
        max_abs_u,
        perimeter: rect.perimeter(),
    })
}
