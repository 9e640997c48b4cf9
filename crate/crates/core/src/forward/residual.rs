use num_complex::Complex64;

use super::kernel::Kernel;
use super::synth::field_u;
use crate::error::{invalid, Result};
use crate::grid::{fibonacci_directions, norm, Vec3};
use crate::par;
use crate::source::SourceField;
use crate::wavenumber::DampedWavenumber;

/// Points at which the discrete bilaplacian is applied, with the stencil
/// spacing and the radius of the measurement sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualProbe {
    pub points: Vec<Vec3>,
    pub spacing: f64,
    pub outer_radius: f64,
}

impl ResidualProbe {
    /// `n` Fibonacci points on the sphere of radius `radius`.
    pub fn shell(radius: f64, n: usize, spacing: f64, outer_radius: f64) -> Self {
        Self {
            points: fibonacci_directions(n)
                .into_iter()
                .map(|d| [radius * d[0], radius * d[1], radius * d[2]])
                .collect(),
            spacing,
            outer_radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    /// `max |lap_h^2 u - kappa^4 u|` over the probe points.
    pub max_residual: f64,
    pub max_abs_u: f64,
}

impl ResidualReport {
    pub fn relative(&self) -> f64 {
        if self.max_abs_u > 0.0 {
            self.max_residual / self.max_abs_u
        } else {
            0.0
        }
    }
}

/// Margin, in stencil spacings, between probe points and the annulus edges.
pub const STENCIL_MARGIN: f64 = 3.0;

/// Offsets (in spacings) and weights of the 7-point Laplacian applied twice.
fn bilaplacian_stencil() -> Vec<([i32; 3], f64)> {
    let mut st = vec![([0, 0, 0], 42.0)];
    for a in 0..3 {
        for s in [-1, 1] {
            let mut o = [0; 3];
            o[a] = s;
            st.push((o, -12.0));
            o[a] = 2 * s;
            st.push((o, 1.0));
        }
        for b in a + 1..3 {
            for sa in [-1, 1] {
                for sb in [-1, 1] {
                    let mut o = [0; 3];
                    o[a] = sa;
                    o[b] = sb;
                    st.push((o, 2.0));
                }
            }
        }
    }
    st
}

/// Applies the second-order 25-point bilaplacian to the forward field in the
/// source-free annulus and reports how far it is from `kappa^4 u`.
pub fn residual_check(
    f: &SourceField,
    wn: &DampedWavenumber,
    probe: &ResidualProbe,
) -> Result<ResidualReport> {
    let h = probe.spacing;
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("stencil spacing must be positive"));
    }
    let lo = f.support_radius() + STENCIL_MARGIN * h;
    let hi = probe.outer_radius - STENCIL_MARGIN * h;
    for p in &probe.points {
        let r = norm(p);
        if !(r > lo && r < hi) {
            return Err(invalid(format!(
                "probe point at |x| = {r} violates the annulus ({lo}, {hi})"
            )));
        }
    }
    let stencil = bilaplacian_stencil();
    let samples = f.samples();
    let kernel = Kernel::new(wn.kappa);
    let k4 = wn.kappa_fourth();
    let inv_h4 = 1.0 / h.powi(4);
    let per_point = par::map_slice(&probe.points, |p| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut centre = acc;
        for (o, c) in &stencil {
            let x = [
                p[0] + o[0] as f64 * h,
                p[1] + o[1] as f64 * h,
                p[2] + o[2] as f64 * h,
            ];
            let u = field_u(&samples, &x, &kernel);
            if *o == [0, 0, 0] {
                centre = u;
            }
            acc += u * *c;
        }
        ((acc * inv_h4 - k4 * centre).norm(), centre.norm())
    });
    Ok(per_point.iter().fold(
        ResidualReport {
            max_residual: 0.0,
            max_abs_u: 0.0,
        },
        |r, (res, u)| ResidualReport {
            max_residual: r.max_residual.max(*res),
            max_abs_u: r.max_abs_u.max(*u),
        },
    ))
}
