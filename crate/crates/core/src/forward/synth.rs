use num_complex::Complex64;

use super::kernel::Kernel;
use crate::error::{invalid, Result};
use crate::grid::{norm, sub, FrequencyGrid, SphereGrid, Vec3};
use crate::par;
use crate::source::{SourceField, WeightedSample};
use crate::trace::{CVec3, CauchyDataset, CauchyTrace, Provenance};
use crate::wavenumber::DampedWavenumber;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The four field quantities at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointField {
    pub u: Complex64,
    pub grad_u: CVec3,
    pub lap_u: Complex64,
    pub grad_lap_u: CVec3,
}

pub(crate) fn field_full(samples: &[WeightedSample], x: &Vec3, kernel: &Kernel) -> PointField {
    let mut u = ZERO;
    let mut lap = ZERO;
    let mut grad = [ZERO; 3];
    let mut grad_lap = [ZERO; 3];
    for s in samples {
        let d = sub(x, &s.position);
        let r = norm(&d);
        let v = kernel.all(r);
        u += v.g * s.weight;
        lap += v.lap_g * s.weight;
        let a = v.dg_dr * (s.weight / r);
        let b = v.dlap_g_dr * (s.weight / r);
        for c in 0..3 {
            grad[c] += a * d[c];
            grad_lap[c] += b * d[c];
        }
    }
    PointField {
        u,
        grad_u: grad,
        lap_u: lap,
        grad_lap_u: grad_lap,
    }
}

pub(crate) fn field_u(samples: &[WeightedSample], x: &Vec3, kernel: &Kernel) -> Complex64 {
    let mut u = ZERO;
    for s in samples {
        let r = norm(&sub(x, &s.position));
        u += kernel.g(r) * s.weight;
    }
    u
}

fn check_outside(f: &SourceField, x: &Vec3) -> Result<()> {
    let r = norm(x);
    if r > f.support_radius() {
        Ok(())
    } else {
        Err(invalid(format!(
            "evaluation point at |x| = {r} is not outside the source ball of radius {}",
            f.support_radius()
        )))
    }
}

/// Boundary traces of the volume potential `u = G * f` at real frequency `k`.
pub fn synthesize_cauchy(
    f: &SourceField,
    grid: &SphereGrid,
    k: f64,
    sigma: f64,
) -> Result<CauchyTrace> {
    if grid.radius <= f.support_radius() {
        return Err(invalid(format!(
            "sphere radius {} must exceed the source radius {}",
            grid.radius,
            f.support_radius()
        )));
    }
    let wn = DampedWavenumber::real(k, sigma)?;
    let kernel = Kernel::new(wn.kappa);
    let samples = f.samples();
    let fields = par::map_slice(&grid.points, |x| field_full(&samples, x, &kernel));
    Ok(CauchyTrace {
        k,
        u: fields.iter().map(|p| p.u).collect(),
        grad_u: fields.iter().map(|p| p.grad_u).collect(),
        lap_u: fields.iter().map(|p| p.lap_u).collect(),
        grad_lap_u: fields.iter().map(|p| p.grad_lap_u).collect(),
    })
}

/// Traces at every node of `frequencies`.
pub fn synthesize_dataset(
    f: &SourceField,
    grid: &SphereGrid,
    frequencies: &FrequencyGrid,
    sigma: f64,
    provenance: Provenance,
) -> Result<CauchyDataset> {
    let traces = frequencies
        .nodes()
        .iter()
        .map(|&k| synthesize_cauchy(f, grid, k, sigma))
        .collect::<Result<Vec<_>>>()?;
    CauchyDataset::new(grid.clone(), frequencies.clone(), sigma, traces, provenance)
}

/// `u(x)` for a point outside the source ball; `k` may be complex.
pub fn field_at(f: &SourceField, x: &Vec3, wn: &DampedWavenumber) -> Result<Complex64> {
    check_outside(f, x)?;
    Ok(field_u(&f.samples(), x, &Kernel::new(wn.kappa)))
}

/// All four field quantities at a point outside the source ball.
pub fn point_field(f: &SourceField, x: &Vec3, wn: &DampedWavenumber) -> Result<PointField> {
    check_outside(f, x)?;
    Ok(field_full(&f.samples(), x, &Kernel::new(wn.kappa)))
}

/// [`field_at`] over many points.
pub fn field_at_many(f: &SourceField, xs: &[Vec3], wn: &DampedWavenumber) -> Result<Vec<Complex64>> {
    for x in xs {
        check_outside(f, x)?;
    }
    let samples = f.samples();
    let kernel = Kernel::new(wn.kappa);
    Ok(par::map_slice(xs, |x| field_u(&samples, x, &kernel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{make_source_field, Bump, SourceSpec};

    fn gaussian(n: usize) -> SourceField {
        let spec = SourceSpec::new(vec![Bump::Gaussian {
            center: [0.05, -0.02, 0.03],
            width: 0.15,
            amplitude: 1.0,
        }]);
        make_source_field(&spec, n, 0.7).unwrap()
    }

    #[test]
    fn zero_source_gives_zero_trace() {
        let f = SourceField::zeros(0.7, 8).unwrap();
        let grid = SphereGrid::with_count(1.0, 32).unwrap();
        let t = synthesize_cauchy(&f, &grid, 2.0, 0.5).unwrap();
        assert_eq!(t, CauchyTrace::zeros(2.0, grid.len()));
    }

    #[test]
    fn field_at_matches_trace_exactly() {
        let f = gaussian(12);
        let grid = SphereGrid::with_count(1.0, 18).unwrap();
        let t = synthesize_cauchy(&f, &grid, 2.0, 0.5).unwrap();
        let wn = DampedWavenumber::real(2.0, 0.5).unwrap();
        for (x, u) in grid.points.iter().zip(&t.u) {
            assert_eq!(field_at(&f, x, &wn).unwrap(), *u);
        }
    }

    #[test]
    fn negative_frequency_is_conjugate() {
        let f = gaussian(10);
        let grid = SphereGrid::with_count(1.0, 18).unwrap();
        let pos = synthesize_cauchy(&f, &grid, 3.0, 0.5).unwrap();
        let neg = synthesize_cauchy(&f, &grid, -3.0, 0.5).unwrap();
        for i in 0..grid.len() {
            let (a, b) = (pos.conj().components(i), neg.components(i));
            for c in 0..8 {
                assert!((a[c] - b[c]).norm() <= 1e-12 * a[c].norm().max(1e-12));
            }
        }
    }

    #[test]
    fn rejects_sphere_inside_support() {
        let f = gaussian(8);
        let grid = SphereGrid::with_count(0.6, 18).unwrap();
        assert!(synthesize_cauchy(&f, &grid, 1.0, 0.5).is_err());
        let wn = DampedWavenumber::real(1.0, 0.5).unwrap();
        assert!(field_at(&f, &[0.3, 0.0, 0.0], &wn).is_err());
    }

    #[test]
    fn linear_in_the_source() {
        let f = gaussian(10);
        let g = make_source_field(
            &SourceSpec::new(vec![Bump::Polynomial {
                center: [0.1, 0.1, 0.0],
                radius: 0.4,
                exponent: 2,
                amplitude: -2.0,
            }]),
            10,
            0.7,
        )
        .unwrap();
        let grid = SphereGrid::with_count(1.0, 18).unwrap();
        let combo = f.scaled(2.0).add(&g.scaled(-0.5)).unwrap();
        let tf = synthesize_cauchy(&f, &grid, 1.5, 0.3).unwrap();
        let tg = synthesize_cauchy(&g, &grid, 1.5, 0.3).unwrap();
        let tc = synthesize_cauchy(&combo, &grid, 1.5, 0.3).unwrap();
        for i in 0..grid.len() {
            let (a, b, c) = (tf.components(i), tg.components(i), tc.components(i));
            for j in 0..8 {
                let expected = a[j] * 2.0 - b[j] * 0.5;
                assert!((c[j] - expected).norm() <= 1e-12 * expected.norm().max(1e-10));
            }
        }
    }

    #[test]
    fn exponential_decay_along_a_ray() {
        let f = gaussian(10);
        let wn = DampedWavenumber::real(2.0, 0.5).unwrap();
        let radii: Vec<f64> = (0..8).map(|i| 2.0 + 1.5 * i as f64).collect();
        let mags: Vec<f64> = radii
            .iter()
            .map(|r| field_at(&f, &[*r, 0.0, 0.0], &wn).unwrap().norm())
            .collect();
        // Compare against the envelope so oscillation does not matter.
        let c = wn.kappa.im;
        let env: Vec<f64> = mags.iter().zip(&radii).map(|(m, r)| m * r).collect();
        for w in env.windows(2) {
            assert!(w[1] < w[0] * (-(c * 1.5) * 0.9).exp());
        }
        let slope = (env[7].ln() - env[0].ln()) / (radii[7] - radii[0]);
        assert!(slope < 0.0);
    }
}
