//! Plane-wave moments of the source from boundary traces.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid::{dot, Vec3};
use crate::par;
use crate::trace::{CauchyDataset, CauchyTrace};
use crate::wavenumber::DampedWavenumber;
use crate::SphereGrid;

/// `int f(y) e^{-i kappa d.y} dy` recovered at one direction and frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierSample {
    pub direction: Vec3,
    pub k: f64,
    pub kappa: Complex64,
    pub value: Complex64,
}

/// Samples on a polar grid, ordered frequency-major: entry `ik * n_dir + id`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSampleSet {
    pub sigma: f64,
    pub directions: Vec<Vec3>,
    pub ks: Vec<f64>,
    /// Trapezoid weights in `k`, aligned with `ks`.
    pub k_weights: Vec<f64>,
    pub samples: Vec<FourierSample>,
}

impl FourierSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, ik: usize, id: usize) -> &FourierSample {
        &self.samples[ik * self.directions.len() + id]
    }
}

pub(crate) fn check_unit(d: &Vec3) -> Result<()> {
    let n = dot(d, d).sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("direction must be a unit vector, |d| = {n}")));
    }
    Ok(())
}

/// Green's second identity for the bilaplacian with the test function
/// `v = e^{-i kappa d.x}`, which satisfies `lap^2 v = kappa^4 v`:
///
/// `int f v = oint [d_n(lap u) v - lap u d_n v + d_n u lap v - u d_n(lap v)] ds`.
pub fn boundary_functional(
    trace: &CauchyTrace,
    grid: &SphereGrid,
    d: &Vec3,
    sigma: f64,
) -> Result<Complex64> {
    trace.check_points(grid.len())?;
    check_unit(d)?;
    let kappa = DampedWavenumber::real(trace.k, sigma)?.kappa;
    Ok(functional_with(trace, grid, d, kappa))
}

fn functional_with(trace: &CauchyTrace, grid: &SphereGrid, d: &Vec3, kappa: Complex64) -> Complex64 {
    let i = Complex64::i();
    let (k2, k3) = (kappa * kappa, kappa * kappa * kappa);
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..grid.len() {
        let x = &grid.points[p];
        let nu = &grid.normals[p];
        let dn = |g: &[Complex64; 3]| g[0] * nu[0] + g[1] * nu[1] + g[2] * nu[2];
        let dnu = dot(d, nu);
        let v = (-i * kappa * dot(d, x)).exp();
        let integrand = dn(&trace.grad_lap_u[p]) + i * kappa * dnu * trace.lap_u[p]
            - k2 * dn(&trace.grad_u[p])
            - i * k3 * dnu * trace.u[p];
        total += grid.weights[p] * v * integrand;
    }
    total
}

/// Applies [`boundary_functional`] over `directions x ks`, where every `k`
/// must be a node of the dataset's frequency grid.
pub fn sample_fourier(
    dataset: &CauchyDataset,
    directions: &[Vec3],
    ks: &[f64],
) -> Result<FourierSampleSet> {
    for d in directions {
        check_unit(d)?;
    }
    let idx: Vec<usize> = ks
        .iter()
        .map(|k| {
            dataset
                .frequencies
                .index_of(*k)
                .ok_or_else(|| invalid(format!("k = {k} is not a node of the dataset grid")))
        })
        .collect::<Result<_>>()?;
    if idx.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("sample frequencies must be strictly increasing"));
    }
    let sub = crate::FrequencyGrid::from_nodes(ks.to_vec())?;
    let sigma = dataset.sigma;
    let kappas: Vec<Complex64> = ks
        .iter()
        .map(|k| DampedWavenumber::real(*k, sigma).map(|w| w.kappa))
        .collect::<Result<_>>()?;
    let nd = directions.len();
    let samples = par::map_range(ks.len() * nd, |j| {
        let (ik, id) = (j / nd, j % nd);
        let trace = &dataset.traces[idx[ik]];
        FourierSample {
            direction: directions[id],
            k: ks[ik],
            kappa: kappas[ik],
            value: functional_with(trace, &dataset.sphere, &directions[id], kappas[ik]),
        }
    });
    Ok(FourierSampleSet {
        sigma,
        directions: directions.to_vec(),
        ks: ks.to_vec(),
        k_weights: sub.weights().to_vec(),
        samples,
    })
}
