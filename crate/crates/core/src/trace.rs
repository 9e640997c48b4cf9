//! Boundary measurements: the four traces `u`, `grad u`, `lap u`,
//! `grad lap u` on a sphere, at one or many frequencies.

use num_complex::Complex64;

use crate::error::{check_len, invalid, Result};
use crate::grid::{FrequencyGrid, SphereGrid};

pub type CVec3 = [Complex64; 3];

/// Cauchy data at a single real frequency, one entry per sphere point.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyTrace {
    pub k: f64,
    pub u: Vec<Complex64>,
    pub grad_u: Vec<CVec3>,
    pub lap_u: Vec<Complex64>,
    pub grad_lap_u: Vec<CVec3>,
}

impl CauchyTrace {
    pub fn zeros(k: f64, n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            k,
            u: vec![z; n],
            grad_u: vec![[z; 3]; n],
            lap_u: vec![z; n],
            grad_lap_u: vec![[z; 3]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn check_points(&self, n: usize) -> Result<()> {
        check_len("trace u", n, self.u.len())?;
        check_len("trace grad u", n, self.grad_u.len())?;
        check_len("trace lap u", n, self.lap_u.len())?;
        check_len("trace grad lap u", n, self.grad_lap_u.len())
    }

    /// The eight complex components at point `i` in storage order
    /// `u, du/dx, du/dy, du/dz, lap u, d(lap u)/dx, d(lap u)/dy, d(lap u)/dz`.
    pub fn components(&self, i: usize) -> [Complex64; 8] {
        let (g, gl) = (self.grad_u[i], self.grad_lap_u[i]);
        [self.u[i], g[0], g[1], g[2], self.lap_u[i], gl[0], gl[1], gl[2]]
    }

    pub fn set_components(&mut self, i: usize, c: [Complex64; 8]) {
        self.u[i] = c[0];
        self.grad_u[i] = [c[1], c[2], c[3]];
        self.lap_u[i] = c[4];
        self.grad_lap_u[i] = [c[5], c[6], c[7]];
    }

    pub fn conj(&self) -> Self {
        let c3 = |v: &CVec3| [v[0].conj(), v[1].conj(), v[2].conj()];
        Self {
            k: self.k,
            u: self.u.iter().map(Complex64::conj).collect(),
            grad_u: self.grad_u.iter().map(c3).collect(),
            lap_u: self.lap_u.iter().map(Complex64::conj).collect(),
            grad_lap_u: self.grad_lap_u.iter().map(c3).collect(),
        }
    }
}

/// Number of complex components stored per sphere point.
pub const COMPONENTS: usize = 8;

fn abs2_3(v: &CVec3) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()
}

/// Sphere quadrature of
/// `(k^4 + k^2)|u|^2 + k^2 |grad u|^2 + (k^2 + 1)|lap u|^2 + |grad lap u|^2`.
pub fn boundary_norm_sq(trace: &CauchyTrace, grid: &SphereGrid) -> Result<f64> {
    trace.check_points(grid.len())?;
    let k2 = trace.k * trace.k;
    let mut total = 0.0;
    for i in 0..grid.len() {
        let density = (k2 * k2 + k2) * trace.u[i].norm_sqr()
            + k2 * abs2_3(&trace.grad_u[i])
            + (k2 + 1.0) * trace.lap_u[i].norm_sqr()
            + abs2_3(&trace.grad_lap_u[i]);
        total += grid.weights[i] * density;
    }
    Ok(total)
}

/// Where a dataset came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub noise_level: f64,
}

/// Traces on a shared sphere grid at every node of a frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyDataset {
    pub sphere: SphereGrid,
    pub frequencies: FrequencyGrid,
    pub sigma: f64,
    pub traces: Vec<CauchyTrace>,
    pub provenance: Provenance,
}

impl CauchyDataset {
    pub fn new(
        sphere: SphereGrid,
        frequencies: FrequencyGrid,
        sigma: f64,
        traces: Vec<CauchyTrace>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_len("dataset traces", frequencies.len(), traces.len())?;
        for (trace, k) in traces.iter().zip(frequencies.nodes()) {
            trace.check_points(sphere.len())?;
            if trace.k != *k {
                return Err(invalid(format!(
                    "trace frequency {} does not match grid node {k}",
                    trace.k
                )));
            }
        }
        Ok(Self {
            sphere,
            frequencies,
            sigma,
            traces,
            provenance,
        })
    }

    /// `boundary_norm_sq` at every frequency node.
    pub fn norms(&self) -> Vec<f64> {
        self.traces
            .iter()
            .map(|t| boundary_norm_sq(t, &self.sphere).expect("validated at construction"))
            .collect()
    }

    /// Dataset restricted to the nodes in `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let keep: Vec<usize> = (0..self.frequencies.len())
            .filter(|&i| {
                let k = self.frequencies.nodes()[i];
                k >= lo && k <= hi
            })
            .collect();
        let nodes = keep.iter().map(|&i| self.frequencies.nodes()[i]).collect();
        Self::new(
            self.sphere.clone(),
            FrequencyGrid::from_nodes(nodes)?,
            self.sigma,
            keep.iter().map(|&i| self.traces[i].clone()).collect(),
            self.provenance.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_trace_has_zero_norm() {
        let grid = SphereGrid::with_count(1.0, 50).unwrap();
        let t = CauchyTrace::zeros(3.0, grid.len());
        assert_eq!(boundary_norm_sq(&t, &grid).unwrap(), 0.0);
    }

    #[test]
    fn constant_u_on_unit_sphere() {
        let grid = SphereGrid::with_count(1.0, 72).unwrap();
        let mut t = CauchyTrace::zeros(1.0, grid.len());
        let c = Complex64::new(0.6, -0.8);
        t.u.iter_mut().for_each(|u| *u = c);
        assert_relative_eq!(boundary_norm_sq(&t, &grid).unwrap(), 8.0 * PI, max_relative = 1e-13);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let grid = SphereGrid::with_count(1.0, 50).unwrap();
        let t = CauchyTrace::zeros(1.0, grid.len() + 1);
        assert!(boundary_norm_sq(&t, &grid).is_err());
    }

    #[test]
    fn components_round_trip() {
        let mut t = CauchyTrace::zeros(1.0, 2);
        let c: [Complex64; 8] = std::array::from_fn(|j| Complex64::new(j as f64, -(j as f64)));
        t.set_components(1, c);
        assert_eq!(t.components(1), c);
    }
}
