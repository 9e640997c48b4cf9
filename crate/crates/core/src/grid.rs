//! Quadrature grids: points on a sphere and nodes on a frequency interval.

use std::f64::consts::PI;

use crate::error::{check_len, invalid, Result};

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Quadrature on the sphere of radius `radius` centred at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    pub radius: f64,
    pub points: Vec<Vec3>,
    /// Outward unit normals.
    pub normals: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    /// Gauss-Legendre in `cos(theta)` times the trapezoid rule in `phi`.
    ///
    /// Integrates spherical harmonics up to degree `2 n_theta - 1` in the
    /// polar direction and `n_phi - 1` in azimuth exactly.
    pub fn gauss_product(radius: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        check_radius(radius)?;
        if n_theta == 0 || n_phi == 0 {
            return Err(invalid("sphere grid needs at least one node per direction"));
        }
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let r2 = radius * radius;
        let mut grid = Self::empty(radius, n_theta * n_phi);
        for (ct, wt) in x.iter().zip(&w) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for j in 0..n_phi {
                // Half-step offset keeps the grid free of the poles' symmetry axis.
                let phi = (j as f64 + 0.5) * dphi;
                grid.push([st * phi.cos(), st * phi.sin(), *ct], wt * dphi * r2);
            }
        }
        Ok(grid)
    }

    /// Product grid with roughly `n` points, `n_phi = 2 n_theta`.
    pub fn with_count(radius: f64, n: usize) -> Result<Self> {
        let n_theta = ((n as f64 / 2.0).sqrt().round() as usize).max(1);
        Self::gauss_product(radius, n_theta, 2 * n_theta)
    }

    /// Fibonacci lattice with equal weights `4 pi R^2 / n`.
    pub fn fibonacci(radius: f64, n: usize) -> Result<Self> {
        check_radius(radius)?;
        if n == 0 {
            return Err(invalid("sphere grid needs at least one point"));
        }
        let w = 4.0 * PI * radius * radius / n as f64;
        let mut grid = Self::empty(radius, n);
        for d in fibonacci_directions(n) {
            grid.push(d, w);
        }
        Ok(grid)
    }

    fn empty(radius: f64, cap: usize) -> Self {
        Self {
            radius,
            points: Vec::with_capacity(cap),
            normals: Vec::with_capacity(cap),
            weights: Vec::with_capacity(cap),
        }
    }

    fn push(&mut self, normal: Vec3, weight: f64) {
        let r = self.radius;
        self.points.push([r * normal[0], r * normal[1], r * normal[2]]);
        self.normals.push(normal);
        self.weights.push(weight);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the orthogonal matrix `rot` (row-major) to points and normals.
    pub fn rotated(&self, rot: &[[f64; 3]; 3]) -> Self {
        let apply = |v: &Vec3| -> Vec3 {
            [dot(&rot[0], v), dot(&rot[1], v), dot(&rot[2], v)]
        };
        Self {
            radius: self.radius,
            points: self.points.iter().map(apply).collect(),
            normals: self.normals.iter().map(apply).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Reorders the grid so that entry `i` of the result is entry `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len("permutation", self.len(), perm.len())?;
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("not a permutation"));
            }
        }
        Ok(Self {
            radius: self.radius,
            points: perm.iter().map(|&i| self.points[i]).collect(),
            normals: perm.iter().map(|&i| self.normals[i]).collect(),
            weights: perm.iter().map(|&i| self.weights[i]).collect(),
        })
    }

    /// Weighted sum of `values` over the grid.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        check_len("sphere values", self.len(), values.len())?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("sphere radius must be positive, got {radius}")))
    }
}

/// Unit vectors on the golden-angle spiral.
pub fn fibonacci_directions(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Increasing frequency nodes with composite trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("frequency grid needs at least two nodes"));
        }
        if nodes.iter().any(|k| !k.is_finite() || *k <= 0.0) {
            return Err(invalid("frequency nodes must be finite and positive"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("frequency nodes must be strictly increasing"));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        Ok(Self { nodes, weights })
    }

    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(end > start) {
            return Err(invalid("uniform grid needs n >= 2 and end > start"));
        }
        let h = (end - start) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| start + h * i as f64).collect();
        nodes[n - 1] = end;
        Self::from_nodes(nodes)
    }

    /// Nodes equispaced in `sqrt(k)`, which matches the radial spacing of
    /// `Re kappa` and keeps the reconstruction's polar grid uniform.
    pub fn sqrt_uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(end > start) || start <= 0.0 {
            return Err(invalid("sqrt grid needs n >= 2 and 0 < start < end"));
        }
        let (a, b) = (start.sqrt(), end.sqrt());
        let h = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| (a + h * i as f64).powi(2)).collect();
        nodes[0] = start;
        nodes[n - 1] = end;
        Self::from_nodes(nodes)
    }

    /// Nodes equispaced in `sqrt(k)` with spacing at most `step`, with every
    /// breakpoint included as a node. Breakpoints must be increasing.
    pub fn sqrt_piecewise(breakpoints: &[f64], step: f64) -> Result<Self> {
        if breakpoints.len() < 2 || !(step > 0.0) {
            return Err(invalid("piecewise grid needs two breakpoints and a positive step"));
        }
        let mut nodes = vec![breakpoints[0]];
        for w in breakpoints.windows(2) {
            let (a, b) = (w[0].sqrt(), w[1].sqrt());
            if !(b > a) {
                return Err(invalid("breakpoints must be strictly increasing"));
            }
            let m = ((b - a) / step).ceil().max(1.0) as usize;
            let h = (b - a) / m as f64;
            for i in 1..m {
                nodes.push((a + h * i as f64).powi(2));
            }
            nodes.push(w[1]);
        }
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the node equal to `k` within a relative tolerance of 1e-12.
    pub fn index_of(&self, k: f64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|x| (x - k).abs() <= 1e-12 * k.abs().max(1.0))
    }

    /// Trapezoid rule over the whole grid.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        check_len("frequency values", self.len(), values.len())?;
        Ok(values.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// Trapezoid integral from the first node to `upto`; inside the last
    /// interval the integrand is interpolated linearly.
    pub fn partial_integral(&self, values: &[f64], upto: f64) -> Result<f64> {
        check_len("frequency values", self.len(), values.len())?;
        let (a, b) = (self.start(), self.end());
        let tol = 1e-12 * b.abs().max(1.0);
        if !(upto >= a - tol && upto <= b + tol) {
            return Err(invalid(format!(
                "upper limit {upto} outside the grid range [{a}, {b}]"
            )));
        }
        let upto = upto.clamp(a, b);
        let mut total = 0.0;
        for i in 0..self.len() - 1 {
            let (k0, k1) = (self.nodes[i], self.nodes[i + 1]);
            if upto <= k0 {
                break;
            }
            let (v0, v1) = (values[i], values[i + 1]);
            if upto >= k1 {
                total += 0.5 * (k1 - k0) * (v0 + v1);
            } else {
                let vu = v0 + (v1 - v0) * (upto - k0) / (k1 - k0);
                total += 0.5 * (upto - k0) * (v0 + vu);
                break;
            }
        }
        Ok(total)
    }
}

/// Trapezoid rule over a frequency grid; free-function form of
/// [`FrequencyGrid::integrate`].
pub fn frequency_integral(values: &[f64], grid: &FrequencyGrid) -> Result<f64> {
    grid.integrate(values)
}
