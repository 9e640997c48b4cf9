//! Compactly supported source terms sampled on a cube around the origin.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, invalid, Result};
use crate::grid::{norm, sub, Vec3};

/// One radial bump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bump {
    /// `amplitude * exp(-2 |x - center|^2 / width^2)`, set to zero where it
    /// falls below [`TRUNCATION_TOLERANCE`] of its peak. `width` is the radius
    /// at which the profile drops to `1/e^2` of its peak.
    Gaussian {
        center: Vec3,
        width: f64,
        amplitude: f64,
    },
    /// `amplitude * (1 - |x - center|^2 / radius^2)^exponent` inside the
    /// ball of radius `radius`, zero outside.
    Polynomial {
        center: Vec3,
        radius: f64,
        exponent: u32,
        amplitude: f64,
    },
}

/// Relative level at which gaussians are cut off.
pub const TRUNCATION_TOLERANCE: f64 = 1e-12;

impl Bump {
    pub fn value(&self, x: &Vec3) -> f64 {
        match *self {
            Bump::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r = norm(&sub(x, &center));
                let e = 2.0 * r * r / (width * width);
                if e > -TRUNCATION_TOLERANCE.ln() {
                    0.0
                } else {
                    amplitude * (-e).exp()
                }
            }
            Bump::Polynomial {
                center,
                radius,
                exponent,
                amplitude,
            } => {
                let r = norm(&sub(x, &center));
                if r >= radius {
                    0.0
                } else {
                    amplitude * (1.0 - r * r / (radius * radius)).powi(exponent as i32)
                }
            }
        }
    }

    /// Checks that the bump lives inside the ball of radius `support_radius`.
    pub fn validate(&self, support_radius: f64) -> Result<()> {
        match *self {
            Bump::Gaussian {
                center,
                width,
                amplitude,
            } => {
                finite("gaussian", &center, &[width, amplitude])?;
                if width <= 0.0 {
                    return Err(invalid(format!("gaussian width must be positive, got {width}")));
                }
                let gap = support_radius - norm(&center);
                if gap <= 0.0 {
                    return Err(invalid("gaussian centre lies outside the support ball"));
                }
                let tail = (-2.0 * gap * gap / (width * width)).exp();
                if tail > TRUNCATION_TOLERANCE {
                    return Err(invalid(format!(
                        "gaussian of width {width} is {tail:.2e} of its peak at the support \
                         radius {support_radius}; must be below {TRUNCATION_TOLERANCE:e}"
                    )));
                }
            }
            Bump::Polynomial {
                center,
                radius,
                exponent,
                amplitude,
            } => {
                finite("polynomial bump", &center, &[radius, amplitude])?;
                if radius <= 0.0 || exponent == 0 {
                    return Err(invalid("polynomial bump needs radius > 0 and exponent >= 1"));
                }
                if norm(&center) + radius > support_radius {
                    return Err(invalid(format!(
                        "polynomial bump support crosses |x| = {support_radius}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn finite(what: &str, center: &Vec3, rest: &[f64]) -> Result<()> {
    if center.iter().chain(rest).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{what} parameters must be finite")))
    }
}

/// A sum of bumps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceSpec {
    pub bumps: Vec<Bump>,
}

impl SourceSpec {
    pub fn new(bumps: Vec<Bump>) -> Self {
        Self { bumps }
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.bumps.iter().map(|b| b.value(x)).sum()
    }
}

/// Cell-centred samples of a real field on the cube `[-a, a]^3`, where `a`
/// is the support radius. Cells whose centre lies outside the ball of radius
/// `a` always hold zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceField {
    support_radius: f64,
    n_per_axis: usize,
    values: Vec<f64>,
}

/// Quadrature node of the volume rule: position and `h^3 f(y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedSample {
    pub position: Vec3,
    pub weight: f64,
}

impl SourceField {
    pub fn zeros(support_radius: f64, n_per_axis: usize) -> Result<Self> {
        if !(support_radius.is_finite() && support_radius > 0.0) || n_per_axis == 0 {
            return Err(invalid("source grid needs a positive radius and n_per_axis >= 1"));
        }
        Ok(Self {
            support_radius,
            n_per_axis,
            values: vec![0.0; n_per_axis.pow(3)],
        })
    }

    /// Wraps existing samples; they must vanish outside the support ball.
    pub fn from_values(support_radius: f64, n_per_axis: usize, values: Vec<f64>) -> Result<Self> {
        let mut field = Self::zeros(support_radius, n_per_axis)?;
        check_len("source values", field.values.len(), values.len())?;
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(invalid("source values must be finite"));
            }
            if *v != 0.0 && !field.inside(idx) {
                return Err(invalid("source values must vanish outside the support ball"));
            }
        }
        field.values = values;
        Ok(field)
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.support_radius / self.n_per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.support_radius + (i as f64 + 0.5) * self.spacing()
    }

    /// Centre of the cell with flat index `idx` (x slowest, z fastest).
    pub fn point(&self, idx: usize) -> Vec3 {
        let n = self.n_per_axis;
        [self.coord(idx / (n * n)), self.coord(idx / n % n), self.coord(idx % n)]
    }

    fn inside(&self, idx: usize) -> bool {
        norm(&self.point(idx)) <= self.support_radius
    }

    pub fn same_geometry(&self, other: &SourceField) -> bool {
        self.support_radius == other.support_radius && self.n_per_axis == other.n_per_axis
    }

    /// Nonzero cells as midpoint-rule nodes.
    pub fn samples(&self) -> Vec<WeightedSample> {
        let w = self.cell_volume();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(idx, v)| WeightedSample {
                position: self.point(idx),
                weight: w * v,
            })
            .collect()
    }

    /// Midpoint-rule `int f^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn l1_norm(&self) -> f64 {
        self.cell_volume() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &SourceField) -> Result<Self> {
        if !self.same_geometry(other) {
            return Err(invalid("source fields live on different grids"));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }
}

/// Samples `spec` on an `n_per_axis^3` cell grid covering `[-r_hat, r_hat]^3`.
pub fn make_source_field(spec: &SourceSpec, n_per_axis: usize, r_hat: f64) -> Result<SourceField> {
    let mut field = SourceField::zeros(r_hat, n_per_axis)?;
    for bump in &spec.bumps {
        bump.validate(r_hat)?;
    }
    for idx in 0..field.values.len() {
        if field.inside(idx) {
            field.values[idx] = spec.value(&field.point(idx));
        }
    }
    Ok(field)
}
