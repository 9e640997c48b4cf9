//! Independent oracles with frozen bounds, run by `platelab verify`.

use num_complex::Complex64;
use platelab_core::forward::{field_at_many, residual_check, synthesize_cauchy, ResidualProbe};
use platelab_core::grid::fibonacci_directions;
use platelab_core::inverse::{boundary_functional, mu_lower_bound, mu_prefactor, AnalyticContinuationParams};
use platelab_core::ode::{dopri5, Tolerance};
use platelab_core::timedomain::{
    multiplier_values, regime, time_to_frequency, BoxParams, FieldKind, Regime, SpectralBoxField,
};
use platelab_core::{make_source_field, Bump, DampedWavenumber, SourceField, SourceSpec, SphereGrid, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub comparison: Comparison,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl OracleOutcome {
    fn new(name: &'static str, measured: f64, comparison: Comparison, bound: f64, detail: String) -> Self {
        let pass = match comparison {
            Comparison::Below => measured < bound,
            Comparison::AtLeast => measured >= bound,
        };
        Self {
            name,
            measured,
            comparison,
            bound,
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub oracles: Vec<OracleOutcome>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.oracles.iter().all(|o| o.pass)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.oracles.iter().filter(|o| !o.pass).map(|o| o.name).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn gaussian(center: Vec3, width: f64, n_vol: usize, r_hat: f64) -> Result<SourceField> {
    let spec = SourceSpec::new(vec![Bump::Gaussian {
        center,
        width,
        amplitude: 1.0,
    }]);
    Ok(make_source_field(&spec, n_vol, r_hat)?)
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Boundary functional against direct volume quadrature of
/// `int f(y) e^{-i kappa d.y} dy`.
#[derive(Clone, Debug)]
pub struct GreenIdentityOracle {
    pub width: f64,
    pub center: Vec3,
    pub source_radius: f64,
    pub n_vol: usize,
    pub sphere_radius: f64,
    pub n_sphere: usize,
    pub n_dir: usize,
    pub ks: Vec<f64>,
    pub sigma: f64,
    /// Relative change applied to `kappa` on the volume side only.
    pub kappa_perturbation: f64,
    pub bound: f64,
}

impl Default for GreenIdentityOracle {
    fn default() -> Self {
        Self {
            width: 0.12,
            center: [0.05, -0.03, 0.04],
            source_radius: 0.75,
            n_vol: 64,
            sphere_radius: 1.0,
            n_sphere: 2048,
            n_dir: 6,
            ks: vec![1.0, 5.0, 10.0],
            sigma: 0.5,
            kappa_perturbation: 0.0,
            bound: 1e-6,
        }
    }
}

impl GreenIdentityOracle {
    pub fn run(&self) -> Result<OracleOutcome> {
        let f = gaussian(self.center, self.width, self.n_vol, self.source_radius)?;
        let grid = SphereGrid::with_count(self.sphere_radius, self.n_sphere)?;
        let dirs = fibonacci_directions(self.n_dir);
        let samples = f.samples();
        let mut worst: f64 = 0.0;
        for &k in &self.ks {
            let trace = synthesize_cauchy(&f, &grid, k, self.sigma)?;
            let kappa = DampedWavenumber::real(k, self.sigma)?.kappa * (1.0 + self.kappa_perturbation);
            for d in &dirs {
                let got = boundary_functional(&trace, &grid, d, self.sigma)?;
                let want: Complex64 = samples
                    .iter()
                    .map(|s| s.weight * (-Complex64::i() * kappa * dot(d, &s.position)).exp())
                    .sum();
                worst = worst.max((got - want).norm() / want.norm());
            }
        }
        Ok(OracleOutcome::new(
            "green_identity",
            worst,
            Comparison::Below,
            self.bound,
            format!(
                "max relative error over k in {:?}, {} directions, {} sphere points",
                self.ks,
                dirs.len(),
                grid.len()
            ),
        ))
    }
}

/// Closed-form multiplier against an adaptive Dormand-Prince solve of
/// `m'' + sigma m' + xi^4 m = 0`.
#[derive(Clone, Debug)]
pub struct MultiplierOracle {
    pub n_triples: usize,
    pub seed: u64,
    pub t_max: f64,
    pub error_bound: f64,
    pub identity_bound: f64,
}

impl Default for MultiplierOracle {
    fn default() -> Self {
        Self {
            n_triples: 100,
            seed: 7,
            t_max: 20.0,
            error_bound: 1e-8,
            identity_bound: 1e-12,
        }
    }
}

/// Random `(t, |xi|, sigma)` with every third triple in each regime.
pub fn multiplier_triples(n: usize, seed: u64, t_max: f64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = rng.gen_range(0.0..t_max);
            let (xi, sigma): (f64, f64) = match i % 3 {
                0 => {
                    let s: f64 = rng.gen_range(0.5..4.0);
                    ((0.5 * s).sqrt() * rng.gen_range(0.05..0.95), s)
                }
                1 => {
                    let xi: f64 = rng.gen_range(0.2..1.4);
                    (xi, 2.0 * xi * xi)
                }
                _ => {
                    let s: f64 = rng.gen_range(0.0..4.0);
                    ((0.5 * s).sqrt().max(0.3) * rng.gen_range(1.05..4.0), s)
                }
            };
            (t, xi, sigma)
        })
        .collect()
}

impl MultiplierOracle {
    pub fn run(&self) -> Result<[OracleOutcome; 2]> {
        let triples = multiplier_triples(self.n_triples, self.seed, self.t_max);
        let tol = Tolerance {
            rtol: 1e-13,
            atol: 1e-15,
        };
        let (mut err, mut residual): (f64, f64) = (0.0, 0.0);
        let mut seen = [false; 3];
        for &(t, xi, sigma) in &triples {
            seen[match regime(xi, sigma) {
                Regime::Overdamped => 0,
                Regime::Critical => 1,
                Regime::Oscillatory => 2,
            }] = true;
            let v = multiplier_values(t, xi, sigma)?;
            let xi4 = xi.powi(4);
            let y = dopri5(|_, y: &[f64; 2]| [y[1], -sigma * y[1] - xi4 * y[0]], 0.0, [0.0, 1.0], t, tol)?;
            let d2 = -sigma * y[1] - xi4 * y[0];
            err = err.max((v.m - y[0]).abs()).max((v.dm - y[1]).abs()).max((v.d2m - d2).abs());
            residual = residual.max((v.d2m + sigma * v.dm + xi4 * v.m).abs());
        }
        let regimes = if seen.iter().all(|s| *s) { "all three regimes" } else { "NOT all regimes" };
        let mut first = OracleOutcome::new(
            "multiplier_ode",
            err,
            Comparison::Below,
            self.error_bound,
            format!("max abs error in m, m', m'' over {} triples, {regimes}", triples.len()),
        );
        first.pass &= seen.iter().all(|s| *s);
        Ok([
            first,
            OracleOutcome::new(
                "multiplier_identity",
                residual,
                Comparison::Below,
                self.identity_bound,
                "max |m'' + sigma m' + xi^4 m|".to_string(),
            ),
        ])
    }
}

/// Time-domain simulation transformed to frequency against the forward
/// solver at points on a sphere.
#[derive(Clone, Debug)]
pub struct CrossSolverOracle {
    pub width: f64,
    pub center: Vec3,
    pub source_radius: f64,
    pub n_vol: usize,
    pub radius: f64,
    pub n_points: usize,
    pub box_params: BoxParams,
    pub dt: f64,
    pub t_max: f64,
    pub sigma: f64,
    pub ks: Vec<f64>,
    pub bound: f64,
}

impl Default for CrossSolverOracle {
    fn default() -> Self {
        Self {
            width: 0.3,
            center: [0.02, 0.01, -0.02],
            source_radius: 1.2,
            n_vol: 24,
            radius: 1.5,
            n_points: 8,
            box_params: BoxParams {
                half_length: 40.0,
                n_box: 250,
            },
            dt: 0.02,
            t_max: 200.0,
            sigma: 0.5,
            ks: (0..9).map(|i| 1.0 + 0.5 * i as f64).collect(),
            bound: 2e-2,
        }
    }
}

impl CrossSolverOracle {
    pub fn run(&self) -> Result<OracleOutcome> {
        let f = gaussian(self.center, self.width, self.n_vol, self.source_radius)?;
        let field = SpectralBoxField::from_source(&f, self.box_params, self.sigma)?;
        let r = self.radius;
        let points: Vec<Vec3> = fibonacci_directions(self.n_points)
            .iter()
            .map(|d| [r * d[0], r * d[1], r * d[2]])
            .collect();
        let nt = (self.t_max / self.dt).round() as usize;
        let times: Vec<f64> = (0..=nt).map(|i| i as f64 * self.dt).collect();
        let series = field.sample_points(&points, &times, &[FieldKind::U])?;
        let per_point: Vec<Vec<f64>> = (0..points.len())
            .map(|p| series.series(p, FieldKind::U).expect("U was requested"))
            .collect();
        let transformed = time_to_frequency(&times, &per_point, &self.ks)?;
        let mut worst: f64 = 0.0;
        for (ik, &k) in self.ks.iter().enumerate() {
            let u = field_at_many(&f, &points, &DampedWavenumber::real(k, self.sigma)?)?;
            for (a, b) in transformed[ik].iter().zip(&u) {
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
        Ok(OracleOutcome::new(
            "cross_solver",
            worst,
            Comparison::Below,
            self.bound,
            format!(
                "max relative error over {} points x {} frequencies, T = {}, wrap guard ratio {:.2e}",
                points.len(),
                self.ks.len(),
                self.t_max,
                series.guard_ratio
            ),
        ))
    }
}

/// Convergence order of the finite-difference bilaplacian residual.
#[derive(Clone, Debug)]
pub struct ResidualOrderOracle {
    pub width: f64,
    pub center: Vec3,
    pub source_radius: f64,
    pub n_vol: usize,
    pub shell_radius: f64,
    pub n_points: usize,
    pub outer_radius: f64,
    pub spacings: Vec<f64>,
    pub ks: Vec<f64>,
    pub sigma: f64,
    pub bound: f64,
}

impl Default for ResidualOrderOracle {
    fn default() -> Self {
        Self {
            width: 0.13,
            center: [0.05, -0.02, 0.03],
            source_radius: 0.6,
            n_vol: 24,
            shell_radius: 1.2,
            n_points: 16,
            outer_radius: 2.0,
            spacings: vec![0.08, 0.04, 0.02],
            ks: vec![2.0, 5.0],
            sigma: 0.5,
            bound: 1.8,
        }
    }
}

impl ResidualOrderOracle {
    /// Relative residuals per `k`, one entry per spacing.
    pub fn residuals(&self) -> Result<Vec<Vec<f64>>> {
        let f = gaussian(self.center, self.width, self.n_vol, self.source_radius)?;
        self.ks
            .iter()
            .map(|&k| {
                let wn = DampedWavenumber::real(k, self.sigma)?;
                self.spacings
                    .iter()
                    .map(|&h| {
                        let probe = ResidualProbe::shell(self.shell_radius, self.n_points, h, self.outer_radius);
                        Ok(residual_check(&f, &wn, &probe)?.relative())
                    })
                    .collect()
            })
            .collect()
    }

    pub fn run(&self) -> Result<OracleOutcome> {
        let res = self.residuals()?;
        let mut orders = Vec::new();
        for per_k in &res {
            for (w, h) in per_k.windows(2).zip(self.spacings.windows(2)) {
                orders.push((w[0] / w[1]).ln() / (h[0] / h[1]).ln());
            }
        }
        let worst = orders.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(OracleOutcome::new(
            "residual_order",
            worst,
            Comparison::AtLeast,
            self.bound,
            format!("min observed order over k in {:?}, h in {:?}", self.ks, self.spacings),
        ))
    }
}

/// High-precision reference values for `delta = 1, K = 5, d = 0.5`.
pub const MU_PREFACTOR_REF: f64 = 0.254_296_304_043_514_41;
pub const MU_AT_6_REF: f64 = 8.868_182_721_183_486e-7;

pub fn mu_oracle() -> Result<OracleOutcome> {
    let p = AnalyticContinuationParams::new(1.0, 5.0, 0.5)?;
    let e_pre = (mu_prefactor(&p) - MU_PREFACTOR_REF).abs() / MU_PREFACTOR_REF;
    let e_mu = (mu_lower_bound(6.0, &p)? - MU_AT_6_REF).abs() / MU_AT_6_REF;
    Ok(OracleOutcome::new(
        "mu_arithmetic",
        e_pre.max(e_mu),
        Comparison::Below,
        1e-12,
        "relative error of the prefactor and mu(6) for delta = 1, K = 5, d = 0.5".to_string(),
    ))
}

/// Every oracle at its frozen configuration.
pub fn run_verify() -> Result<VerifyReport> {
    let mut oracles = vec![GreenIdentityOracle::default().run()?];
    oracles.extend(MultiplierOracle::default().run()?);
    oracles.push(CrossSolverOracle::default().run()?);
    oracles.push(ResidualOrderOracle::default().run()?);
    oracles.push(mu_oracle()?);
    Ok(VerifyReport { oracles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_green() -> GreenIdentityOracle {
        GreenIdentityOracle {
            n_vol: 16,
            n_sphere: 512,
            n_dir: 3,
            ks: vec![2.0],
            ..GreenIdentityOracle::default()
        }
    }

    #[test]
    fn green_oracle_detects_kappa_perturbation() {
        assert!(small_green().run().unwrap().pass);
        let bad = GreenIdentityOracle {
            kappa_perturbation: 1e-3,
            ..small_green()
        };
        assert!(!bad.run().unwrap().pass);
    }

    #[test]
    fn triples_cover_every_regime() {
        let t = multiplier_triples(9, 1, 5.0);
        assert!(t.iter().any(|&(_, x, s)| regime(x, s) == Regime::Critical));
        assert!(t.iter().any(|&(_, x, s)| regime(x, s) == Regime::Overdamped));
        assert!(t.iter().any(|&(_, x, s)| regime(x, s) == Regime::Oscillatory));
    }

    #[test]
    fn mu_reference_matches() {
        assert!(mu_oracle().unwrap().pass);
    }

    #[test]
    fn report_lists_tolerances() {
        let r = VerifyReport {
            oracles: vec![mu_oracle().unwrap()],
        };
        let json = r.to_json();
        assert!(json.contains("\"bound\": 1e-12"));
        assert!(json.contains("\"comparison\": \"<\""));
    }
}
