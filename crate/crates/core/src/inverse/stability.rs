//! Data size, partial data integrals, the analytic-continuation exponent
//! and the high-frequency tail.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::forward::synthesize_dataset;
use crate::grid::{FrequencyGrid, SphereGrid};
use crate::source::SourceField;
use crate::trace::{CauchyDataset, Provenance};
use crate::wavenumber::DampedWavenumber;

/// `int ||u(k)||^2 dk` over the dataset's frequency range by the trapezoid
/// rule. The range starts at the grid's first node, not at zero.
pub fn epsilon_data(dataset: &CauchyDataset) -> Result<f64> {
    dataset.frequencies.integrate(&dataset.norms())
}

/// `I(k) = int_delta^k ||u(w)||^2 dw` with `delta` the first grid node.
pub fn i_of_k(dataset: &CauchyDataset, k: f64) -> Result<f64> {
    dataset.frequencies.partial_integral(&dataset.norms(), k)
}

/// Slab `(delta, inf) x (-d, d)` and band `[delta, K]` of the continuation
/// argument, with `a = K - delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticContinuationParams {
    pub delta: f64,
    pub k_band: f64,
    pub d: f64,
}

impl AnalyticContinuationParams {
    pub fn new(delta: f64, k_band: f64, d: f64) -> Result<Self> {
        if !(delta > 0.0 && k_band > delta && d > 0.0 && k_band.is_finite() && d.is_finite()) {
            return Err(invalid("continuation needs 0 < delta < K and d > 0"));
        }
        Ok(Self { delta, k_band, d })
    }

    pub fn a(&self) -> f64 {
        self.k_band - self.delta
    }
}

/// `64 a d / (3 pi^2 (a^2 + 4 d^2))`.
pub fn mu_prefactor(p: &AnalyticContinuationParams) -> f64 {
    let (a, d) = (p.a(), p.d);
    64.0 * a * d / (3.0 * PI * PI * (a * a + 4.0 * d * d))
}

/// Lower bound `mu_prefactor * exp((pi / 2d)(a/2 - z))` for `z > K`.
pub fn mu_lower_bound(z: f64, p: &AnalyticContinuationParams) -> Result<f64> {
    if !(z > p.k_band && z.is_finite()) {
        return Err(invalid(format!("mu is defined for z > K = {}, got {z}", p.k_band)));
    }
    Ok(mu_prefactor(p) * ((PI / (2.0 * p.d)) * (0.5 * p.a() - z)).exp())
}

/// Both sides of `I(k) <= C Q^2 e^{4R(sigma+2)|kappa|} eps1^{2 mu(k)}` on the
/// dataset nodes above `K`, with the smallest `C` that makes it hold.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub k_nodes: Vec<f64>,
    pub lhs: Vec<f64>,
    /// Right side without the fitted constant.
    pub rhs: Vec<f64>,
    pub epsilon1_sq: f64,
    /// `None` when the left side vanishes everywhere.
    pub constant: Option<f64>,
    /// `C * rhs - lhs` per node; nonnegative by construction.
    pub slack: Vec<f64>,
}

impl EnvelopeReport {
    pub fn is_degenerate(&self) -> bool {
        self.constant.is_none()
    }
}

/// Fits the continuation envelope. The dataset must start at `delta` and
/// extend beyond `K`; `q` is the declared source-norm bound.
pub fn continuation_envelope_check(
    dataset: &CauchyDataset,
    params: &AnalyticContinuationParams,
    q: f64,
) -> Result<EnvelopeReport> {
    let grid = &dataset.frequencies;
    if (grid.start() - params.delta).abs() > 1e-12 * params.delta.max(1.0) {
        return Err(invalid("dataset must start at delta"));
    }
    if !(grid.end() > params.k_band) {
        return Err(invalid("dataset must extend beyond K"));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(invalid("Q must be positive"));
    }
    let norms = dataset.norms();
    let eps1_sq = grid.partial_integral(&norms, params.k_band)?;
    let radius = dataset.sphere.radius;
    let mut k_nodes = Vec::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &k in grid.nodes().iter().filter(|k| **k > params.k_band) {
        let kappa = DampedWavenumber::real(k, dataset.sigma)?.kappa.norm();
        let mu = mu_lower_bound(k, params)?;
        // eps1^{2 mu} = (eps1^2)^mu
        let r = q * q * (4.0 * radius * (dataset.sigma + 2.0) * kappa).exp() * eps1_sq.powf(mu);
        k_nodes.push(k);
        lhs.push(grid.partial_integral(&norms, k)?);
        rhs.push(r);
    }
    let c = lhs.iter().zip(&rhs).map(|(l, r)| l / r).fold(0.0, f64::max);
    let constant = (c > 0.0).then_some(c);
    let slack = lhs.iter().zip(&rhs).map(|(l, r)| c * r - l).collect();
    Ok(EnvelopeReport {
        k_nodes,
        lhs,
        rhs,
        epsilon1_sq: eps1_sq,
        constant,
        slack,
    })
}

/// `int_s^{s_max} ||u(k)||^2 dk` for every `s` in `starts`, from one
/// synthesis on a grid equispaced in `sqrt(k)` with spacing at most `step`
/// that contains every start as a node.
pub fn tail_profile(
    f: &SourceField,
    sigma: f64,
    starts: &[f64],
    s_max: f64,
    sphere: &SphereGrid,
    step: f64,
) -> Result<Vec<f64>> {
    if starts.is_empty() || starts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("tail starts must be nonempty and strictly increasing"));
    }
    let last = starts[starts.len() - 1];
    if !(starts[0] > 0.0 && last <= s_max) {
        return Err(invalid("tail starts must lie in (0, s_max]"));
    }
    let mut breaks = starts.to_vec();
    if last < s_max {
        breaks.push(s_max);
    }
    if breaks.len() < 2 {
        return Ok(vec![0.0]);
    }
    let grid = FrequencyGrid::sqrt_piecewise(&breaks, step)?;
    let data = synthesize_dataset(f, sphere, &grid, sigma, Provenance::default())?;
    let norms = data.norms();
    let nodes = grid.nodes();
    // suffix[i] = int_{nodes[i]}^{s_max}
    let mut suffix = vec![0.0; nodes.len()];
    for i in (0..nodes.len() - 1).rev() {
        suffix[i] = suffix[i + 1] + 0.5 * (nodes[i + 1] - nodes[i]) * (norms[i] + norms[i + 1]);
    }
    starts
        .iter()
        .map(|s| {
            grid.index_of(*s)
                .map(|i| suffix[i])
                .ok_or_else(|| invalid("tail start missing from grid"))
        })
        .collect()
}

/// Single-start form of [`tail_profile`]; zero when `s == s_max`.
pub fn tail_integral(
    f: &SourceField,
    sigma: f64,
    s: f64,
    s_max: f64,
    sphere: &SphereGrid,
    step: f64,
) -> Result<f64> {
    Ok(tail_profile(f, sigma, &[s], s_max, sphere, step)?[0])
}
