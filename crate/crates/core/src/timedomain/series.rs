//! Time series of box fields at scattered points, by direct Fourier
//! summation grouped over shells of equal `|n|^2`.

use num_complex::Complex64;

use super::multiplier::values as multiplier_values;
use super::spectral::{FieldKind, SpaceOp, SpectralBoxField, WRAP_GUARD};
use crate::error::{check_len, invalid, Error, Result};
use crate::grid::{norm, Vec3};
use crate::par;

/// Values laid out as `[time][point][kind]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSeries {
    pub points: Vec<Vec3>,
    pub times: Vec<f64>,
    pub kinds: Vec<FieldKind>,
    values: Vec<f64>,
    /// Largest ratio of the image-point amplitude to the run-wide peak over
    /// the requested and source-region points.
    pub guard_ratio: f64,
}

impl PointSeries {
    pub fn value(&self, time: usize, point: usize, kind: usize) -> f64 {
        self.values[(time * self.points.len() + point) * self.kinds.len() + kind]
    }

    pub fn kind_index(&self, kind: FieldKind) -> Option<usize> {
        self.kinds.iter().position(|k| *k == kind)
    }

    /// The series of one field at one point.
    pub fn series(&self, point: usize, kind: FieldKind) -> Option<Vec<f64>> {
        let ki = self.kind_index(kind)?;
        Some((0..self.times.len()).map(|t| self.value(t, point, ki)).collect())
    }

    /// Uniform step of the time grid, if it is uniform.
    pub fn uniform_step(&self) -> Option<f64> {
        uniform_step(&self.times)
    }
}

pub(crate) fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let ok = dt > 0.0
        && times
            .iter()
            .enumerate()
            .all(|(i, t)| (t - (times[0] + dt * i as f64)).abs() <= 1e-9 * dt.max(times[0].abs()));
    ok.then_some(dt)
}

struct Shells {
    /// `|xi|` per shell.
    xi: Vec<f64>,
    /// Shell index for every `|n|^2` below the cutoff.
    of_sq: Vec<u32>,
}

fn shells(field: &SpectralBoxField) -> Shells {
    let h = field.params.n_box as i64 / 2;
    let cut2 = (h * h) as usize;
    let mut present = vec![false; cut2];
    for a in 0..h {
        for b in 0..=a {
            for c in 0..=b {
                let s = (a * a + b * b + c * c) as usize;
                if s < cut2 {
                    present[s] = true;
                }
            }
        }
    }
    let dxi = field.params.dxi();
    let mut xi = Vec::new();
    let mut of_sq = vec![u32::MAX; cut2];
    for (s, p) in present.iter().enumerate() {
        if *p {
            of_sq[s] = xi.len() as u32;
            xi.push((s as f64).sqrt() * dxi);
        }
    }
    Shells { xi, of_sq }
}

/// Per-point shell sums `B(s) = sum Re(c e^{i xi.x})` and
/// `G_a(s) = sum Re(i xi_a c e^{i xi.x})`.
struct ShellSums {
    b: Vec<f64>,
    g: [Vec<f64>; 3],
}

fn shell_sums(field: &SpectralBoxField, sh: &Shells, x: &Vec3, with_grad: bool) -> ShellSums {
    let p = field.params;
    let n = p.n_box;
    let dxi = p.dxi();
    let ns = sh.xi.len();
    let table = |a: usize| -> Vec<Complex64> {
        (0..n)
            .map(|m| Complex64::from_polar(1.0, p.mode(m) as f64 * dxi * x[a]))
            .collect()
    };
    let (t0, t1, t2) = (table(0), table(1), table(2));
    let mut b = vec![0.0; ns];
    let mut g = [vec![0.0; ns], vec![0.0; ns], vec![0.0; ns]];
    let cut2 = sh.of_sq.len() as i64;
    let coeffs = field.coeffs();
    for m1 in 0..n {
        let n1 = p.mode(m1);
        for m2 in 0..n {
            let n2 = p.mode(m2);
            let s12 = n1 * n1 + n2 * n2;
            if s12 >= cut2 {
                continue;
            }
            let p12 = t0[m1] * t1[m2];
            let base = (m1 * n + m2) * n;
            for m3 in 0..n {
                let n3 = p.mode(m3);
                let s = s12 + n3 * n3;
                if s >= cut2 {
                    continue;
                }
                let z = coeffs[base + m3] * p12 * t2[m3];
                let k = sh.of_sq[s as usize] as usize;
                b[k] += z.re;
                if with_grad {
                    g[0][k] -= n1 as f64 * dxi * z.im;
                    g[1][k] -= n2 as f64 * dxi * z.im;
                    g[2][k] -= n3 as f64 * dxi * z.im;
                }
            }
        }
    }
    ShellSums { b, g }
}

/// Dot product with four independent accumulators so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Corners and face/edge centres of the periodic box, where images meet.
fn guard_points(half_length: f64) -> Vec<Vec3> {
    let mut pts = Vec::new();
    for mask in 1..8u8 {
        let c = |bit: u8| if mask & bit != 0 { -half_length } else { 0.0 };
        pts.push([c(1), c(2), c(4)]);
    }
    pts
}

impl SpectralBoxField {
    /// Evaluates `kinds` at `points` for every time in `times`. Points must
    /// stay at least the source radius away from the box faces' midplane,
    /// `|x| <= L/2 - R_hat`, so the box is at least `2 (|x| + R_hat)` wide.
    pub fn sample_points(
        &self,
        points: &[Vec3],
        times: &[f64],
        kinds: &[FieldKind],
    ) -> Result<PointSeries> {
        for k in kinds {
            k.validate()?;
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("times must be finite and >= 0"));
        }
        let reach = 0.5 * self.params.half_length - self.support_radius();
        for x in points {
            if norm(x) > reach {
                return Err(invalid(format!(
                    "point at |x| = {} is too close to the box; need |x| <= L/2 - R_hat = {reach}",
                    norm(x)
                )));
            }
        }
        let sh = shells(self);
        let with_grad = kinds
            .iter()
            .any(|k| matches!(k.space, SpaceOp::Grad(_) | SpaceOp::GradLap(_)));
        // Requested points, then reference points near the source, then the
        // guard points where periodic images meet.
        let mut all_points = points.to_vec();
        all_points.push(self.peak_point());
        all_points.push([0.0; 3]);
        let n_req = points.len();
        let n_ref = n_req + 2;
        all_points.extend(guard_points(self.params.half_length));
        let sums: Vec<ShellSums> = par::map_range(all_points.len(), |j| {
            shell_sums(self, &sh, &all_points[j], with_grad && j < n_req)
        });
        let sigma = self.sigma;
        let n_kinds = kinds.len();
        let per_time: Vec<(Vec<f64>, f64, f64)> = par::map_range(times.len(), |ti| {
            let t = times[ti];
            let mv: Vec<_> = sh.xi.iter().map(|&xi| multiplier_values(t, xi, sigma)).collect();
            let m: Vec<f64> = mv.iter().map(|v| v.m).collect();
            // Per-shell factor of each kind: time factor times the radial
            // part of the spatial symbol.
            let factors: Vec<Vec<f64>> = kinds
                .iter()
                .map(|kind| {
                    mv.iter()
                        .zip(&sh.xi)
                        .map(|(v, xi)| match kind.space {
                            SpaceOp::Identity | SpaceOp::Grad(_) => kind.time_factor(v),
                            SpaceOp::Lap | SpaceOp::GradLap(_) => -xi * xi * kind.time_factor(v),
                        })
                        .collect()
                })
                .collect();
            let mut out = vec![0.0; n_req * n_kinds];
            let mut peak: f64 = 0.0;
            let mut edge: f64 = 0.0;
            for (j, s) in sums.iter().enumerate() {
                let u = dot(&m, &s.b);
                if j >= n_ref {
                    edge = edge.max(u.abs());
                    continue;
                }
                peak = peak.max(u.abs());
                if j >= n_req {
                    continue;
                }
                for (ki, kind) in kinds.iter().enumerate() {
                    let basis = match kind.space {
                        SpaceOp::Identity | SpaceOp::Lap => &s.b,
                        SpaceOp::Grad(a) | SpaceOp::GradLap(a) => &s.g[a],
                    };
                    out[j * n_kinds + ki] = dot(&factors[ki], basis);
                }
            }
            (out, peak, edge)
        });
        let sup = per_time.iter().fold(0.0, |m: f64, p| m.max(p.1));
        let mut guard_ratio: f64 = 0.0;
        for (ti, (_, _, edge)) in per_time.iter().enumerate() {
            if sup > 0.0 {
                let r = edge / sup;
                guard_ratio = guard_ratio.max(r);
                if r > WRAP_GUARD {
                    return Err(Error::WrapAround { t: times[ti], ratio: r });
                }
            }
        }
        Ok(PointSeries {
            points: points.to_vec(),
            times: times.to_vec(),
            kinds: kinds.to_vec(),
            values: per_time.into_iter().flat_map(|p| p.0).collect(),
            guard_ratio,
        })
    }
}

/// `int_0^T U(t) e^{i k t} dt` by the trapezoid rule, for each series and
/// each `k`. `times` must be uniform and start at 0. Result is `[k][series]`.
pub fn time_to_frequency(
    times: &[f64],
    series: &[Vec<f64>],
    ks: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    let dt = uniform_step(times).ok_or_else(|| invalid("time grid must be uniform"))?;
    if times[0] != 0.0 {
        return Err(invalid("time grid must start at t = 0"));
    }
    for s in series {
        check_len("time series", times.len(), s.len())?;
    }
    let last = times.len() - 1;
    Ok(par::map_slice(ks, |&k| {
        let phases: Vec<Complex64> = times
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let w = if i == 0 || i == last { 0.5 * dt } else { dt };
                Complex64::from_polar(w, k * t)
            })
            .collect();
        series
            .iter()
            .map(|s| s.iter().zip(&phases).map(|(u, p)| p * *u).sum())
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{make_source_field, Bump, SourceSpec};
    use crate::timedomain::spectral::BoxParams;

    #[test]
    fn exponential_transform() {
        let dt = 0.001;
        let times: Vec<f64> = (0..=40_000).map(|i| i as f64 * dt).collect();
        let u: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let out = time_to_frequency(&times, &[u], &[1.0]).unwrap();
        let exact = Complex64::new(0.5, 0.5);
        assert!((out[0][0] - exact).norm() < 1e-6);
    }

    #[test]
    fn zero_series_transform_is_zero() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let out = time_to_frequency(&times, &[vec![0.0; 11]], &[1.0, 2.0]).unwrap();
        assert!(out.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_nonuniform_times() {
        assert!(time_to_frequency(&[0.0, 0.1, 0.3], &[vec![0.0; 3]], &[1.0]).is_err());
        assert!(time_to_frequency(&[0.1, 0.2, 0.3], &[vec![0.0; 3]], &[1.0]).is_err());
    }

    #[test]
    fn matches_grid_snapshot() {
        let spec = SourceSpec::new(vec![Bump::Gaussian {
            center: [0.1, 0.0, -0.05],
            width: 0.5,
            amplitude: 1.0,
        }]);
        let f = make_source_field(&spec, 24, 2.0).unwrap();
        let params = BoxParams {
            half_length: 9.0,
            n_box: 64,
        };
        let field = SpectralBoxField::from_source(&f, params, 0.7).unwrap();
        let kinds = [
            FieldKind::U,
            FieldKind::UT,
            FieldKind::UTT,
            FieldKind::LAP,
            FieldKind::ut_grad(1),
            FieldKind::grad_lap(2),
        ];
        let snap = field.snapshot(0.3, &kinds).unwrap();
        let idx = [(34 * 64 + 30) * 64 + 33, (32 * 64 + 32) * 64 + 32];
        let pts: Vec<Vec3> = idx.iter().map(|i| snap.point(*i)).collect();
        let series = field.sample_points(&pts, &[0.0, 0.3], &kinds).unwrap();
        for (p, i) in idx.iter().enumerate() {
            for (k, kind) in kinds.iter().enumerate() {
                let a = series.value(1, p, k);
                let b = snap.get(*kind).unwrap()[*i];
                assert!((a - b).abs() < 1e-12, "{kind:?}: {a} vs {b}");
            }
            assert!(series.value(0, p, 0).abs() < 1e-15);
        }
    }
}
