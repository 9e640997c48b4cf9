//! Decay rates, energies, boundary flux and the observability ratio.

use super::series::PointSeries;
use super::spectral::{BoxParams, BoxSnapshot, FieldKind, SpectralBoxField, FLUX_KINDS};
use crate::error::{invalid, Result};
use crate::grid::{norm, SphereGrid};
use crate::source::SourceField;

/// Least-squares line through `(ln(1 + t), ln norm)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn decay_fit(times: &[f64], sup_norms: &[f64]) -> Result<DecayFit> {
    if times.len() != sup_norms.len() || times.len() < 2 {
        return Err(invalid("decay fit needs matching series of at least two samples"));
    }
    if sup_norms.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("decay fit needs strictly positive norms"));
    }
    let (t_min, t_max) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    if !(t_min >= 0.0 && t_max >= 10.0 * t_min && t_max > t_min) {
        return Err(invalid("decay fit needs times spanning at least a decade"));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln_1p()).collect();
    let ys: Vec<f64> = sup_norms.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Which supremum to track over time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupKind {
    /// `sup |U|`.
    Value,
    /// `sup |grad U|`.
    Gradient,
}

/// Supremum over the box grid at each time.
pub fn sup_norm_series(field: &SpectralBoxField, times: &[f64], which: SupKind) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| match which {
            SupKind::Value => Ok(field.snapshot(t, &[FieldKind::U])?.sup_norm(FieldKind::U).unwrap()),
            SupKind::Gradient => {
                let kinds = [FieldKind::grad(0), FieldKind::grad(1), FieldKind::grad(2)];
                let snap = field.snapshot(t, &kinds)?;
                let g: Vec<&[f64]> = kinds.iter().map(|k| snap.get(*k).unwrap()).collect();
                Ok((0..g[0].len())
                    .map(|i| (g[0][i] * g[0][i] + g[1][i] * g[1][i] + g[2][i] * g[2][i]).sqrt())
                    .fold(0.0, f64::max))
            }
        })
        .collect()
}

/// `E = 1/2 int (U_t^2 + (lap U)^2 + U^2)` and `E_0` without the `U^2` term,
/// over grid points with `|x| < radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyPair {
    pub e: f64,
    pub e0: f64,
}

pub fn energies(snapshot: &BoxSnapshot, radius: f64) -> Result<EnergyPair> {
    let get = |k: FieldKind| {
        snapshot
            .get(k)
            .ok_or_else(|| invalid(format!("snapshot lacks field {}", k.label())))
    };
    let (u, ut, lap) = (get(FieldKind::U)?, get(FieldKind::UT)?, get(FieldKind::LAP)?);
    let h3 = snapshot.params.spacing().powi(3);
    let (mut e, mut e0) = (0.0, 0.0);
    for i in 0..u.len() {
        if norm(&snapshot.point(i)) < radius {
            let kin = ut[i] * ut[i] + lap[i] * lap[i];
            e0 += kin;
            e += kin + u[i] * u[i];
        }
    }
    Ok(EnergyPair {
        e: 0.5 * h3 * e,
        e0: 0.5 * h3 * e0,
    })
}

/// Flux `F^2` over `[t1, t2]`: trapezoid in time, sphere quadrature in
/// space, of the ten squared boundary fields. `t1` and `t2` must be nodes
/// of the series' uniform time grid.
pub fn boundary_flux_f2(series: &PointSeries, weights: &[f64], t1: f64, t2: f64) -> Result<f64> {
    if weights.len() != series.points.len() {
        return Err(invalid("one quadrature weight per series point is required"));
    }
    let cols: Vec<usize> = FLUX_KINDS
        .iter()
        .map(|k| {
            series
                .kind_index(*k)
                .ok_or_else(|| invalid(format!("series lacks field {}", k.label())))
        })
        .collect::<Result<_>>()?;
    if !(t2 >= t1) {
        return Err(invalid("flux interval must satisfy t1 <= t2"));
    }
    let dt = match series.uniform_step() {
        Some(dt) => dt,
        None if series.times.len() == 1 && t1 == t2 => return Ok(0.0),
        None => return Err(invalid("flux needs a uniform time grid")),
    };
    let node = |t: f64| -> Result<usize> {
        let x = (t - series.times[0]) / dt;
        let i = x.round();
        if (x - i).abs() > 1e-6 || i < 0.0 || i as usize >= series.times.len() {
            return Err(invalid(format!("time {t} is not a node of the series grid")));
        }
        Ok(i as usize)
    };
    let (i1, i2) = (node(t1)?, node(t2)?);
    let density = |ti: usize| -> f64 {
        (0..series.points.len())
            .map(|p| {
                weights[p]
                    * cols
                        .iter()
                        .map(|&c| {
                            let v = series.value(ti, p, c);
                            v * v
                        })
                        .sum::<f64>()
            })
            .sum()
    };
    let mut total = 0.0;
    for ti in i1..i2 {
        total += 0.5 * dt * (density(ti) + density(ti + 1));
    }
    Ok(total)
}

/// Open window `(4(2R + 1), 5(2R + 1))` of admissible observation times.
pub fn observability_window(radius: f64) -> (f64, f64) {
    (4.0 * (2.0 * radius + 1.0), 5.0 * (2.0 * radius + 1.0))
}

/// Discretisation shared by the observability and energy runs.
#[derive(Clone, Debug)]
pub struct TimeSetup {
    pub params: BoxParams,
    pub sphere: SphereGrid,
    /// Requested time step; it is shrunk to divide each interval evenly.
    pub dt: f64,
}

fn time_nodes(t1: f64, t2: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("time step must be positive"));
    }
    let steps = ((t2 - t1) / dt).ceil().max(1.0) as usize;
    let h = (t2 - t1) / steps as f64;
    let mut nodes: Vec<f64> = (0..=steps).map(|i| t1 + h * i as f64).collect();
    nodes[steps] = t2;
    Ok(nodes)
}

fn flux_series(field: &SpectralBoxField, setup: &TimeSetup, t1: f64, t2: f64) -> Result<f64> {
    let times = time_nodes(t1, t2, setup.dt)?;
    let series = field.sample_points(&setup.sphere.points, &times, &FLUX_KINDS)?;
    boundary_flux_f2(&series, &setup.sphere.weights, t1, t2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub t_obs: f64,
    /// `||f||^2` over the ball (the source lies inside it).
    pub source_norm_sq: f64,
    pub flux: f64,
    /// `source_norm_sq / flux`; `None` when both vanish.
    pub ratio: Option<f64>,
}

pub fn observability_ratio(
    f: &SourceField,
    sigma: f64,
    t_obs: f64,
    setup: &TimeSetup,
) -> Result<ObservabilityReport> {
    let (lo, hi) = observability_window(setup.sphere.radius);
    if !(t_obs > lo && t_obs < hi) {
        return Err(invalid(format!(
            "observation time {t_obs} outside the admissible window ({lo}, {hi})"
        )));
    }
    if setup.sphere.radius <= f.support_radius() {
        return Err(invalid("measurement sphere must enclose the source"));
    }
    let field = SpectralBoxField::from_source(f, setup.params, sigma)?;
    let flux = flux_series(&field, setup, 0.0, t_obs)?;
    let source_norm_sq = f.l2_norm_sq();
    let ratio = if flux > 0.0 {
        Some(source_norm_sq / flux)
    } else if source_norm_sq == 0.0 {
        None
    } else {
        Some(f64::INFINITY)
    };
    Ok(ObservabilityReport {
        t_obs,
        source_norm_sq,
        flux,
        ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyInequalityReport {
    pub e0_t1: f64,
    pub e0_t2: f64,
    pub flux: f64,
    /// `E_0(t1) + F^2(t1, t2) - E_0(t2)`.
    pub margin: f64,
}

pub fn energy_inequality_check(
    f: &SourceField,
    sigma: f64,
    t1: f64,
    t2: f64,
    setup: &TimeSetup,
) -> Result<EnergyInequalityReport> {
    if !(t1 >= 0.0 && t2 >= t1) {
        return Err(invalid("need 0 <= t1 <= t2"));
    }
    let field = SpectralBoxField::from_source(f, setup.params, sigma)?;
    energy_inequality_for(&field, t1, t2, setup)
}

/// [`energy_inequality_check`] on an already transformed field.
pub fn energy_inequality_for(
    field: &SpectralBoxField,
    t1: f64,
    t2: f64,
    setup: &TimeSetup,
) -> Result<EnergyInequalityReport> {
    let kinds = [FieldKind::U, FieldKind::UT, FieldKind::LAP];
    let r = setup.sphere.radius;
    let e0_t1 = energies(&field.snapshot(t1, &kinds)?, r)?.e0;
    if t1 == t2 {
        return Ok(EnergyInequalityReport {
            e0_t1,
            e0_t2: e0_t1,
            flux: 0.0,
            margin: 0.0,
        });
    }
    let e0_t2 = energies(&field.snapshot(t2, &kinds)?, r)?.e0;
    let flux = flux_series(field, setup, t1, t2)?;
    Ok(EnergyInequalityReport {
        e0_t1,
        e0_t2,
        flux,
        margin: e0_t1 + flux - e0_t2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{make_source_field, Bump, SourceSpec};

    #[test]
    fn exact_power_law() {
        let times: Vec<f64> = (0..20).map(|i| 10.0 * 1.13f64.powi(i)).collect();
        let norms: Vec<f64> = times.iter().map(|t| 2.5 * (1.0 + t).powf(-0.75)).collect();
        let fit = decay_fit(&times, &norms).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-10);
    }

    #[test]
    fn decay_fit_rejects_bad_input() {
        assert!(decay_fit(&[1.0, 20.0], &[1.0, 0.0]).is_err());
        assert!(decay_fit(&[10.0, 20.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn window_for_unit_radius() {
        assert_eq!(observability_window(1.0), (12.0, 15.0));
    }

    fn setup() -> (SourceField, TimeSetup) {
        let spec = SourceSpec::new(vec![Bump::Gaussian {
            center: [0.0; 3],
            width: 0.5,
            amplitude: 1.0,
        }]);
        let f = make_source_field(&spec, 24, 2.0).unwrap();
        let setup = TimeSetup {
            params: BoxParams {
                half_length: 9.0,
                n_box: 64,
            },
            sphere: SphereGrid::with_count(2.4, 18).unwrap(),
            dt: 0.02,
        };
        (f, setup)
    }

    #[test]
    fn energy_at_time_zero_is_half_the_source_norm() {
        let (f, setup) = setup();
        let field = SpectralBoxField::from_source(&f, setup.params, 1.0).unwrap();
        let snap = field
            .snapshot(0.0, &[FieldKind::U, FieldKind::UT, FieldKind::LAP])
            .unwrap();
        let e = energies(&snap, 2.4).unwrap();
        assert_eq!(e.e, e.e0);
        let half = 0.5 * field.l2_norm_sq();
        assert!((e.e - half).abs() < 0.02 * half, "{} vs {half}", e.e);
    }

    #[test]
    fn rejects_times_outside_window() {
        let (f, setup) = setup();
        let mut setup = setup;
        setup.sphere = SphereGrid::with_count(1.0, 8).unwrap();
        for t in [12.0, 15.0, 5.0, 20.0] {
            assert!(observability_ratio(&f, 0.5, t, &setup).is_err());
        }
    }

    #[test]
    fn zero_source_ratio_is_flagged() {
        let (_, mut setup) = setup();
        setup.params.n_box = 8;
        setup.dt = 1.0;
        setup.sphere = SphereGrid::with_count(1.0, 8).unwrap();
        let f = SourceField::zeros(0.7, 4).unwrap();
        let rep = observability_ratio(&f, 0.5, 13.0, &setup).unwrap();
        assert_eq!(rep.ratio, None);
    }

    #[test]
    fn equal_times_have_zero_margin() {
        let (f, setup) = setup();
        let rep = energy_inequality_check(&f, 1.0, 0.2, 0.2, &setup).unwrap();
        assert_eq!(rep.margin, 0.0);
    }

    #[test]
    fn flux_is_nondecreasing_in_t2() {
        let (f, setup) = setup();
        let field = SpectralBoxField::from_source(&f, setup.params, 1.0).unwrap();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.01).collect();
        let series = field
            .sample_points(&setup.sphere.points, &times, &FLUX_KINDS)
            .unwrap();
        let mut prev = 0.0;
        for t2 in [0.0, 0.1, 0.2, 0.3, 0.4] {
            let f2 = boundary_flux_f2(&series, &setup.sphere.weights, 0.0, t2).unwrap();
            assert!(f2 >= prev);
            prev = f2;
        }
        assert!(boundary_flux_f2(&series, &setup.sphere.weights, 0.0, 0.005).is_err());
    }
}
