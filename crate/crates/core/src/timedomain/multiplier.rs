//! The time multiplier `m(t, xi)`: solution of
//! `m'' + sigma m' + |xi|^4 m = 0`, `m(0) = 0`, `m'(0) = 1`.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `4 |xi|^4 < sigma^2`: two real decay rates.
    Overdamped,
    /// `4 |xi|^4 = sigma^2`.
    Critical,
    /// `4 |xi|^4 > sigma^2`: damped oscillation.
    Oscillatory,
}

pub fn regime(xi_abs: f64, sigma: f64) -> Regime {
    let two_xi2 = 2.0 * xi_abs * xi_abs;
    if two_xi2 < sigma {
        Regime::Overdamped
    } else if two_xi2 == sigma {
        Regime::Critical
    } else {
        Regime::Oscillatory
    }
}

/// `m`, `dm/dt` and `d^2m/dt^2` at one `(t, |xi|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierValues {
    pub m: f64,
    pub dm: f64,
    pub d2m: f64,
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0))
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// Unchecked evaluation for hot loops; `t >= 0`, `xi >= 0`, `sigma >= 0`.
#[inline]
pub(crate) fn values(t: f64, xi_abs: f64, sigma: f64) -> MultiplierValues {
    let xi2 = xi_abs * xi_abs;
    let xi4 = xi2 * xi2;
    let two_xi2 = 2.0 * xi2;
    let half_s = 0.5 * sigma;
    // e^{-sigma t/2} S and e^{-sigma t/2} C, where
    // S = sinh(a t/2)/(a/2) or sin(a t/2)/(a/2) and C = cosh or cos.
    let (es, ec) = if two_xi2 < sigma {
        let a = ((sigma - two_xi2) * (sigma + two_xi2)).sqrt();
        let x = 0.5 * a * t;
        if x > 20.0 {
            let ep = (0.5 * (a - sigma) * t).exp();
            let em = (-0.5 * (a + sigma) * t).exp();
            ((ep - em) / a, 0.5 * (ep + em))
        } else {
            let decay = (-half_s * t).exp();
            (decay * t * sinhc(x), decay * x.cosh())
        }
    } else {
        let a = ((two_xi2 - sigma) * (two_xi2 + sigma)).sqrt();
        let x = 0.5 * a * t;
        let decay = (-half_s * t).exp();
        (decay * t * sinc(x), decay * x.cos())
    };
    let m = es;
    let dm = ec - half_s * es;
    let d2m = (sigma * half_s - xi4) * es - sigma * ec;
    MultiplierValues { m, dm, d2m }
}

fn check(t: f64, xi_abs: f64, sigma: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("time must be finite and >= 0, got {t}")));
    }
    if !(xi_abs.is_finite() && xi_abs >= 0.0) {
        return Err(invalid(format!("|xi| must be finite and >= 0, got {xi_abs}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!("damping must be finite and >= 0, got {sigma}")));
    }
    Ok(())
}

pub fn multiplier_values(t: f64, xi_abs: f64, sigma: f64) -> Result<MultiplierValues> {
    check(t, xi_abs, sigma)?;
    Ok(values(t, xi_abs, sigma))
}

pub fn multiplier(t: f64, xi_abs: f64, sigma: f64) -> Result<f64> {
    Ok(multiplier_values(t, xi_abs, sigma)?.m)
}

/// First (`order = 1`) or second (`order = 2`) time derivative.
pub fn multiplier_dt(t: f64, xi_abs: f64, sigma: f64, order: u8) -> Result<f64> {
    let v = multiplier_values(t, xi_abs, sigma)?;
    match order {
        1 => Ok(v.dm),
        2 => Ok(v.d2m),
        _ => Err(invalid(format!("derivative order must be 1 or 2, got {order}"))),
    }
}
