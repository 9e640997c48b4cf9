use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Frequency `k`, damping `sigma` and the complex radius
/// `kappa = (k^2 + i k sigma)^(1/4)` taken in the closed first quadrant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampedWavenumber {
    pub k: Complex64,
    pub sigma: f64,
    pub kappa: Complex64,
}

impl DampedWavenumber {
    pub fn new(k: Complex64, sigma: f64) -> Result<Self> {
        let kappa = kappa_of(k, sigma)?;
        Ok(Self { k, sigma, kappa })
    }

    pub fn real(k: f64, sigma: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0), sigma)
    }

    /// `k^2 + i k sigma`, which equals `kappa^4`.
    pub fn kappa_fourth(&self) -> Complex64 {
        symbol(self.k, self.sigma)
    }

    /// Derivative of `kappa` with respect to `k`.
    pub fn dkappa_dk(&self) -> Complex64 {
        let z = self.kappa_fourth();
        self.kappa * (2.0 * self.k + Complex64::new(0.0, self.sigma)) / (4.0 * z)
    }
}

fn symbol(k: Complex64, sigma: f64) -> Complex64 {
    k * k + Complex64::i() * k * sigma
}

/// Fourth root of `k^2 + i k sigma` lying in the closed first quadrant.
///
/// The principal root is used when it already has a nonnegative imaginary
/// part; otherwise it is rotated by `i`. On the slab `(delta, inf) x (-d, d)`
/// with `d < sigma / 2` this is the principal branch, and for negative real
/// `k` it yields `conj(kappa_of(-k))` rotated into the first quadrant, which
/// is the root that keeps the Green's function decaying.
pub fn kappa_of(k: Complex64, sigma: f64) -> Result<Complex64> {
    if !(k.re.is_finite() && k.im.is_finite()) || k == Complex64::new(0.0, 0.0) {
        return Err(invalid(format!("wavenumber must be finite and nonzero, got {k}")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(invalid(format!("damping must be finite and >= 0, got {sigma}")));
    }
    let z = symbol(k, sigma);
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::BranchCut { k, sigma });
    }
    let modulus = z.norm().sqrt().sqrt();
    let angle = z.im.atan2(z.re) / 4.0;
    let root = Complex64::from_polar(modulus, angle);
    Ok(if root.im < 0.0 {
        root * Complex64::i()
    } else {
        root
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fourth_root_of_sixteen() {
        let kappa = kappa_of(c(4.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(kappa.re, 2.0, epsilon = 1e-15);
        assert_eq!(kappa.im, 0.0);
    }

    #[test]
    fn undamped_is_sqrt_k() {
        let kappa = kappa_of(c(2.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(kappa.re, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn unit_k_unit_sigma() {
        // (1+i)^(1/4): modulus 2^(1/8), argument pi/16; 50-digit values.
        let kappa = kappa_of(c(1.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(kappa.re, 1.069_553_932_363_985_9, epsilon = 1e-15);
        assert_relative_eq!(kappa.im, 0.212_747_504_726_743_04, epsilon = 1e-15);
    }

    #[test]
    fn rejects_zero_and_branch_cut() {
        assert!(kappa_of(c(0.0, 0.0), 1.0).is_err());
        // k = i: k^2 = -1, i k sigma = -sigma: negative real axis.
        assert!(matches!(
            kappa_of(c(0.0, 1.0), 0.5),
            Err(Error::BranchCut { .. })
        ));
        assert!(kappa_of(c(1.0, 0.0), -0.1).is_err());
    }

    #[test]
    fn negative_k_is_rotated_conjugate() {
        let pos = kappa_of(c(3.0, 0.0), 0.7).unwrap();
        let neg = kappa_of(c(-3.0, 0.0), 0.7).unwrap();
        let expected = Complex64::i() * pos.conj();
        assert_relative_eq!(neg.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(neg.im, expected.im, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn fourth_power_reproduces_symbol(kr in 0.01f64..200.0, ki in -0.05f64..0.05, sigma in 0.11f64..5.0) {
            let k = c(kr, ki);
            let kappa = kappa_of(k, sigma).unwrap();
            let z = symbol(k, sigma);
            prop_assert!((kappa.powi(4) - z).norm() <= 1e-14 * z.norm());
            prop_assert!(kappa.re > 0.0 && kappa.im > 0.0);
        }

        #[test]
        fn undamped_real_is_positive_real(k in 1e-3f64..1e4) {
            let kappa = kappa_of(c(k, 0.0), 0.0).unwrap();
            prop_assert_eq!(kappa.im, 0.0);
            prop_assert!(kappa.re > 0.0);
        }

        #[test]
        fn continuous_inside_slab(kr in 0.5f64..50.0, ki in -0.04f64..0.04, sigma in 0.1f64..3.0) {
            let h = 1e-7;
            let a = kappa_of(c(kr, ki), sigma).unwrap();
            let b = kappa_of(c(kr + h, ki + h), sigma).unwrap();
            prop_assert!((a - b).norm() < 1e-5);
        }
    }
}
