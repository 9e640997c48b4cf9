use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Radial profile of the fundamental solution of `lap^2 - kappa^4` and of its
/// Laplacian, with their radial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenKernelValues {
    pub r: f64,
    pub g: Complex64,
    pub dg_dr: Complex64,
    pub lap_g: Complex64,
    pub dlap_g_dr: Complex64,
}

/// `G(r) = (e^{i kappa r} - e^{-kappa r}) / (8 pi kappa^2 r)`.
pub fn green_kernel(r: f64, kappa: Complex64) -> Result<GreenKernelValues> {
    if !(r.is_finite() && r > 0.0) {
        return Err(invalid(format!("kernel radius must be positive, got {r}")));
    }
    if !(kappa.re.is_finite() && kappa.im.is_finite()) || kappa.norm() == 0.0 {
        return Err(invalid(format!("kappa must be finite and nonzero, got {kappa}")));
    }
    Ok(Kernel::new(kappa).all(r))
}

/// Per-kappa constants hoisted out of the quadrature loops.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Kernel {
    kappa: Complex64,
    i_kappa: Complex64,
    inv_kappa_sq: Complex64,
}

const INV_8PI: f64 = 1.0 / (8.0 * PI);

impl Kernel {
    pub(crate) fn new(kappa: Complex64) -> Self {
        Self {
            kappa,
            i_kappa: Complex64::i() * kappa,
            inv_kappa_sq: (kappa * kappa).inv(),
        }
    }

    #[inline(always)]
    fn parts(&self, r: f64) -> (Complex64, Complex64, f64, Complex64) {
        let e1 = (self.i_kappa * r).exp();
        let e2 = (-self.kappa * r).exp();
        let s = INV_8PI / r;
        let g = (e1 - e2) * self.inv_kappa_sq * s;
        (e1, e2, s, g)
    }

    #[inline(always)]
    pub(crate) fn g(&self, r: f64) -> Complex64 {
        self.parts(r).3
    }

    #[inline(always)]
    pub(crate) fn all(&self, r: f64) -> GreenKernelValues {
        let (e1, e2, s, g) = self.parts(r);
        let a = self.i_kappa * e1;
        let b = self.kappa * e2;
        let inv_r = 1.0 / r;
        let lap_g = -(e1 + e2) * s;
        GreenKernelValues {
            r,
            g,
            dg_dr: (a + b) * self.inv_kappa_sq * s - g * inv_r,
            lap_g,
            dlap_g_dr: -(a - b) * s - lap_g * inv_r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_kappa_at_pi() {
        let v = green_kernel(PI, Complex64::new(1.0, 0.0)).unwrap();
        let e = (-PI).exp();
        assert_relative_eq!(v.g.re, (-1.0 - e) / (8.0 * PI * PI), max_relative = 1e-14);
        assert!(v.g.im.abs() < 1e-17);
        assert_relative_eq!(v.g.re, -0.013_213_1, max_relative = 1e-4);
        assert_relative_eq!(v.lap_g.re, (1.0 - e) / (8.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(v.lap_g.re, 0.012_118_5, max_relative = 1e-4);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(green_kernel(0.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(green_kernel(-1.0, Complex64::new(1.0, 0.0)).is_err());
    }

    fn radial_laplacian(f: impl Fn(f64) -> Complex64, r: f64, h: f64) -> Complex64 {
        // (1/r) d^2 (r f) / dr^2
        let rf = |s: f64| f(s) * s;
        (rf(r + h) - 2.0 * rf(r) + rf(r - h)) / (h * h * r)
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(r in 0.2f64..3.0, kr in 0.3f64..4.0, ki in 0.0f64..1.0) {
            let kernel = Kernel::new(Complex64::new(kr, ki));
            let v = kernel.all(r);
            let h = 1e-4;
            let fd_g = (kernel.g(r + h) - kernel.g(r - h)) / (2.0 * h);
            let fd_lap = (kernel.all(r + h).lap_g - kernel.all(r - h).lap_g) / (2.0 * h);
            let scale = |z: Complex64| z.norm().max(1e-3);
            prop_assert!((fd_g - v.dg_dr).norm() < 1e-6 * scale(v.dg_dr));
            prop_assert!((fd_lap - v.dlap_g_dr).norm() < 1e-6 * scale(v.dlap_g_dr));
        }

        #[test]
        fn analytic_laplacian_matches_radial_stencil(r in 0.3f64..3.0, kr in 0.3f64..3.0, ki in 0.0f64..1.0) {
            let kernel = Kernel::new(Complex64::new(kr, ki));
            let fd = radial_laplacian(|s| kernel.g(s), r, 1e-3);
            let exact = kernel.all(r).lap_g;
            prop_assert!((fd - exact).norm() < 1e-5 * exact.norm().max(1e-2));
        }

        #[test]
        fn bilaplacian_is_kappa_fourth_times_g(r in 0.3f64..3.0, kr in 0.3f64..3.0, ki in 0.0f64..1.0) {
            let kappa = Complex64::new(kr, ki);
            let kernel = Kernel::new(kappa);
            let fd = radial_laplacian(|s| kernel.all(s).lap_g, r, 1e-3);
            let exact = kappa.powi(4) * kernel.g(r);
            prop_assert!((fd - exact).norm() < 1e-5 * exact.norm().max(1e-2));
        }

        #[test]
        fn decays_along_rays(kr in 0.5f64..3.0, ki in 0.05f64..1.0) {
            let kappa = Complex64::new(kr, ki);
            let kernel = Kernel::new(kappa);
            let c = kr.min(ki);
            for r in [1.0, 2.0, 4.0, 8.0, 16.0] {
                let bound = (-c * r).exp() / (4.0 * PI * kappa.norm_sqr() * r);
                prop_assert!(kernel.g(r).norm() <= bound * (1.0 + 1e-12));
            }
        }
    }
}
