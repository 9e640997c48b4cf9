use num_complex::Complex64;
use platelab_core::forward::synthesize_cauchy;
use platelab_core::grid::fibonacci_directions;
use platelab_core::inverse::{add_noise, reconstruct, relative_l2_error, sample_fourier, stability_sweep, SweepConfig};
use platelab_core::timedomain::{multiplier_values, BoxParams, FieldKind, SpectralBoxField};
use platelab_core::*;
use proptest::prelude::*;

fn gaussian(center: Vec3, width: f64) -> SourceSpec {
    SourceSpec::new(vec![Bump::Gaussian {
        center,
        width,
        amplitude: 1.0,
    }])
}

proptest! {
    #[test]
    fn kappa_is_a_first_quadrant_fourth_root(k in 0.01f64..50.0, sigma in 0.0f64..5.0) {
        let kappa = kappa_of(Complex64::new(k, 0.0), sigma).unwrap();
        let target = Complex64::new(k * k, k * sigma);
        prop_assert!((kappa.powi(4) - target).norm() <= 1e-12 * target.norm());
        prop_assert!(kappa.re > 0.0 && kappa.im >= 0.0);
    }

    #[test]
    fn multiplier_satisfies_its_ode(t in 0.0f64..30.0, xi in 0.0f64..4.0, sigma in 0.0f64..6.0) {
        let v = multiplier_values(t, xi, sigma).unwrap();
        let xi4 = xi.powi(4);
        let scale = 1.0 + v.d2m.abs() + sigma * v.dm.abs() + xi4 * v.m.abs();
        prop_assert!((v.d2m + sigma * v.dm + xi4 * v.m).abs() <= 1e-12 * scale);
    }

    #[test]
    fn frequency_grid_integrates_linear_functions(a in 0.1f64..2.0, b in 3.0f64..20.0, n in 2usize..40, c in -3.0f64..3.0) {
        let g = FrequencyGrid::sqrt_uniform(a, b, n).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|k| 1.0 + c * k).collect();
        let exact = (b - a) + 0.5 * c * (b * b - a * a);
        prop_assert!((g.integrate(&vals).unwrap() - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }
}

#[test]
fn parallel_and_sequential_paths_agree_bitwise() {
    let f = make_source_field(&gaussian([0.1, 0.0, -0.05], 0.18), 16, 0.8).unwrap();
    let sphere = SphereGrid::with_count(1.0, 128).unwrap();
    let wide = make_source_field(&gaussian([0.1, 0.0, -0.05], 1.0), 32, 4.0).unwrap();
    let run = || {
        let trace = synthesize_cauchy(&f, &sphere, 3.0, 0.5).unwrap();
        let field = SpectralBoxField::from_source(&wide, BoxParams { half_length: 8.0, n_box: 64 }, 0.5).unwrap();
        let snap = field.snapshot(0.3, &[FieldKind::U]).unwrap();
        (trace, snap.get(FieldKind::U).unwrap().to_vec())
    };
    let seq = with_execution(Execution::Sequential, run);
    let par = with_execution(Execution::Parallel, run);
    assert_eq!(seq, par);
}

#[test]
fn noiseless_pipeline_recovers_a_gaussian() {
    let truth = make_source_field(&gaussian([0.1, 0.0, 0.0], 0.6), 12, 2.4).unwrap();
    let sphere = SphereGrid::with_count(2.7, 200).unwrap();
    let grid = FrequencyGrid::sqrt_piecewise(&[0.1, 64.0], 0.5).unwrap();
    let data = forward::synthesize_dataset(&truth, &sphere, &grid, 0.5, Provenance::default()).unwrap();
    let samples = sample_fourier(&data, &fibonacci_directions(128), grid.nodes()).unwrap();
    let rec = reconstruct(&samples, 2.4, 12, 64.0).unwrap();
    let e = relative_l2_error(&rec.field, &truth).unwrap();
    assert!(e < 0.2, "relative error {e}");

    let noisy = add_noise(&data, 0.05, 3).unwrap();
    assert_eq!(noisy, add_noise(&data, 0.05, 3).unwrap());
    assert_ne!(noisy, add_noise(&data, 0.05, 4).unwrap());
    assert_eq!(noisy.provenance.seed, 3);
}

#[test]
fn sweep_errors_shrink_with_bandwidth() {
    let cfg = SweepConfig {
        source: gaussian([0.1, 0.0, 0.0], 0.45),
        source_radius: 2.0,
        n_vol: 12,
        sphere_radius: 2.3,
        n_sphere: 200,
        n_dir: 128,
        delta: 0.1,
        sqrt_step: 0.25,
        sigmas: vec![0.5],
        k_max: vec![4.0, 16.0],
        noise_levels: vec![0.0],
        seeds: vec![0],
        q: 1.0,
        smoothness: 2,
    };
    let recs = stability_sweep(&cfg).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs[1].rel_error < recs[0].rel_error);
    assert!(recs[1].epsilon > recs[0].epsilon);
}
