use std::path::Path;

use platelab_core::grid::fibonacci_directions;
use platelab_core::inverse::{reconstruct, relative_l2_error, sample_fourier};
use platelab_harness::config::ExperimentConfig;
use platelab_harness::dataset::{
    decode, encode, manifest_json, read_dataset, read_manifest, validate_manifest, write_dataset, MANIFEST_FILE,
    PAYLOAD_FILE,
};
use platelab_harness::{run_recon, run_synth, HarnessError};

fn small() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{"n_vol": 10, "n_sphere": 50, "nk": 6, "k_max": [6.0], "n_dir": 32, "noise_levels": [0.01], "seeds": [9]}"#,
    )
    .unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn round_trip_is_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_synth(&small(), &a, false).unwrap();
    let (stored, manifest) = read_dataset(&a).unwrap();
    assert_eq!(manifest.provenance.seed, 9);
    assert_eq!(manifest.provenance.noise_level, 0.01);
    assert_eq!(manifest.provenance.config_hash, small().hash());
    write_dataset(&b, &stored, false).unwrap();
    for f in [MANIFEST_FILE, PAYLOAD_FILE] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f} differs");
    }
    let (m2, bytes) = encode(&stored);
    assert_eq!(decode(&m2, &bytes).unwrap(), stored);
    assert_eq!(manifest_json(&m2).as_bytes(), read(&a.join(MANIFEST_FILE)).as_slice());
}

#[test]
fn synth_is_deterministic_and_guarded() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_synth(&small(), &a, false).unwrap();
    run_synth(&small(), &b, false).unwrap();
    assert_eq!(read(&a.join(PAYLOAD_FILE)), read(&b.join(PAYLOAD_FILE)));
    let again = run_synth(&small(), &a, false).unwrap_err();
    assert!(matches!(again, HarnessError::Exists(_)));
    assert_eq!(again.exit_code(), 1);
    run_synth(&small(), &a, true).unwrap();
    assert_eq!(read(&a.join(PAYLOAD_FILE)), read(&b.join(PAYLOAD_FILE)));
}

#[test]
fn descriptors_tile_the_payload() {
    let tmp = tempfile::tempdir().unwrap();
    run_synth(&small(), tmp.path(), false).unwrap();
    let m = read_manifest(tmp.path()).unwrap();
    let mut end = 0;
    let mut sorted = m.arrays.clone();
    sorted.sort_by_key(|d| d.offset);
    for d in &sorted {
        assert_eq!(d.offset, end);
        end += d.byte_len();
    }
    assert_eq!(end, m.payload_bytes);
    let names: Vec<&str> = m.arrays.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["sphere_points", "sphere_normals", "sphere_weights", "traces", "source_truth"]);

    let mut gap = m.clone();
    gap.arrays[1].offset += 8;
    let e = validate_manifest(&gap, m.payload_bytes).unwrap_err().to_string();
    assert!(e.contains("sphere_normals"), "{e}");
    let mut shape = m.clone();
    shape.arrays[3].shape[2] = 4;
    assert!(validate_manifest(&shape, m.payload_bytes).is_err());
}

#[test]
fn truncated_payload_names_the_descriptor() {
    let tmp = tempfile::tempdir().unwrap();
    run_synth(&small(), tmp.path(), false).unwrap();
    let payload = tmp.path().join(PAYLOAD_FILE);
    let bytes = read(&payload);
    let m = read_manifest(tmp.path()).unwrap();
    let truth = m.arrays.iter().find(|d| d.name == "source_truth").unwrap();
    std::fs::write(&payload, &bytes[..truth.offset as usize + 8]).unwrap();
    let e = read_dataset(tmp.path()).unwrap_err();
    assert!(e.to_string().contains("array 'source_truth'"), "{e}");
    assert_eq!(e.exit_code(), 1);
    let out = tempfile::tempdir().unwrap();
    assert!(run_recon(tmp.path(), &small(), out.path()).is_err());
}

#[test]
fn zero_source_gives_zero_traces_and_reconstruction() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.source.bumps.clear();
    run_synth(&cfg, tmp.path(), false).unwrap();
    let (stored, _) = read_dataset(tmp.path()).unwrap();
    assert!(stored.dataset.norms().iter().all(|n| *n == 0.0));
    let s = run_recon(tmp.path(), &cfg, tmp.path()).unwrap();
    assert_eq!(s.rel_error, None);
    assert_eq!(s.max_abs, 0.0);
    let csv = std::fs::read_to_string(tmp.path().join("results/recon.csv")).unwrap();
    let row = csv.lines().nth(2).unwrap();
    assert!(row.contains(",zero,,"), "{row}");
}

#[test]
fn recon_matches_direct_reconstruction() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small();
    cfg.noise_levels = vec![0.0];
    run_synth(&cfg, tmp.path(), false).unwrap();
    let s = run_recon(tmp.path(), &cfg, &tmp.path().join("rec")).unwrap();

    let (stored, _) = read_dataset(tmp.path()).unwrap();
    let ds = &stored.dataset;
    let truth = stored.truth.unwrap();
    let samples = sample_fourier(ds, &fibonacci_directions(cfg.n_dir), ds.frequencies.nodes()).unwrap();
    let rec = reconstruct(&samples, truth.support_radius(), truth.n_per_axis(), ds.frequencies.end()).unwrap();
    assert_eq!(s.rel_error, Some(relative_l2_error(&rec.field, &truth).unwrap()));
    assert_eq!(s.n_freq, cfg.nk);

    let bin = read(&tmp.path().join("rec/reconstruction.bin"));
    let values: Vec<f64> = bin.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(values, rec.field.values());
}
