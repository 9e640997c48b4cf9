//! On-disk datasets: `manifest.json` next to a flat `arrays.bin` payload.
//!
//! The payload is a sequence of arrays stored back to back, little-endian
//! `f64`, row-major. `c128` arrays hold interleaved `(re, im)` pairs. Each
//! array is described in the manifest by name, shape, element type and byte
//! offset; the descriptors must tile the payload with no gaps.
//!
//! Arrays:
//! - `sphere_points`, `sphere_normals`: `[n_sphere, 3]` f64
//! - `sphere_weights`: `[n_sphere]` f64
//! - `traces`: `[nk, n_sphere, 8]` c128, components `u, grad u, lap u, grad lap u`
//! - `source_truth` (optional): `[n_vol, n_vol, n_vol]` f64

use std::path::Path;

use num_complex::Complex64;
use platelab_core::{CauchyDataset, CauchyTrace, FrequencyGrid, Provenance, SourceField, SphereGrid};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::output::write_atomic;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PAYLOAD_FILE: &str = "arrays.bin";
const COMPONENTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

impl Dtype {
    pub fn size(self) -> u64 {
        match self {
            Dtype::F64 => 8,
            Dtype::C128 => 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayDescriptor {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    pub offset: u64,
}

impl ArrayDescriptor {
    pub fn byte_len(&self) -> u64 {
        self.shape.iter().product::<usize>() as u64 * self.dtype.size()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub sphere_radius: f64,
    pub n_sphere: usize,
    pub sigma: f64,
    pub source_radius: Option<f64>,
    pub n_vol: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestProvenance {
    pub config_hash: String,
    pub seed: u64,
    pub noise_level: f64,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub encoding: String,
    pub geometry: Geometry,
    pub frequencies: Vec<f64>,
    pub arrays: Vec<ArrayDescriptor>,
    pub payload_bytes: u64,
    pub provenance: ManifestProvenance,
}

const ENCODING: &str = "little-endian f64, row-major; c128 as interleaved (re, im)";

/// A dataset plus what the manifest records beside it.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredDataset {
    pub dataset: CauchyDataset,
    pub truth: Option<SourceField>,
    pub tool_version: String,
}

impl StoredDataset {
    pub fn new(dataset: CauchyDataset, truth: Option<SourceField>) -> Self {
        Self {
            dataset,
            truth,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

struct Payload {
    bytes: Vec<u8>,
    arrays: Vec<ArrayDescriptor>,
}

impl Payload {
    fn add(&mut self, name: &str, shape: Vec<usize>, dtype: Dtype, values: impl Iterator<Item = f64>) {
        let offset = self.bytes.len() as u64;
        for v in values {
            self.bytes.extend_from_slice(&v.to_le_bytes());
        }
        let d = ArrayDescriptor {
            name: name.to_string(),
            shape,
            dtype,
            offset,
        };
        debug_assert_eq!(offset + d.byte_len(), self.bytes.len() as u64);
        self.arrays.push(d);
    }
}

/// Manifest and payload bytes for `stored`.
pub fn encode(stored: &StoredDataset) -> (DatasetManifest, Vec<u8>) {
    let ds = &stored.dataset;
    let n = ds.sphere.len();
    let nk = ds.frequencies.len();
    let mut p = Payload {
        bytes: Vec::new(),
        arrays: Vec::new(),
    };
    p.add("sphere_points", vec![n, 3], Dtype::F64, ds.sphere.points.iter().flatten().copied());
    p.add("sphere_normals", vec![n, 3], Dtype::F64, ds.sphere.normals.iter().flatten().copied());
    p.add("sphere_weights", vec![n], Dtype::F64, ds.sphere.weights.iter().copied());
    let traces = ds.traces.iter().flat_map(|t| {
        (0..t.len()).flat_map(move |i| t.components(i).into_iter().flat_map(|z| [z.re, z.im]))
    });
    p.add("traces", vec![nk, n, COMPONENTS], Dtype::C128, traces);
    if let Some(f) = &stored.truth {
        let m = f.n_per_axis();
        p.add("source_truth", vec![m, m, m], Dtype::F64, f.values().iter().copied());
    }
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        encoding: ENCODING.to_string(),
        geometry: Geometry {
            sphere_radius: ds.sphere.radius,
            n_sphere: n,
            sigma: ds.sigma,
            source_radius: stored.truth.as_ref().map(SourceField::support_radius),
            n_vol: stored.truth.as_ref().map(SourceField::n_per_axis),
        },
        frequencies: ds.frequencies.nodes().to_vec(),
        payload_bytes: p.bytes.len() as u64,
        arrays: p.arrays,
        provenance: ManifestProvenance {
            config_hash: ds.provenance.config_hash.clone(),
            seed: ds.provenance.seed,
            noise_level: ds.provenance.noise_level,
            tool_version: stored.tool_version.clone(),
        },
    };
    (manifest, p.bytes)
}

pub fn manifest_json(m: &DatasetManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifest serializes");
    s.push('\n');
    s
}

/// Writes the dataset into `dir`. Refuses to replace an existing dataset
/// unless `force` is set.
pub fn write_dataset(dir: &Path, stored: &StoredDataset, force: bool) -> Result<DatasetManifest> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let payload_path = dir.join(PAYLOAD_FILE);
    for p in [&manifest_path, &payload_path] {
        if p.exists() && !force {
            return Err(HarnessError::Exists(p.clone()));
        }
    }
    let (manifest, bytes) = encode(stored);
    write_atomic(&payload_path, &bytes)?;
    write_atomic(&manifest_path, manifest_json(&manifest).as_bytes())?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::dataset(MANIFEST_FILE, e.to_string()))
}

/// Checks that the descriptors tile `payload_len` bytes exactly and carry
/// the shapes the geometry implies.
pub fn validate_manifest(m: &DatasetManifest, payload_len: u64) -> Result<()> {
    if m.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::dataset(
            "schema_version",
            format!("expected {SCHEMA_VERSION}, found {}", m.schema_version),
        ));
    }
    if m.encoding != ENCODING {
        return Err(HarnessError::dataset("encoding", format!("unsupported encoding {:?}", m.encoding)));
    }
    let mut sorted: Vec<&ArrayDescriptor> = m.arrays.iter().collect();
    sorted.sort_by_key(|d| d.offset);
    let mut end = 0u64;
    for d in &sorted {
        let what = format!("array '{}'", d.name);
        if d.offset != end {
            return Err(HarnessError::dataset(
                what,
                format!("starts at byte {} but the previous array ends at {end}", d.offset),
            ));
        }
        end = d.offset + d.byte_len();
        if end > payload_len {
            return Err(HarnessError::dataset(
                what,
                format!("needs bytes up to {end} but the payload has {payload_len}"),
            ));
        }
    }
    if end != payload_len || m.payload_bytes != payload_len {
        return Err(HarnessError::dataset(
            PAYLOAD_FILE,
            format!(
                "payload has {payload_len} bytes; manifest declares {} and descriptors cover {end}",
                m.payload_bytes
            ),
        ));
    }
    let n = m.geometry.n_sphere;
    let nk = m.frequencies.len();
    let mut expected: Vec<(&str, Vec<usize>, Dtype)> = vec![
        ("sphere_points", vec![n, 3], Dtype::F64),
        ("sphere_normals", vec![n, 3], Dtype::F64),
        ("sphere_weights", vec![n], Dtype::F64),
        ("traces", vec![nk, n, COMPONENTS], Dtype::C128),
    ];
    match (m.geometry.source_radius, m.geometry.n_vol) {
        (Some(_), Some(v)) => expected.push(("source_truth", vec![v, v, v], Dtype::F64)),
        (None, None) => {}
        _ => {
            return Err(HarnessError::dataset(
                "geometry",
                "source_radius and n_vol must be given together",
            ))
        }
    }
    for d in &m.arrays {
        if !expected.iter().any(|(name, _, _)| *name == d.name) {
            return Err(HarnessError::dataset(format!("array '{}'", d.name), "unexpected array"));
        }
    }
    for (name, shape, dtype) in expected {
        let found: Vec<_> = m.arrays.iter().filter(|d| d.name == name).collect();
        let what = format!("array '{name}'");
        match found.as_slice() {
            [] => return Err(HarnessError::dataset(what, "missing")),
            [d] if d.shape != shape || d.dtype != dtype => {
                return Err(HarnessError::dataset(
                    what,
                    format!("expected {dtype:?} {shape:?}, found {:?} {:?}", d.dtype, d.shape),
                ))
            }
            [_] => {}
            _ => return Err(HarnessError::dataset(what, "listed more than once")),
        }
    }
    Ok(())
}

fn floats<'a>(bytes: &'a [u8], d: &ArrayDescriptor) -> impl Iterator<Item = f64> + 'a {
    let start = d.offset as usize;
    let end = start + d.byte_len() as usize;
    bytes[start..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
}

fn vec3s(v: Vec<f64>) -> Vec<[f64; 3]> {
    v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Rebuilds a dataset from its manifest and payload bytes.
pub fn decode(m: &DatasetManifest, bytes: &[u8]) -> Result<StoredDataset> {
    validate_manifest(m, bytes.len() as u64)?;
    let get = |name: &str| -> Vec<f64> {
        let d = m.arrays.iter().find(|d| d.name == name).expect("validated");
        floats(bytes, d).collect()
    };
    let sphere = SphereGrid {
        radius: m.geometry.sphere_radius,
        points: vec3s(get("sphere_points")),
        normals: vec3s(get("sphere_normals")),
        weights: get("sphere_weights"),
    };
    let frequencies = FrequencyGrid::from_nodes(m.frequencies.clone())
        .map_err(|e| HarnessError::dataset("frequencies", e.to_string()))?;
    let n = m.geometry.n_sphere;
    let raw = get("traces");
    let per_trace = n * COMPONENTS * 2;
    let traces = frequencies
        .nodes()
        .iter()
        .enumerate()
        .map(|(ik, &k)| {
            let mut t = CauchyTrace::zeros(k, n);
            let block = &raw[ik * per_trace..(ik + 1) * per_trace];
            for (i, point) in block.chunks_exact(COMPONENTS * 2).enumerate() {
                let mut c = [Complex64::new(0.0, 0.0); COMPONENTS];
                for (j, z) in c.iter_mut().enumerate() {
                    *z = Complex64::new(point[2 * j], point[2 * j + 1]);
                }
                t.set_components(i, c);
            }
            t
        })
        .collect();
    let provenance = Provenance {
        config_hash: m.provenance.config_hash.clone(),
        seed: m.provenance.seed,
        noise_level: m.provenance.noise_level,
    };
    let dataset = CauchyDataset::new(sphere, frequencies, m.geometry.sigma, traces, provenance)
        .map_err(|e| HarnessError::dataset("traces", e.to_string()))?;
    let truth = match (m.geometry.source_radius, m.geometry.n_vol) {
        (Some(r), Some(v)) => Some(
            SourceField::from_values(r, v, get("source_truth"))
                .map_err(|e| HarnessError::dataset("array 'source_truth'", e.to_string()))?,
        ),
        _ => None,
    };
    Ok(StoredDataset {
        dataset,
        truth,
        tool_version: m.provenance.tool_version.clone(),
    })
}

/// Reads and validates the dataset in `dir`.
pub fn read_dataset(dir: &Path) -> Result<(StoredDataset, DatasetManifest)> {
    let m = read_manifest(dir)?;
    let path = dir.join(PAYLOAD_FILE);
    let bytes = std::fs::read(&path).map_err(io_err(&path))?;
    Ok((decode(&m, &bytes)?, m))
}
