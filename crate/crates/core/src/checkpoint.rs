//! Adaptor checkpoints: a JSON manifest plus one headerless blob per tensor.
//!
//! Tensors are little-endian `f64` so a checkpoint resumes a run exactly;
//! the manifest records `dtype` and every tensor's shape.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adaptors::{Adaptor, AdaptorConfig, AdaptorSet};
use crate::datamodel::write_file;
use crate::error::{Error, Result};
use crate::optimizer::{AdamHyper, AdamState};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub file: String,
    pub shape: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerEntry {
    pub hyper: AdamHyper,
    pub step: u64,
    pub first_moment: Vec<TensorEntry>,
    pub second_moment: Vec<TensorEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub version: u32,
    pub dtype: String,
    pub adaptor_config: AdaptorConfig,
    /// Parameter tensors of each adaptor, in store order.
    pub adaptors: Vec<Vec<TensorEntry>>,
    pub optimizer: Vec<OptimizerEntry>,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub config: AdaptorConfig,
    pub adaptors: AdaptorSet,
    pub optimizer: Vec<AdamState>,
}

fn write_tensor(dir: &Path, name: String, shape: (usize, usize), data: &[f64]) -> Result<TensorEntry> {
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_file(&dir.join(&name), &bytes)?;
    Ok(TensorEntry { file: name, shape: [shape.0, shape.1] })
}

fn read_tensor(dir: &Path, entry: &TensorEntry) -> Result<Vec<f64>> {
    let path = dir.join(&entry.file);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path)),
        Err(e) => return Err(Error::io(path, e)),
    };
    let expected = entry.shape[0] * entry.shape[1] * 8;
    if bytes.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} holds {} bytes, expected {}x{}x8",
            path.display(),
            bytes.len(),
            entry.shape[0],
            entry.shape[1]
        )));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_checkpoint(
    dir: impl AsRef<Path>,
    config: &AdaptorConfig,
    adaptors: &AdaptorSet,
    optimizer: &[AdamState],
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut adaptor_entries = Vec::new();
    for (a, adaptor) in adaptors.adaptors().iter().enumerate() {
        let entries = adaptor
            .params()
            .iter()
            .zip(adaptor.param_shapes())
            .enumerate()
            .map(|(t, (p, shape))| write_tensor(dir, format!("adaptor{a}_param{t}.f64"), shape, p))
            .collect::<Result<Vec<_>>>()?;
        adaptor_entries.push(entries);
    }
    let mut optimizer_entries = Vec::new();
    for (a, (state, adaptor)) in optimizer.iter().zip(adaptors.adaptors()).enumerate() {
        let shapes = adaptor.param_shapes();
        let moments = |which: &str, m: &[Vec<f64>]| {
            m.iter()
                .zip(&shapes)
                .enumerate()
                .map(|(t, (v, &shape))| write_tensor(dir, format!("adam{a}_{which}{t}.f64"), shape, v))
                .collect::<Result<Vec<_>>>()
        };
        optimizer_entries.push(OptimizerEntry {
            hyper: state.hyper,
            step: state.step,
            first_moment: moments("m", &state.first_moment)?,
            second_moment: moments("v", &state.second_moment)?,
        });
    }
    let manifest = CheckpointManifest {
        version: 1,
        dtype: "f64".into(),
        adaptor_config: *config,
        adaptors: adaptor_entries,
        optimizer: optimizer_entries,
    };
    let path = dir.join(CHECKPOINT_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

pub fn read_checkpoint(dir: impl AsRef<Path>) -> Result<Checkpoint> {
    let dir = dir.as_ref();
    let path = dir.join(CHECKPOINT_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path)),
        Err(e) => return Err(Error::io(path, e)),
    };
    let manifest: CheckpointManifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    if manifest.dtype != "f64" {
        return Err(Error::Manifest(format!("unsupported checkpoint dtype {}", manifest.dtype)));
    }
    let cfg = manifest.adaptor_config;
    let store = manifest
        .adaptors
        .iter()
        .map(|entries| {
            let params = entries.iter().map(|e| read_tensor(dir, e)).collect::<Result<Vec<_>>>()?;
            Adaptor::from_params(cfg.kind, cfg.dim, cfg.hidden_dim, params)
        })
        .collect::<Result<Vec<_>>>()?;
    let adaptors = AdaptorSet::from_adaptors(cfg.placement, store)?;
    let optimizer = manifest
        .optimizer
        .iter()
        .map(|o| {
            Ok(AdamState {
                hyper: o.hyper,
                step: o.step,
                first_moment: o.first_moment.iter().map(|e| read_tensor(dir, e)).collect::<Result<_>>()?,
                second_moment: o.second_moment.iter().map(|e| read_tensor(dir, e)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Checkpoint { config: cfg, adaptors, optimizer })
}
