//! Embedding datasets, prompt banks, task schedules and their on-disk format.
//!
//! A dataset directory holds one JSON manifest plus headerless blobs of
//! little-endian `f32` values in row-major order. Labels are stored as
//! `0.0`/`1.0` floats so that every blob shares one layout.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    Template,
    Generative,
    Random,
}

impl PromptStyle {
    pub const ALL: [PromptStyle; 3] = [PromptStyle::Template, PromptStyle::Generative, PromptStyle::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptStyle::Template => "template",
            PromptStyle::Generative => "generative",
            PromptStyle::Random => "random",
        }
    }
}

impl fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PromptStyle::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown prompt style `{s}`")))
    }
}

/// Read access to training rows.
///
/// The trainer only touches rows through this trait, which lets tests swap
/// in [`AuditedRows`] to record every read.
pub trait RowSource {
    fn num_rows(&self) -> usize;
    fn dim(&self) -> usize;
    fn num_diseases(&self) -> usize;
    fn embedding(&self, row: usize) -> ArrayView1<'_, f64>;
    fn labels(&self, row: usize) -> ArrayView1<'_, u8>;
}

/// Precomputed image embeddings with binary multi-label targets.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingDataset {
    split: Split,
    embeddings: Array2<f64>,
    labels: Array2<u8>,
}

impl EmbeddingDataset {
    pub fn new(split: Split, embeddings: Array2<f64>, labels: Array2<u8>) -> Result<Self> {
        let (n, dim) = embeddings.dim();
        if n == 0 {
            return Err(Error::DimensionMismatch(format!("{split:?} split has no rows")));
        }
        if dim < 2 {
            return Err(Error::DimensionMismatch(format!("embedding dim {dim} < 2")));
        }
        if labels.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} label rows for {n} embedding rows",
                labels.nrows()
            )));
        }
        if labels.ncols() == 0 {
            return Err(Error::DimensionMismatch("no diseases".into()));
        }
        for ((row, column), &value) in labels.indexed_iter() {
            if value > 1 {
                return Err(Error::LabelDomainError { row, column, value: value as f32 });
            }
        }
        for (row, e) in embeddings.outer_iter().enumerate() {
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::ZeroNormEmbedding(format!("{split:?} row {row} is not finite")));
            }
            if e.dot(&e) == 0.0 {
                return Err(Error::ZeroNormEmbedding(format!("{split:?} row {row}")));
            }
        }
        Ok(Self { split, embeddings, labels })
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn len(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn embeddings(&self) -> &Array2<f64> {
        &self.embeddings
    }

    pub fn label_matrix(&self) -> &Array2<u8> {
        &self.labels
    }
}

impl RowSource for EmbeddingDataset {
    fn num_rows(&self) -> usize {
        self.embeddings.nrows()
    }

    fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    fn num_diseases(&self) -> usize {
        self.labels.ncols()
    }

    fn embedding(&self, row: usize) -> ArrayView1<'_, f64> {
        self.embeddings.row(row)
    }

    fn labels(&self, row: usize) -> ArrayView1<'_, u8> {
        self.labels.row(row)
    }
}

/// A [`RowSource`] wrapper that logs the index of every row read.
pub struct AuditedRows<'a> {
    inner: &'a EmbeddingDataset,
    reads: Mutex<Vec<usize>>,
}

impl<'a> AuditedRows<'a> {
    pub fn new(inner: &'a EmbeddingDataset) -> Self {
        Self { inner, reads: Mutex::new(Vec::new()) }
    }

    /// Row indices in the order they were read.
    pub fn reads(&self) -> Vec<usize> {
        self.reads.lock().expect("audit log poisoned").clone()
    }

    fn record(&self, row: usize) {
        self.reads.lock().expect("audit log poisoned").push(row);
    }
}

impl RowSource for AuditedRows<'_> {
    fn num_rows(&self) -> usize {
        self.inner.num_rows()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn num_diseases(&self) -> usize {
        self.inner.num_diseases()
    }

    fn embedding(&self, row: usize) -> ArrayView1<'_, f64> {
        self.record(row);
        self.inner.embedding(row)
    }

    fn labels(&self, row: usize) -> ArrayView1<'_, u8> {
        self.record(row);
        self.inner.labels(row)
    }
}

/// Positive and negative prompt embeddings, one row per disease.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptBank {
    style: PromptStyle,
    positive: Array2<f64>,
    negative: Array2<f64>,
}

impl PromptBank {
    pub fn new(style: PromptStyle, positive: Array2<f64>, negative: Array2<f64>) -> Result<Self> {
        if positive.dim() != negative.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{style} prompts: positive {:?} vs negative {:?}",
                positive.dim(),
                negative.dim()
            )));
        }
        for (name, m) in [("positive", &positive), ("negative", &negative)] {
            for (row, e) in m.outer_iter().enumerate() {
                if e.iter().any(|v| !v.is_finite()) || e.dot(&e) == 0.0 {
                    return Err(Error::ZeroNormEmbedding(format!("{style} {name} prompt {row}")));
                }
            }
        }
        for (j, (p, n)) in positive.outer_iter().zip(negative.outer_iter()).enumerate() {
            if p == n {
                return Err(Error::InvalidPromptBank(format!(
                    "{style} positive and negative prompts of disease {j} are identical"
                )));
            }
        }
        Ok(Self { style, positive, negative })
    }

    pub fn style(&self) -> PromptStyle {
        self.style
    }

    pub fn num_diseases(&self) -> usize {
        self.positive.nrows()
    }

    pub fn dim(&self) -> usize {
        self.positive.ncols()
    }

    pub fn positive(&self) -> &Array2<f64> {
        &self.positive
    }

    pub fn negative(&self) -> &Array2<f64> {
        &self.negative
    }
}

/// Train/test splits plus every prompt bank, as described by one manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetBundle {
    pub disease_names: Vec<String>,
    pub train: EmbeddingDataset,
    pub test: EmbeddingDataset,
    pub prompt_banks: Vec<PromptBank>,
}

impl DatasetBundle {
    pub fn new(
        disease_names: Vec<String>,
        train: EmbeddingDataset,
        test: EmbeddingDataset,
        prompt_banks: Vec<PromptBank>,
    ) -> Result<Self> {
        let c = disease_names.len();
        let dim = train.dim();
        for ds in [&train, &test] {
            if ds.num_diseases() != c {
                return Err(Error::DimensionMismatch(format!(
                    "{:?} split has {} label columns, manifest names {c} diseases",
                    ds.split(),
                    ds.num_diseases()
                )));
            }
            if ds.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{:?} split dim {} != {dim}",
                    ds.split(),
                    ds.dim()
                )));
            }
        }
        for bank in &prompt_banks {
            if bank.num_diseases() != c || bank.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{} prompt bank is {}x{}, expected {c}x{dim}",
                    bank.style(),
                    bank.num_diseases(),
                    bank.dim()
                )));
            }
        }
        Ok(Self { disease_names, train, test, prompt_banks })
    }

    pub fn dim(&self) -> usize {
        self.train.dim()
    }

    pub fn num_diseases(&self) -> usize {
        self.disease_names.len()
    }

    pub fn prompt_bank(&self, style: PromptStyle) -> Option<&PromptBank> {
        self.prompt_banks.iter().find(|b| b.style() == style)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub dim: usize,
    pub num_diseases: usize,
    pub disease_names: Vec<String>,
    pub splits: SplitFiles,
    pub prompt_banks: Vec<PromptBankFiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFiles {
    pub train: SplitEntry,
    pub test: SplitEntry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitEntry {
    pub embeddings: String,
    pub labels: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptBankFiles {
    pub style: PromptStyle,
    pub positive: String,
    pub negative: String,
}

pub(crate) fn read_blob(path: &Path, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingFile(path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let expected = rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} holds {} bytes, expected {rows}x{cols}x4 = {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(Array2::from_shape_vec((rows, cols), values).expect("length checked above"))
}

pub(crate) fn blob_bytes<'a>(values: impl IntoIterator<Item = &'a f64>) -> Vec<u8> {
    values.into_iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn labels_from_blob(raw: Array2<f64>) -> Result<Array2<u8>> {
    let mut out = Array2::zeros(raw.dim());
    for ((row, column), &v) in raw.indexed_iter() {
        out[(row, column)] = if v == 0.0 {
            0
        } else if v == 1.0 {
            1
        } else {
            return Err(Error::LabelDomainError { row, column, value: v as f32 });
        };
    }
    Ok(out)
}

/// Loads and validates a dataset directory from its manifest.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<DatasetBundle> {
    let manifest_path = manifest_path.as_ref();
    let text = match fs::read_to_string(manifest_path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingFile(manifest_path.to_path_buf()))
        }
        Err(e) => return Err(Error::io(manifest_path, e)),
    };
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", manifest_path.display())))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Manifest(format!("unsupported manifest version {}", manifest.version)));
    }
    if manifest.disease_names.len() != manifest.num_diseases {
        return Err(Error::DimensionMismatch(format!(
            "num_diseases = {} but {} disease names",
            manifest.num_diseases,
            manifest.disease_names.len()
        )));
    }
    let root = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let (dim, c) = (manifest.dim, manifest.num_diseases);

    let load_split = |split: Split, entry: &SplitEntry| -> Result<EmbeddingDataset> {
        let emb = read_blob(&root.join(&entry.embeddings), entry.count, dim)?;
        let labels = labels_from_blob(read_blob(&root.join(&entry.labels), entry.count, c)?)?;
        EmbeddingDataset::new(split, emb, labels)
    };
    let train = load_split(Split::Train, &manifest.splits.train)?;
    let test = load_split(Split::Test, &manifest.splits.test)?;

    let mut banks = Vec::with_capacity(manifest.prompt_banks.len());
    for files in &manifest.prompt_banks {
        let positive = read_blob(&root.join(&files.positive), c, dim)?;
        let negative = read_blob(&root.join(&files.negative), c, dim)?;
        banks.push(PromptBank::new(files.style, positive, negative)?);
    }
    DatasetBundle::new(manifest.disease_names, train, test, banks)
}

/// Writes a bundle into `dir` (created if needed) and returns the manifest path.
pub fn write_dataset(bundle: &DatasetBundle, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let split_entry = |ds: &EmbeddingDataset, name: &str| -> Result<SplitEntry> {
        let emb_name = format!("{name}_embeddings.f32");
        let lab_name = format!("{name}_labels.f32");
        write_file(&dir.join(&emb_name), &blob_bytes(ds.embeddings().iter()))?;
        let labels: Vec<f64> = ds.label_matrix().iter().map(|&v| v as f64).collect();
        write_file(&dir.join(&lab_name), &blob_bytes(labels.iter()))?;
        Ok(SplitEntry { embeddings: emb_name, labels: lab_name, count: ds.len() })
    };
    let train = split_entry(&bundle.train, "train")?;
    let test = split_entry(&bundle.test, "test")?;

    let mut prompt_banks = Vec::new();
    for bank in &bundle.prompt_banks {
        let pos = format!("prompts_{}_positive.f32", bank.style());
        let neg = format!("prompts_{}_negative.f32", bank.style());
        write_file(&dir.join(&pos), &blob_bytes(bank.positive().iter()))?;
        write_file(&dir.join(&neg), &blob_bytes(bank.negative().iter()))?;
        prompt_banks.push(PromptBankFiles { style: bank.style(), positive: pos, negative: neg });
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        dim: bundle.dim(),
        num_diseases: bundle.num_diseases(),
        disease_names: bundle.disease_names.clone(),
        splits: SplitFiles { train, test },
        prompt_banks,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Joint,
    ClassIncremental,
    LabelIncremental,
    DataIncremental,
    ZeroShot,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Joint,
        Scenario::ClassIncremental,
        Scenario::LabelIncremental,
        Scenario::DataIncremental,
        Scenario::ZeroShot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Joint => "joint",
            Scenario::ClassIncremental => "class_incremental",
            Scenario::LabelIncremental => "label_incremental",
            Scenario::DataIncremental => "data_incremental",
            Scenario::ZeroShot => "zero_shot",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    /// 1-based position in the schedule.
    pub index: usize,
    /// Training rows of this task, ascending.
    pub image_indices: Vec<usize>,
    /// 1 where the disease's labels are visible in this task.
    pub label_mask: Vec<u8>,
}

impl Task {
    pub fn visible_diseases(&self) -> Vec<usize> {
        self.label_mask.iter().enumerate().filter(|(_, &m)| m == 1).map(|(j, _)| j).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSchedule {
    pub scenario: Scenario,
    pub tasks: Vec<Task>,
    pub seed: u64,
}

impl TaskSchedule {
    /// Checks disjointness, coverage and mask shape against a training set.
    pub fn validate(&self, num_rows: usize, num_diseases: usize) -> Result<()> {
        let mut seen = vec![false; num_rows];
        for task in &self.tasks {
            if task.label_mask.len() != num_diseases {
                return Err(Error::ScheduleMismatch(format!(
                    "task {} mask has {} entries for {num_diseases} diseases",
                    task.index,
                    task.label_mask.len()
                )));
            }
            for &row in &task.image_indices {
                match seen.get_mut(row) {
                    None => {
                        return Err(Error::ScheduleMismatch(format!(
                            "task {} references row {row} of {num_rows}",
                            task.index
                        )))
                    }
                    Some(true) => {
                        return Err(Error::ScheduleMismatch(format!(
                            "row {row} appears in more than one task"
                        )))
                    }
                    Some(s) => *s = true,
                }
            }
        }
        if !self.tasks.is_empty() && seen.iter().any(|s| !s) {
            return Err(Error::ScheduleMismatch("tasks do not cover every training row".into()));
        }
        Ok(())
    }
}

/// Splits training rows into the tasks of `scenario`.
///
/// Rows are shuffled with a stream derived from `seed`, then cut into equal
/// contiguous chunks; the first `rows % tasks` chunks take one extra row.
/// `num_partitions` only matters for the data-incremental scenario.
pub fn build_schedule(
    dataset: &impl RowSource,
    scenario: Scenario,
    num_partitions: usize,
    seed: u64,
) -> Result<TaskSchedule> {
    let n = dataset.num_rows();
    let c = dataset.num_diseases();
    let num_tasks = match scenario {
        Scenario::ZeroShot => return Ok(TaskSchedule { scenario, tasks: Vec::new(), seed }),
        Scenario::Joint => 1,
        Scenario::ClassIncremental | Scenario::LabelIncremental => c,
        Scenario::DataIncremental => {
            if num_partitions == 0 {
                return Err(Error::Config("num_partitions must be >= 1".into()));
            }
            num_partitions
        }
    };
    if n < num_tasks {
        return Err(Error::TooFewRows { rows: n, tasks: num_tasks });
    }

    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::derive(seed, "schedule"), &mut order);

    let base = n / num_tasks;
    let extra = n % num_tasks;
    let mut tasks = Vec::with_capacity(num_tasks);
    let mut start = 0;
    for t in 0..num_tasks {
        let size = base + usize::from(t < extra);
        let mut image_indices = order[start..start + size].to_vec();
        image_indices.sort_unstable();
        start += size;
        let label_mask = (0..c)
            .map(|j| match scenario {
                Scenario::ClassIncremental => u8::from(j == t),
                Scenario::LabelIncremental => u8::from(j <= t),
                _ => 1,
            })
            .collect();
        tasks.push(Task { index: t + 1, image_indices, label_mask });
    }
    Ok(TaskSchedule { scenario, tasks, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(n: usize, c: usize) -> EmbeddingDataset {
        let emb = Array2::from_shape_fn((n, 4), |(i, k)| 1.0 + (i * 4 + k) as f64);
        let labels = Array2::from_shape_fn((n, c), |(i, j)| ((i + j) % 2) as u8);
        EmbeddingDataset::new(Split::Train, emb, labels).unwrap()
    }

    #[test]
    fn rejects_zero_norm_row() {
        let emb = array![[1.0, 2.0], [0.0, 0.0]];
        let labels = array![[1u8], [0]];
        assert!(matches!(
            EmbeddingDataset::new(Split::Train, emb, labels),
            Err(Error::ZeroNormEmbedding(_))
        ));
    }

    #[test]
    fn rejects_identical_prompt_pair() {
        let p = array![[1.0, 0.0], [0.0, 1.0]];
        let n = array![[-1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            PromptBank::new(PromptStyle::Template, p, n),
            Err(Error::InvalidPromptBank(_))
        ));
    }

    #[test]
    fn joint_schedule_is_single_full_task() {
        let ds = toy(10, 2);
        let s = build_schedule(&ds, Scenario::Joint, 20, 3).unwrap();
        assert_eq!(s.tasks.len(), 1);
        assert_eq!(s.tasks[0].image_indices, (0..10).collect::<Vec<_>>());
        assert_eq!(s.tasks[0].label_mask, vec![1, 1]);
    }

    #[test]
    fn data_incremental_equal_split() {
        let ds = toy(100, 3);
        let s = build_schedule(&ds, Scenario::DataIncremental, 20, 11).unwrap();
        assert_eq!(s.tasks.len(), 20);
        assert!(s.tasks.iter().all(|t| t.image_indices.len() == 5));
        assert!(s.tasks.iter().all(|t| t.label_mask == vec![1, 1, 1]));
        s.validate(100, 3).unwrap();
    }

    #[test]
    fn remainder_rows_go_to_first_tasks() {
        let ds = toy(103, 2);
        let s = build_schedule(&ds, Scenario::DataIncremental, 20, 5).unwrap();
        let sizes: Vec<usize> = s.tasks.iter().map(|t| t.image_indices.len()).collect();
        assert_eq!(&sizes[..3], &[6, 6, 6]);
        assert!(sizes[3..].iter().all(|&k| k == 5));
        let mut all: Vec<usize> = s.tasks.iter().flat_map(|t| t.image_indices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
    }

    #[test]
    fn class_and_label_masks() {
        let ds = toy(30, 3);
        let class = build_schedule(&ds, Scenario::ClassIncremental, 99, 1).unwrap();
        assert_eq!(class.tasks.len(), 3);
        assert_eq!(class.tasks[1].label_mask, vec![0, 1, 0]);
        let label = build_schedule(&ds, Scenario::LabelIncremental, 99, 1).unwrap();
        assert_eq!(label.tasks[1].label_mask, vec![1, 1, 0]);
        assert_eq!(label.tasks[2].label_mask, vec![1, 1, 1]);
    }

    #[test]
    fn too_few_rows() {
        let ds = toy(3, 1);
        assert!(matches!(
            build_schedule(&ds, Scenario::DataIncremental, 4, 0),
            Err(Error::TooFewRows { rows: 3, tasks: 4 })
        ));
    }

    #[test]
    fn zero_shot_schedule_is_empty() {
        let ds = toy(3, 1);
        let s = build_schedule(&ds, Scenario::ZeroShot, 4, 0).unwrap();
        assert!(s.tasks.is_empty());
    }

    #[test]
    fn audited_rows_log_reads() {
        let ds = toy(5, 1);
        let audited = AuditedRows::new(&ds);
        let _ = audited.embedding(3);
        let _ = audited.labels(1);
        assert_eq!(audited.reads(), vec![3, 1]);
    }
}
