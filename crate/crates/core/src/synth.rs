//! Synthetic embedding worlds.
//!
//! Every disease owns a direction `d_j` in embedding space. An image
//! embedding is a shared base direction plus `+kappa` or `-kappa` along each
//! disease's visual direction, depending on its label, plus isotropic
//! gaussian noise. A prompt pair for disease `j` points along `+d_j` and
//! `-d_j`, blended with random unit vectors; the blend weight `alpha` stands
//! in for how well a prompt style's text embedding lines up with the visual
//! evidence. Template prompts are nearly aligned, generative ones less so,
//! and random prompts carry no alignment at all.
//!
//! With `visual_shift > 0` the visual direction is tilted away from `d_j`
//! towards a direction no prompt sees, so raw zero-shot scoring is good but
//! not optimal and fine-tuning has something to recover.
//!
//! All values are rounded to `f32` on construction so an in-memory world is
//! bit-identical to the same world after a write/load round trip.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::datamodel::{write_dataset, DatasetBundle, EmbeddingDataset, PromptBank, PromptStyle, Split};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};

const CHEST_FINDINGS: [&str; 5] = ["atelectasis", "cardiomegaly", "consolidation", "edema", "pleural_effusion"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptAlignment {
    pub template: f64,
    pub generative: f64,
    /// Always 0.
    pub random: f64,
}

impl Default for PromptAlignment {
    fn default() -> Self {
        Self { template: 0.95, generative: 0.7, random: 0.0 }
    }
}

impl PromptAlignment {
    pub fn for_style(&self, style: PromptStyle) -> f64 {
        match style {
            PromptStyle::Template => self.template,
            PromptStyle::Generative => self.generative,
            PromptStyle::Random => self.random,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub dim: usize,
    pub num_diseases: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// One prevalence per disease, or a single value for all of them.
    pub disease_prevalence: Vec<f64>,
    pub image_noise_sigma: f64,
    /// Offset along each disease's visual direction.
    pub kappa: f64,
    /// Tilt of the visual evidence away from the prompt direction: image
    /// offsets point along `normalize(d_j + shift * r_j)` with `r_j` a
    /// direction no prompt sees. 0 puts them exactly on `d_j`.
    pub visual_shift: f64,
    pub prompt_alignment: PromptAlignment,
    /// Probability that a label reuses the row's shared uniform draw.
    pub label_correlation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            num_diseases: 5,
            n_train: 2000,
            n_test: 1000,
            disease_prevalence: vec![0.3],
            image_noise_sigma: 0.5,
            kappa: 0.5,
            visual_shift: 0.75,
            prompt_alignment: PromptAlignment::default(),
            label_correlation: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.dim < 2 {
            return fail(format!("dim must be >= 2, got {}", self.dim));
        }
        if self.num_diseases == 0 {
            return fail("num_diseases must be >= 1".into());
        }
        if self.dim < self.direction_count() {
            return fail(format!(
                "dim {} cannot hold the {} orthonormal directions this world needs",
                self.dim,
                self.direction_count()
            ));
        }
        if !(self.visual_shift >= 0.0 && self.visual_shift.is_finite()) {
            return fail(format!("visual_shift must be >= 0, got {}", self.visual_shift));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return fail("n_train and n_test must be >= 1".into());
        }
        let p = &self.disease_prevalence;
        if !(p.len() == 1 || p.len() == self.num_diseases) {
            return fail(format!("{} prevalences for {} diseases", p.len(), self.num_diseases));
        }
        if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return fail(format!("prevalences must lie in (0, 1): {p:?}"));
        }
        if !(self.image_noise_sigma >= 0.0 && self.image_noise_sigma.is_finite()) {
            return fail(format!("image_noise_sigma must be >= 0, got {}", self.image_noise_sigma));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return fail(format!("kappa must be > 0, got {}", self.kappa));
        }
        let a = self.prompt_alignment;
        if ![a.template, a.generative].iter().all(|x| (0.0..=1.0).contains(x)) {
            return fail(format!("prompt alignments must lie in [0, 1]: {a:?}"));
        }
        if a.random != 0.0 {
            return fail(format!("random prompts carry no alignment; got {}", a.random));
        }
        if !(0.0..1.0).contains(&self.label_correlation) {
            return fail(format!("label_correlation must lie in [0, 1), got {}", self.label_correlation));
        }
        Ok(())
    }

    fn direction_count(&self) -> usize {
        if self.visual_shift > 0.0 {
            2 * self.num_diseases + 1
        } else {
            self.num_diseases + 1
        }
    }

    fn prevalence(&self, j: usize) -> f64 {
        if self.disease_prevalence.len() == 1 {
            self.disease_prevalence[0]
        } else {
            self.disease_prevalence[j]
        }
    }

    pub fn disease_names(&self) -> Vec<String> {
        if self.num_diseases == CHEST_FINDINGS.len() {
            CHEST_FINDINGS.iter().map(|s| s.to_string()).collect()
        } else {
            (1..=self.num_diseases).map(|j| format!("disease_{j}")).collect()
        }
    }
}

fn round_f32(x: f64) -> f64 {
    x as f32 as f64
}

fn gaussian_vector(rng: &mut Stream, dim: usize) -> Array1<f64> {
    Array1::from_shape_fn(dim, |_| rng::standard_normal(rng))
}

fn random_unit(rng: &mut Stream, dim: usize) -> Array1<f64> {
    loop {
        let g = gaussian_vector(rng, dim);
        let n = g.dot(&g).sqrt();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// `count` orthonormal rows from seeded gaussian draws.
///
/// Modified Gram-Schmidt with a second orthogonalisation pass.
pub fn orthonormal_directions(rng: &mut Stream, count: usize, dim: usize) -> Array2<f64> {
    let mut out = Array2::zeros((count, dim));
    let mut k = 0;
    while k < count {
        let mut v = gaussian_vector(rng, dim);
        for _ in 0..2 {
            for prev in out.rows().into_iter().take(k) {
                let proj = prev.dot(&v);
                v.scaled_add(-proj, &prev);
            }
        }
        let n = v.dot(&v).sqrt();
        if n < 1e-8 {
            continue;
        }
        out.row_mut(k).assign(&(v / n));
        k += 1;
    }
    out
}

/// The hidden geometry of a world.
#[derive(Clone, Debug)]
pub struct WorldGeometry {
    /// Directions the prompts are built from, one row per disease.
    pub disease_directions: Array2<f64>,
    /// Unit directions along which images carry each disease.
    pub visual_directions: Array2<f64>,
    pub base: Array1<f64>,
}

fn geometry(config: &SynthConfig) -> WorldGeometry {
    let c = config.num_diseases;
    let mut rng = rng::derive(config.seed, "synth/directions");
    let dirs = orthonormal_directions(&mut rng, config.direction_count(), config.dim);
    let disease_directions = dirs.slice(ndarray::s![..c, ..]).to_owned();
    let base = dirs.row(c).to_owned();
    let visual_directions = if config.visual_shift > 0.0 {
        let scale = 1.0 / (1.0 + config.visual_shift * config.visual_shift).sqrt();
        (&disease_directions + &(&dirs.slice(ndarray::s![c + 1.., ..]) * config.visual_shift)) * scale
    } else {
        disease_directions.clone()
    };
    WorldGeometry { disease_directions, visual_directions, base }
}

fn sample_split(config: &SynthConfig, geo: &WorldGeometry, split: Split, n: usize) -> Result<EmbeddingDataset> {
    let tag = match split {
        Split::Train => "train",
        Split::Test => "test",
    };
    let c = config.num_diseases;
    let mut label_rng = rng::derive(config.seed, &format!("synth/labels/{tag}"));
    let mut noise_rng = rng::derive(config.seed, &format!("synth/noise/{tag}"));

    let mut labels = Array2::<u8>::zeros((n, c));
    for i in 0..n {
        let shared = rng::uniform(&mut label_rng);
        for j in 0..c {
            let coin = rng::uniform(&mut label_rng);
            let own = rng::uniform(&mut label_rng);
            let u = if coin < config.label_correlation { shared } else { own };
            labels[(i, j)] = u8::from(u < config.prevalence(j));
        }
    }

    let mut embeddings = Array2::zeros((n, config.dim));
    for (i, mut row) in embeddings.outer_iter_mut().enumerate() {
        row.assign(&geo.base);
        for j in 0..c {
            let sign = if labels[(i, j)] == 1 { 1.0 } else { -1.0 };
            row.scaled_add(sign * config.kappa, &geo.visual_directions.row(j));
        }
        for v in row.iter_mut() {
            *v = round_f32(*v + config.image_noise_sigma * rng::standard_normal(&mut noise_rng));
        }
    }
    EmbeddingDataset::new(split, embeddings, labels)
}

fn prompt_bank(config: &SynthConfig, geo: &WorldGeometry, style: PromptStyle) -> Result<PromptBank> {
    let alpha = config.prompt_alignment.for_style(style);
    let mut rng = rng::derive(config.seed, &format!("synth/prompts/{style}"));
    let (c, dim) = (config.num_diseases, config.dim);
    let mut positive = Array2::zeros((c, dim));
    let mut negative = Array2::zeros((c, dim));
    for j in 0..c {
        let d = geo.disease_directions.row(j);
        for (target, sign) in [(&mut positive, 1.0), (&mut negative, -1.0)] {
            let g = random_unit(&mut rng, dim);
            let mut v = &d * (sign * alpha) + &g * (1.0 - alpha);
            let n = v.dot(&v).sqrt();
            if n < 1e-12 {
                // alpha = 0.5 with g exactly opposite d; practically unreachable.
                v = g;
            } else {
                v /= n;
            }
            target.row_mut(j).assign(&v.mapv(round_f32));
        }
    }
    PromptBank::new(style, positive, negative)
}

/// Builds the world described by `config`, with one prompt bank per style.
pub fn generate(config: &SynthConfig) -> Result<DatasetBundle> {
    generate_with_geometry(config).map(|(bundle, _)| bundle)
}

pub fn generate_with_geometry(config: &SynthConfig) -> Result<(DatasetBundle, WorldGeometry)> {
    config.validate()?;
    let geo = geometry(config);
    let train = sample_split(config, &geo, Split::Train, config.n_train)?;
    let test = sample_split(config, &geo, Split::Test, config.n_test)?;
    let banks = PromptStyle::ALL
        .into_iter()
        .map(|style| prompt_bank(config, &geo, style))
        .collect::<Result<Vec<_>>>()?;
    let bundle = DatasetBundle::new(config.disease_names(), train, test, banks)?;
    Ok((bundle, geo))
}

/// Generates a world and writes it to `dir`; returns the manifest path.
pub fn generate_to_dir(config: &SynthConfig, dir: impl AsRef<Path>) -> Result<PathBuf> {
    write_dataset(&generate(config)?, dir)
}
