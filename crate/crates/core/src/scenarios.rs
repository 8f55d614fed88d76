//! Zero-shot, joint and incremental training protocols.
//!
//! Each seed builds its adaptors and task schedule from its own derived
//! random streams, trains on the tasks in order and evaluates on the whole
//! test set after every task. Once a task is finished its rows are never
//! read again.

use std::fmt::Write as _;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptors::{AdaptorConfig, AdaptorOptions, AdaptorSet, Placement};
use crate::datamodel::{build_schedule, EmbeddingDataset, PromptBank, PromptStyle, RowSource, Scenario, Task, TaskSchedule};
use crate::error::{Error, Result};
use crate::metrics::{auc, mean_auc, AucResult};
use crate::objective::batch_gradients;
use crate::optimizer::{adam_step, AdamHyper, AdamState};
use crate::rng;
use crate::scoring::{score_batch, BatchScores, LossNormalization};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub adaptor: AdaptorOptions,
    pub scenario: Scenario,
    pub prompt_style: PromptStyle,
    pub epochs_per_task: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub num_partitions: usize,
    pub optimizer: AdamHyper,
    /// Start every task with fresh Adam moments.
    pub reset_optimizer_per_task: bool,
    pub loss_normalization: LossNormalization,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            adaptor: AdaptorOptions::default(),
            scenario: Scenario::Joint,
            prompt_style: PromptStyle::Template,
            epochs_per_task: 10,
            batch_size: 64,
            seeds: vec![0, 1, 2],
            num_partitions: 20,
            optimizer: AdamHyper::default(),
            reset_optimizer_per_task: true,
            loss_normalization: LossNormalization::Batch,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs_per_task == 0 {
            return Err(Error::Config("epochs_per_task must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.num_partitions == 0 {
            return Err(Error::Config("num_partitions must be >= 1".into()));
        }
        let h = self.optimizer;
        if !(h.lr > 0.0 && (0.0..1.0).contains(&h.beta1) && (0.0..1.0).contains(&h.beta2) && h.eps > 0.0) {
            return Err(Error::Config(format!("invalid Adam hyperparameters {h:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    /// 1-based task index; 0 for the zero-shot evaluation.
    pub task_index: usize,
    pub mean_auc: f64,
    pub per_disease_auc: Vec<Option<f64>>,
    /// Mean training loss of each epoch of this task.
    pub train_loss_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub tasks: Vec<TaskRecord>,
    pub final_checksum: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskAggregate {
    pub task_index: usize,
    pub mean: f64,
    /// Sample standard deviation across seeds; `None` with a single seed.
    pub std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub prompt_style: PromptStyle,
    pub placement: Placement,
    pub disease_names: Vec<String>,
    pub seeds: Vec<SeedReport>,
    pub aggregate: Vec<TaskAggregate>,
    pub warnings: Vec<String>,
}

impl RunReport {
    /// Final cross-seed mean AUC.
    pub fn final_mean_auc(&self) -> f64 {
        self.aggregate.last().map_or(f64::NAN, |a| a.mean)
    }

    /// One row per seed and task:
    /// `seed,scenario,task,mean_auc,auc_d1..auc_dC,final_train_loss`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,scenario,task,mean_auc");
        for j in 1..=self.disease_names.len() {
            write!(out, ",auc_d{j}").unwrap();
        }
        out.push_str(",final_train_loss\n");
        for s in &self.seeds {
            for t in &s.tasks {
                write!(out, "{},{},{},{}", s.seed, self.scenario, t.task_index, t.mean_auc).unwrap();
                for a in &t.per_disease_auc {
                    match a {
                        Some(v) => write!(out, ",{v}").unwrap(),
                        None => out.push(','),
                    }
                }
                match t.train_loss_trace.last() {
                    Some(l) => writeln!(out, ",{l}").unwrap(),
                    None => out.push_str(",\n"),
                }
            }
        }
        out
    }
}

/// Mean and per-disease AUC on a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub mean_auc: f64,
    pub per_disease: Vec<AucResult>,
    pub excluded: usize,
}

/// Ranks test rows by `S+ - S-` and computes AUC per disease.
pub fn evaluate(adaptors: Option<&AdaptorSet>, test: &EmbeddingDataset, bank: &PromptBank) -> Result<Evaluation> {
    if bank.dim() != test.dim() || bank.num_diseases() != test.num_diseases() {
        return Err(Error::ShapeMismatch(format!(
            "prompt bank {}x{} vs test set of width {} with {} diseases",
            bank.num_diseases(),
            bank.dim(),
            test.dim(),
            test.num_diseases()
        )));
    }
    let scores = score_test_set(adaptors, test, bank)?;
    let logits = scores.logits();
    let labels = test.label_matrix();
    let per_disease: Vec<AucResult> = (0..test.num_diseases())
        .into_par_iter()
        .map(|j| {
            let z = logits.column(j).to_vec();
            let y = labels.column(j).to_vec();
            auc(&z, &y)
        })
        .collect();
    let mean = mean_auc(&per_disease)?;
    Ok(Evaluation { mean_auc: mean.value, per_disease, excluded: mean.excluded })
}

/// Final state of one seed, for checkpointing.
#[derive(Clone, Debug)]
pub struct TrainedSeed {
    pub seed: u64,
    pub config: AdaptorConfig,
    pub adaptors: AdaptorSet,
    pub optimizer: Vec<AdamState>,
}

fn check_inputs(train: &impl RowSource, test: &EmbeddingDataset, bank: &PromptBank) -> Result<()> {
    if train.dim() != test.dim() || train.num_diseases() != test.num_diseases() {
        return Err(Error::ShapeMismatch(format!(
            "train {}x{} vs test {}x{}",
            train.dim(),
            train.num_diseases(),
            test.dim(),
            test.num_diseases()
        )));
    }
    if bank.dim() != train.dim() || bank.num_diseases() != train.num_diseases() {
        return Err(Error::ShapeMismatch(format!(
            "{} prompt bank is {}x{}, data is {}x{}",
            bank.style(),
            bank.num_diseases(),
            bank.dim(),
            train.num_diseases(),
            train.dim()
        )));
    }
    Ok(())
}

/// Trains `adaptors` on one task with minibatch Adam.
///
/// Returns the mean loss of each epoch.
#[allow(clippy::too_many_arguments)]
pub fn train_task(
    adaptors: &mut AdaptorSet,
    optimizer: &mut [AdamState],
    train: &impl RowSource,
    bank: &PromptBank,
    task: &Task,
    config: &RunConfig,
    shuffle_rng: &mut rng::Stream,
) -> Result<Vec<f64>> {
    let dim = train.dim();
    let c = train.num_diseases();
    let mut order = task.image_indices.clone();
    let mut trace = Vec::with_capacity(config.epochs_per_task);
    for _ in 0..config.epochs_per_task {
        rng::shuffle(shuffle_rng, &mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut images = Array2::zeros((batch.len(), dim));
            let mut labels = Array2::zeros((batch.len(), c));
            for (r, &row) in batch.iter().enumerate() {
                images.row_mut(r).assign(&train.embedding(row));
                labels.row_mut(r).assign(&train.labels(row));
            }
            let grads = batch_gradients(
                adaptors,
                images.view(),
                bank.positive().view(),
                bank.negative().view(),
                labels.view(),
                &task.label_mask,
                config.loss_normalization,
            )?;
            if !grads.loss.is_finite() {
                return Err(Error::NonFiniteGradient { tensor: 0, index: 0, step: optimizer[0].step + 1 });
            }
            epoch_loss += grads.loss * batch.len() as f64;
            for ((adaptor, state), g) in adaptors.adaptors_mut().iter_mut().zip(optimizer.iter_mut()).zip(&grads.params) {
                adam_step(state, adaptor.params_mut(), g)?;
            }
        }
        trace.push(epoch_loss / order.len() as f64);
    }
    Ok(trace)
}

/// Runs every task of `schedule` for one seed.
pub fn run_schedule(
    config: &RunConfig,
    seed: u64,
    schedule: &TaskSchedule,
    train: &impl RowSource,
    test: &EmbeddingDataset,
    bank: &PromptBank,
) -> Result<(SeedReport, TrainedSeed)> {
    check_inputs(train, test, bank)?;
    schedule.validate(train.num_rows(), train.num_diseases())?;
    let adaptor_config = AdaptorConfig::new(config.adaptor, train.dim(), seed);
    let mut adaptors = AdaptorSet::new(&adaptor_config)?;
    let mut optimizer: Vec<AdamState> =
        adaptors.adaptors().iter().map(|a| AdamState::new(config.optimizer, a.params())).collect();
    let mut shuffle_rng = rng::derive(seed, "shuffle");

    let mut tasks = Vec::new();
    if schedule.scenario == Scenario::ZeroShot {
        let eval = evaluate(None, test, bank)?;
        tasks.push(record(0, &eval, Vec::new()));
    }
    for task in &schedule.tasks {
        if config.reset_optimizer_per_task {
            optimizer.iter_mut().for_each(AdamState::reset);
        }
        let trace = train_task(&mut adaptors, &mut optimizer, train, bank, task, config, &mut shuffle_rng)?;
        let eval = evaluate(Some(&adaptors), test, bank)?;
        tasks.push(record(task.index, &eval, trace));
    }

    let report = SeedReport { seed, tasks, final_checksum: adaptors.checksum() };
    Ok((report, TrainedSeed { seed, config: adaptor_config, adaptors, optimizer }))
}

fn record(task_index: usize, eval: &Evaluation, train_loss_trace: Vec<f64>) -> TaskRecord {
    TaskRecord {
        task_index,
        mean_auc: eval.mean_auc,
        per_disease_auc: eval.per_disease.iter().map(|r| r.value).collect(),
        train_loss_trace,
    }
}

/// Runs the configured scenario for every seed and aggregates the results.
pub fn run(
    config: &RunConfig,
    train: &(impl RowSource + Sync),
    test: &EmbeddingDataset,
    bank: &PromptBank,
    disease_names: &[String],
) -> Result<RunReport> {
    run_detailed(config, train, test, bank, disease_names).map(|(report, _)| report)
}

/// Like [`run`], also returning each seed's final adaptors and optimizer state.
pub fn run_detailed(
    config: &RunConfig,
    train: &(impl RowSource + Sync),
    test: &EmbeddingDataset,
    bank: &PromptBank,
    disease_names: &[String],
) -> Result<(RunReport, Vec<TrainedSeed>)> {
    config.validate()?;
    check_inputs(train, test, bank)?;
    if bank.style() != config.prompt_style {
        return Err(Error::Config(format!(
            "run asks for {} prompts but got the {} bank",
            config.prompt_style,
            bank.style()
        )));
    }
    if disease_names.len() != train.num_diseases() {
        return Err(Error::ShapeMismatch(format!(
            "{} disease names for {} label columns",
            disease_names.len(),
            train.num_diseases()
        )));
    }

    let results: Vec<Result<(SeedReport, TrainedSeed)>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let schedule = build_schedule(train, config.scenario, config.num_partitions, seed)?;
            run_schedule(config, seed, &schedule, train, test, bank)
        })
        .collect();
    let mut seeds = Vec::with_capacity(results.len());
    let mut trained = Vec::with_capacity(results.len());
    for r in results {
        let (s, t) = r?;
        seeds.push(s);
        trained.push(t);
    }

    let warnings = (0..test.num_diseases())
        .filter(|&j| {
            let col = test.label_matrix().column(j);
            col.iter().all(|&y| y == col[0])
        })
        .map(|j| format!("disease {} ({}) has single-class test labels; its AUC is excluded", j + 1, disease_names[j]))
        .collect();

    let report = RunReport {
        scenario: config.scenario,
        prompt_style: config.prompt_style,
        placement: config.adaptor.placement,
        disease_names: disease_names.to_vec(),
        aggregate: aggregate(&seeds),
        seeds,
        warnings,
    };
    Ok((report, trained))
}

fn aggregate(seeds: &[SeedReport]) -> Vec<TaskAggregate> {
    let Some(first) = seeds.first() else { return Vec::new() };
    (0..first.tasks.len())
        .map(|k| {
            let values: Vec<f64> = seeds.iter().map(|s| s.tasks[k].mean_auc).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = (values.len() > 1)
                .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
            TaskAggregate { task_index: first.tasks[k].task_index, mean, std }
        })
        .collect()
}

/// Scores every test row against the prompt bank.
///
/// `None` scores the raw embeddings with no adaptor on either path.
pub fn score_test_set(adaptors: Option<&AdaptorSet>, test: &EmbeddingDataset, bank: &PromptBank) -> Result<BatchScores> {
    match adaptors {
        None => score_batch(test.embeddings().view(), bank.positive().view(), bank.negative().view()),
        Some(set) => {
            let images = set.apply_image(test.embeddings().view())?.embeddings;
            let pos = set.apply_text(bank.positive().view())?.embeddings;
            let neg = set.apply_text(bank.negative().view())?.embeddings;
            score_batch(images.view(), pos.view(), neg.view())
        }
    }
}
