//! Exemplar-free incremental fine-tuning of small adaptors over frozen
//! vision-language embeddings.
//!
//! Images and per-disease prompt pairs arrive as precomputed embeddings.
//! Adaptors on the image and/or text path are trained with a binary
//! cross-entropy whose logit is the difference between an image's cosine
//! similarity to the positive and to the negative prompt of each disease.
//! Training runs under joint, class-incremental, label-incremental and
//! data-incremental protocols, and every task ends with an AUC evaluation on
//! the full test set.
//!
//! The runnable programs under `examples/` walk through each part:
//!
//! ```bash
//! cargo run --release -p pairtune --example synth_world
//! cargo run --release -p pairtune --example zero_shot
//! cargo run --release -p pairtune --example class_incremental
//! cargo run --release -p pairtune --example scenario_comparison
//! cargo run --release -p pairtune --example data_efficiency
//! cargo run --release -p pairtune --example gradient_check
//! cargo run --release -p pairtune --example auc_ties
//! cargo run --release -p pairtune --example checkpoint_resume
//! cargo run --release -p pairtune --example ablation_grid
//! ```

pub mod adaptors;
pub mod checkpoint;
pub mod cli;
pub mod datamodel;
pub mod error;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod rng;
pub mod scenarios;
pub mod scoring;
pub mod synth;

pub use adaptors::{make_adaptor_set, Adaptor, AdaptorConfig, AdaptorKind, AdaptorOptions, AdaptorSet, Init, Placement};
pub use datamodel::{
    build_schedule, load_dataset, write_dataset, DatasetBundle, EmbeddingDataset, PromptBank, PromptStyle, RowSource,
    Scenario, Task, TaskSchedule,
};
pub use error::{Error, Result};
pub use metrics::{auc, mean_auc, render_curves, AucResult};
pub use optimizer::{adam_step, AdamHyper, AdamState};
pub use scenarios::{evaluate, run, RunConfig, RunReport};
pub use scoring::{backprop_scores, bce_loss, cosine, predict, score_batch, BatchScores, LossNormalization};
pub use synth::{generate, SynthConfig};
