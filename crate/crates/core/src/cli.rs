//! The `pairtune` command-line tool: `synth`, `run`, `sweep` and `report`.
//!
//! Configuration is layered: built-in defaults, then a JSON file of flat
//! dotted keys (`--config`), then `--set key=value` pairs, then the named
//! flags. Every key path is checked against the defaults, so a typo is a
//! hard error rather than a silently ignored setting. Every output
//! directory gets the fully resolved config (`config.json`, loadable again
//! with `--config`) and the checksums of the dataset it read (`inputs.json`).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::adaptors::Placement;
use crate::checkpoint::write_checkpoint;
use crate::datamodel::{load_dataset, DatasetBundle, Manifest, PromptStyle, Scenario, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::metrics::render_curves;
use crate::scenarios::{run_detailed, RunConfig, RunReport};
use crate::synth::{self, SynthConfig};

/// Environment variable naming the root directory for default output paths.
pub const OUT_ENV: &str = "PAIRTUNE_OUT";
const DEFAULT_OUT_ROOT: &str = "pairtune-out";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// Dataset manifest, or the directory holding `manifest.json`. When
    /// unset, `run` synthesizes a world from `synth.*` into `<out>/dataset`.
    pub data: Option<PathBuf>,
    /// Output directory. When unset, a name under `$PAIRTUNE_OUT`.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub placements: Vec<Placement>,
    pub prompt_styles: Vec<PromptStyle>,
    pub scenarios: Vec<Scenario>,
    /// Cells run concurrently; 0 means one per core.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            placements: Placement::ALL.to_vec(),
            prompt_styles: PromptStyle::ALL.to_vec(),
            scenarios: vec![
                Scenario::Joint,
                Scenario::ClassIncremental,
                Scenario::LabelIncremental,
                Scenario::DataIncremental,
            ],
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub synth: SynthConfig,
    pub run: RunConfig,
    pub paths: PathConfig,
    pub sweep: SweepConfig,
}

fn flatten_into(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, v, out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf.clone());
        }
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node.as_object_mut().and_then(|m| m.get_mut(*part)).expect("key checked against defaults");
    }
    node.as_object_mut().expect("key checked against defaults").insert(parts[parts.len() - 1].to_string(), value);
}

impl CliConfig {
    /// Every valid dotted key with its current value.
    pub fn to_flat(&self) -> BTreeMap<String, Value> {
        let mut out = BTreeMap::new();
        flatten_into("", &serde_json::to_value(self).expect("config serializes"), &mut out);
        out
    }

    /// Applies dotted-key overrides in order.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, Value)>) -> Result<Self> {
        let known = self.to_flat();
        let mut tree = serde_json::to_value(self).expect("config serializes");
        for (key, value) in overrides {
            // Objects are never leaves, so only known leaf keys are accepted.
            if !known.contains_key(key) || value.is_object() && !known[key].is_object() {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
            set_path(&mut tree, key, value);
        }
        serde_json::from_value(tree).map_err(|e| Error::Config(format!("invalid config value: {e}")))
    }

    /// Reads a flat JSON object of dotted keys and applies it on top of `self`.
    pub fn with_file(&self, path: &Path) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path.to_path_buf())),
            Err(e) => return Err(Error::io(path, e)),
        };
        let map: Map<String, Value> = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: expected a flat JSON object: {e}", path.display())))?;
        self.with_overrides(map.iter().map(|(k, v)| (k.as_str(), v.clone())))
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.run.validate()?;
        let g = &self.sweep;
        if g.placements.is_empty() || g.prompt_styles.is_empty() || g.scenarios.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        Ok(())
    }
}

/// Parses a `--set` value: JSON if it parses, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT), PathBuf::from)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn file_sha256(path: &Path) -> Result<String> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path.to_path_buf())),
        Err(e) => return Err(Error::io(path, e)),
    };
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// SHA-256 of a dataset's manifest and of every file it references.
pub fn dataset_checksums(manifest_path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", manifest_path.display())))?;
    let root = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut files = vec![MANIFEST_FILE.to_string()];
    for s in [&manifest.splits.train, &manifest.splits.test] {
        files.push(s.embeddings.clone());
        files.push(s.labels.clone());
    }
    for b in &manifest.prompt_banks {
        files.push(b.positive.clone());
        files.push(b.negative.clone());
    }
    let mut out = BTreeMap::new();
    for f in files {
        let path = if f == MANIFEST_FILE { manifest_path.to_path_buf() } else { root.join(&f) };
        out.insert(f, file_sha256(&path)?);
    }
    Ok(out)
}

fn manifest_path(data: &Path) -> PathBuf {
    if data.is_dir() {
        data.join(MANIFEST_FILE)
    } else {
        data.to_path_buf()
    }
}

fn write_self_description(dir: &Path, config: &CliConfig, manifest: Option<&Path>) -> Result<()> {
    write_json(&dir.join("config.json"), &config.to_flat())?;
    let inputs = match manifest {
        Some(m) => serde_json::json!({ "manifest": m, "files": dataset_checksums(m)? }),
        None => serde_json::json!({}),
    };
    write_json(&dir.join("inputs.json"), &inputs)
}

/// Generates a synthetic world; returns the manifest path.
pub fn cmd_synth(config: &CliConfig) -> Result<PathBuf> {
    config.synth.validate()?;
    let dir = config.paths.out.clone().unwrap_or_else(|| out_root().join(format!("synth-seed{}", config.synth.seed)));
    let manifest = synth::generate_to_dir(&config.synth, &dir)?;
    write_json(&dir.join("config.json"), &config.to_flat())?;
    Ok(manifest)
}

fn default_run_dir(run: &RunConfig) -> PathBuf {
    out_root().join(format!("run-{}-{}-{}", run.scenario, run.prompt_style, run.adaptor.placement))
}

/// Trains and evaluates one configuration; returns the output directory.
///
/// Writes `report.json`, `report.csv`, `curves.svg`, `curves.csv`,
/// `config.json`, `inputs.json` and one checkpoint per seed under
/// `checkpoints/seed_<s>/`. `report.json` is written last, so its presence
/// marks a finished run.
pub fn cmd_run(config: &CliConfig) -> Result<PathBuf> {
    config.validate()?;
    let dir = config.paths.out.clone().unwrap_or_else(|| default_run_dir(&config.run));
    create_dir(&dir)?;
    let manifest = match &config.paths.data {
        Some(data) => manifest_path(data),
        None => synth::generate_to_dir(&config.synth, dir.join("dataset"))?,
    };
    let bundle = load_dataset(&manifest)?;
    write_self_description(&dir, config, Some(&manifest))?;
    let report = run_bundle(config, &bundle, &dir)?;
    println!("{}: final mean AUC {:.4}", dir.display(), report.final_mean_auc());
    Ok(dir)
}

fn run_bundle(config: &CliConfig, bundle: &DatasetBundle, dir: &Path) -> Result<RunReport> {
    let style = config.run.prompt_style;
    let bank = bundle
        .prompt_bank(style)
        .ok_or_else(|| Error::InvalidPromptBank(format!("dataset has no {style} prompt bank")))?;
    let (report, trained) = run_detailed(&config.run, &bundle.train, &bundle.test, bank, &bundle.disease_names)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    fs::write(dir.join("report.csv"), report.to_csv()).map_err(|e| Error::io(dir.join("report.csv"), e))?;
    render_curves(&report, None, dir.join("curves.svg"))?;
    for t in &trained {
        write_checkpoint(dir.join("checkpoints").join(format!("seed_{}", t.seed)), &t.config, &t.adaptors, &t.optimizer)?;
    }
    let tmp = dir.join("report.json.tmp");
    write_json(&tmp, &report)?;
    fs::rename(&tmp, dir.join("report.json")).map_err(|e| Error::io(dir.join("report.json"), e))?;
    Ok(report)
}

/// Outcome of one sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub placement: Placement,
    pub prompt_style: PromptStyle,
    pub scenario: Scenario,
    pub final_mean_auc: Option<f64>,
    pub std: Option<f64>,
    pub seeds: usize,
    /// `done`, `skipped` (already on disk) or `failed: <error>`.
    pub status: String,
}

impl SweepCell {
    pub fn name(&self) -> String {
        cell_name(self.placement, self.prompt_style, self.scenario)
    }
}

fn cell_name(p: Placement, s: PromptStyle, sc: Scenario) -> String {
    format!("{p}__{s}__{sc}")
}

fn read_report(path: &Path) -> Result<RunReport> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingFile(path.to_path_buf())),
        Err(e) => return Err(Error::io(path, e)),
    };
    serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
}

/// Runs every placement x prompt style x scenario cell of the grid.
///
/// Cells whose `report.json` already exists are read back instead of rerun.
/// Writes `sweep.csv` and `sweep.md` (placements and prompts as rows,
/// scenarios as columns, `mean ± std` across seeds) and returns the cells.
pub fn cmd_sweep(config: &CliConfig) -> Result<(PathBuf, Vec<SweepCell>)> {
    config.validate()?;
    let dir = config.paths.out.clone().unwrap_or_else(|| out_root().join("sweep"));
    create_dir(&dir)?;
    let manifest = match &config.paths.data {
        Some(data) => manifest_path(data),
        None => {
            let m = dir.join("dataset").join(MANIFEST_FILE);
            if m.exists() { m } else { synth::generate_to_dir(&config.synth, dir.join("dataset"))? }
        }
    };
    let bundle = load_dataset(&manifest)?;
    write_self_description(&dir, config, Some(&manifest))?;

    let g = &config.sweep;
    let mut grid = Vec::new();
    for &p in &g.placements {
        for &s in &g.prompt_styles {
            for &sc in &g.scenarios {
                grid.push((p, s, sc));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let cells: Vec<SweepCell> = pool.install(|| {
        grid.par_iter()
            .map(|&(placement, prompt_style, scenario)| {
                let cell_dir = dir.join("cells").join(cell_name(placement, prompt_style, scenario));
                let mut cell_cfg = config.clone();
                cell_cfg.run.adaptor.placement = placement;
                cell_cfg.run.prompt_style = prompt_style;
                cell_cfg.run.scenario = scenario;
                cell_cfg.paths = PathConfig { data: Some(manifest.clone()), out: Some(cell_dir.clone()) };
                let report_path = cell_dir.join("report.json");
                let outcome = if report_path.exists() {
                    read_report(&report_path).map(|r| (r, "skipped"))
                } else {
                    create_dir(&cell_dir)
                        .and_then(|_| write_self_description(&cell_dir, &cell_cfg, Some(&manifest)))
                        .and_then(|_| run_bundle(&cell_cfg, &bundle, &cell_dir))
                        .map(|r| (r, "done"))
                };
                let mut cell = SweepCell {
                    placement,
                    prompt_style,
                    scenario,
                    final_mean_auc: None,
                    std: None,
                    seeds: 0,
                    status: String::new(),
                };
                match outcome {
                    Ok((report, status)) => {
                        let last = report.aggregate.last();
                        cell.final_mean_auc = last.map(|a| a.mean);
                        cell.std = last.and_then(|a| a.std);
                        cell.seeds = report.seeds.len();
                        cell.status = status.into();
                    }
                    Err(e) => cell.status = format!("failed: error[{}]: {e}", e.class()),
                }
                eprintln!("{}: {}", cell.name(), cell.status);
                cell
            })
            .collect()
    });

    let csv = sweep_csv(&cells);
    fs::write(dir.join("sweep.csv"), csv).map_err(|e| Error::io(dir.join("sweep.csv"), e))?;
    let table = sweep_table(&cells, g);
    fs::write(dir.join("sweep.md"), &table).map_err(|e| Error::io(dir.join("sweep.md"), e))?;
    print!("{table}");

    let failed: Vec<String> = cells.iter().filter(|c| c.status.starts_with("failed")).map(SweepCell::name).collect();
    if !failed.is_empty() {
        return Err(Error::SweepFailed { failed: failed.len(), total: cells.len(), cells: failed });
    }
    Ok((dir, cells))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("placement,prompt_style,scenario,final_mean_auc,std,seeds,status\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.placement,
            c.prompt_style,
            c.scenario,
            fmt_opt(c.final_mean_auc),
            fmt_opt(c.std),
            c.seeds,
            if c.status.starts_with("failed") { "failed" } else { c.status.as_str() }
        ));
    }
    out
}

fn sweep_table(cells: &[SweepCell], grid: &SweepConfig) -> String {
    let mut out = String::from("| adaptor | prompt |");
    for sc in &grid.scenarios {
        out.push_str(&format!(" {sc} |"));
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---|".repeat(grid.scenarios.len()));
    out.push('\n');
    for &p in &grid.placements {
        for &s in &grid.prompt_styles {
            out.push_str(&format!("| {p} | {s} |"));
            for &sc in &grid.scenarios {
                let cell = cells.iter().find(|c| (c.placement, c.prompt_style, c.scenario) == (p, s, sc));
                let text = match cell.and_then(|c| c.final_mean_auc.map(|m| (m, c.std))) {
                    Some((m, Some(sd))) => format!("{m:.3} ± {sd:.3}"),
                    Some((m, None)) => format!("{m:.3}"),
                    None => "failed".into(),
                };
                out.push_str(&format!(" {text} |"));
            }
            out.push('\n');
        }
    }
    out
}

/// Re-renders `curves.svg` and `curves.csv` from an existing `report.json`.
pub fn cmd_report(report_path: &Path, out: Option<&Path>, joint_baseline: Option<f64>) -> Result<PathBuf> {
    let report = read_report(report_path)?;
    let svg = out.map(Path::to_path_buf).unwrap_or_else(|| report_path.with_file_name("curves.svg"));
    render_curves(&report, joint_baseline, &svg)?;
    Ok(svg)
}

#[derive(Debug, Parser)]
#[command(name = "pairtune", version, about = "Incremental fine-tuning of adaptors over frozen vision-language embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic embedding world in the manifest format.
    Synth(ConfigArgs),
    /// Train and evaluate one scenario.
    Run(ConfigArgs),
    /// Run the placement x prompt style x scenario grid.
    Sweep(ConfigArgs),
    /// Re-render the curves of an existing report.json.
    Report {
        report: PathBuf,
        /// SVG path; defaults to curves.svg next to the report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draw a horizontal joint-training reference line at this AUC.
        #[arg(long)]
        baseline: Option<f64>,
    },
}

#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON file of flat dotted keys, e.g. {"run.scenario": "joint"}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one dotted key; the value is parsed as JSON, else taken as a string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (paths.out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dataset manifest or directory (paths.data).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Synthetic world seed (synth.seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Embedding width of the synthetic world (synth.dim).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Training rows of the synthetic world (synth.n_train)
    #[arg(long)]
    pub n_train: Option<usize>,
    /// Test rows of the synthetic world (synth.n_test)
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Training seeds, comma separated (run.seeds).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// zero_shot, joint, class_incremental, label_incremental or data_incremental (run.scenario)
    #[arg(long)]
    pub scenario: Option<String>,
    /// Prompt style: template, generative or random (run.prompt_style).
    #[arg(long)]
    pub style: Option<String>,
    /// Adaptor placement: image_only, text_only, shared or both (run.adaptor.placement)
    #[arg(long)]
    pub placement: Option<String>,
    /// Number of data-incremental partitions (run.num_partitions).
    #[arg(long)]
    pub partitions: Option<usize>,
    /// Epochs per task (run.epochs_per_task)
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Concurrent sweep cells (sweep.workers).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl ConfigArgs {
    /// Resolves defaults, config file, `--set` pairs and flags, in that order.
    pub fn resolve(&self) -> Result<CliConfig> {
        let mut config = CliConfig::default();
        if let Some(path) = &self.config {
            config = config.with_file(path)?;
        }
        let mut overrides: Vec<(String, Value)> = Vec::new();
        for pair in &self.set {
            let (k, v) =
                pair.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
            overrides.push((k.trim().to_string(), parse_value(v.trim())));
        }
        let path_value = |p: &PathBuf| Value::String(p.to_string_lossy().into_owned());
        let flags = [
            ("paths.out", self.out.as_ref().map(path_value)),
            ("paths.data", self.data.as_ref().map(path_value)),
            ("synth.seed", self.seed.map(Value::from)),
            ("synth.dim", self.dim.map(Value::from)),
            ("synth.n_train", self.n_train.map(Value::from)),
            ("synth.n_test", self.n_test.map(Value::from)),
            ("run.seeds", self.seeds.clone().map(Value::from)),
            ("run.scenario", self.scenario.clone().map(Value::from)),
            ("run.prompt_style", self.style.clone().map(Value::from)),
            ("run.adaptor.placement", self.placement.clone().map(Value::from)),
            ("run.num_partitions", self.partitions.map(Value::from)),
            ("run.epochs_per_task", self.epochs.map(Value::from)),
            ("sweep.workers", self.workers.map(Value::from)),
        ];
        overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        config.with_overrides(overrides.iter().map(|(k, v)| (k.as_str(), v.clone())))
    }
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => {
            let manifest = cmd_synth(&args.resolve()?)?;
            println!("{}", manifest.display());
        }
        Command::Run(args) => {
            cmd_run(&args.resolve()?)?;
        }
        Command::Sweep(args) => {
            cmd_sweep(&args.resolve()?)?;
        }
        Command::Report { report, out, baseline } => {
            let svg = cmd_report(&report, out.as_deref(), baseline)?;
            println!("{}", svg.display());
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Failures print one `error[Class]: message` line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[ConfigError]: {first}");
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.class(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let base = CliConfig::default();
        for key in ["run.scenery", "synth", "run.adaptor", "nope.x"] {
            let err = base.with_overrides([(key, Value::from(1))]).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{key}: {err}");
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = CliConfig::default()
            .with_overrides([
                ("run.scenario", Value::from("joint")),
                ("run.scenario", Value::from("class_incremental")),
                ("run.adaptor.hidden_dim", Value::from(32)),
                ("run.optimizer.lr", Value::from(0.01)),
            ])
            .unwrap();
        assert_eq!(cfg.run.scenario, Scenario::ClassIncremental);
        assert_eq!(cfg.run.adaptor.hidden_dim, Some(32));
        assert_eq!(cfg.run.optimizer.lr, 0.01);
    }

    #[test]
    fn flat_round_trip() {
        let cfg = CliConfig::default().with_overrides([("synth.seed", Value::from(9))]).unwrap();
        let flat = cfg.to_flat();
        let back = CliConfig::default().with_overrides(flat.iter().map(|(k, v)| (k.as_str(), v.clone()))).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let err = CliConfig::default().with_overrides([("run.scenario", Value::from("sideways"))]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn set_values_parse_as_json_or_string() {
        assert_eq!(parse_value("[0,1]"), serde_json::json!([0, 1]));
        assert_eq!(parse_value("joint"), Value::from("joint"));
        assert_eq!(parse_value("0.5"), Value::from(0.5));
    }
}
