//! Runs the adaptor placement x prompt style x scenario grid through the
//! same code path as `pairtune sweep`, on a smaller world.

use pairtune::cli::{cmd_sweep, CliConfig};
use serde_json::Value;

fn main() -> pairtune::Result<()> {
    let out = std::env::temp_dir().join("pairtune-ablation-grid");
    let config = CliConfig::default().with_overrides([
        ("synth.dim", Value::from(32)),
        ("synth.n_train", Value::from(1000)),
        ("paths.out", Value::from(out.to_string_lossy().into_owned())),
    ])?;
    let (dir, cells) = cmd_sweep(&config)?;
    let best = cells
        .iter()
        .filter_map(|c| c.final_mean_auc.map(|m| (m, c.name())))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is nonempty");
    println!("{} cells under {}; best {} at {:.4}", cells.len(), dir.display(), best.1, best.0);
    println!("rerunning reuses finished cells; delete the directory to start over");
    Ok(())
}
