//! Class-incremental training: one disease per task on disjoint image
//! subsets, evaluated on every disease after each task. Writes the learning
//! curve next to a zero-shot and a joint-training reference.

use pairtune::{evaluate, generate, render_curves, run, PromptStyle, RunConfig, Scenario, SynthConfig};

fn main() -> pairtune::Result<()> {
    let world = generate(&SynthConfig::default())?;
    let bank = world.prompt_bank(PromptStyle::Template).unwrap();

    let config = RunConfig { scenario: Scenario::ClassIncremental, ..RunConfig::default() };
    let report = run(&config, &world.train, &world.test, bank, &world.disease_names)?;
    let joint = run(&RunConfig { scenario: Scenario::Joint, ..config.clone() }, &world.train, &world.test, bank, &world.disease_names)?;

    println!("zero-shot       {:.4}", evaluate(None, &world.test, bank)?.mean_auc);
    for (k, agg) in report.aggregate.iter().enumerate() {
        let seed0 = &report.seeds[0].tasks[k];
        let per: Vec<String> = seed0.per_disease_auc.iter().map(|a| format!("{:.3}", a.unwrap_or(f64::NAN))).collect();
        println!(
            "after task {} ({:<16}) mean {:.4} ± {:.4}   seed 0: [{}]",
            agg.task_index,
            world.disease_names[k],
            agg.mean,
            agg.std.unwrap_or(0.0),
            per.join(", ")
        );
    }
    println!("joint           {:.4}", joint.final_mean_auc());

    let svg = std::env::temp_dir().join("pairtune-class-incremental.svg");
    render_curves(&report, Some(joint.final_mean_auc()), &svg)?;
    println!("curves written to {}", svg.display());
    Ok(())
}
