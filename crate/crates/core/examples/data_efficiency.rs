//! Data-incremental training over 20 partitions: how much of the data is
//! needed to match joint training.

use pairtune::{generate, run, PromptStyle, RunConfig, Scenario, SynthConfig};

fn main() -> pairtune::Result<()> {
    let world = generate(&SynthConfig::default())?;
    let bank = world.prompt_bank(PromptStyle::Template).unwrap();
    let names = &world.disease_names;

    let joint = run(&RunConfig::default(), &world.train, &world.test, bank, names)?.final_mean_auc();
    let config = RunConfig { scenario: Scenario::DataIncremental, ..RunConfig::default() };
    let report = run(&config, &world.train, &world.test, bank, names)?;

    println!("joint: {joint:.4}");
    let mut reached = None;
    for agg in &report.aggregate {
        let share = 100.0 * agg.task_index as f64 / config.num_partitions as f64;
        let ratio = agg.mean / joint;
        println!("{:>3} partitions ({share:>5.1}% of the data)  {:.4}  {:.3} x joint", agg.task_index, agg.mean, ratio);
        if reached.is_none() && ratio >= 0.99 {
            reached = Some(share);
        }
    }
    match reached {
        Some(share) => println!("within 1% of joint after {share:.0}% of the data"),
        None => println!("never within 1% of joint"),
    }
    Ok(())
}
