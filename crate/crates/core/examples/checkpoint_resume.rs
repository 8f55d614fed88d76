//! Saves adaptors and optimizer state after the first tasks, reloads them
//! and finishes training; the result matches an uninterrupted run exactly.

use pairtune::adaptors::AdaptorSet;
use pairtune::checkpoint::{read_checkpoint, write_checkpoint};
use pairtune::scenarios::train_task;
use pairtune::{
    build_schedule, evaluate, generate, rng, AdamState, AdaptorConfig, PromptStyle, RunConfig, Scenario, SynthConfig,
    TaskSchedule,
};

fn main() -> pairtune::Result<()> {
    let world = generate(&SynthConfig::default())?;
    let bank = world.prompt_bank(PromptStyle::Template).unwrap();
    let config = RunConfig { scenario: Scenario::ClassIncremental, ..RunConfig::default() };
    let seed = 0;
    let schedule = build_schedule(&world.train, config.scenario, config.num_partitions, seed)?;
    let adaptor_config = AdaptorConfig::new(config.adaptor, world.dim(), seed);

    let train_range = |adaptors: &mut AdaptorSet, optimizer: &mut Vec<AdamState>, tasks: std::ops::Range<usize>, schedule: &TaskSchedule| -> pairtune::Result<()> {
        for task in &schedule.tasks[tasks] {
            optimizer.iter_mut().for_each(AdamState::reset);
            let mut shuffle = rng::derive(seed, &format!("example/shuffle/{}", task.index));
            train_task(adaptors, optimizer, &world.train, bank, task, &config, &mut shuffle)?;
            println!("  task {} done, mean AUC {:.4}", task.index, evaluate(Some(adaptors), &world.test, bank)?.mean_auc);
        }
        Ok(())
    };
    let fresh = || -> pairtune::Result<(AdaptorSet, Vec<AdamState>)> {
        let set = AdaptorSet::new(&adaptor_config)?;
        let opt = set.adaptors().iter().map(|a| AdamState::new(config.optimizer, a.params())).collect();
        Ok((set, opt))
    };

    println!("uninterrupted:");
    let (mut straight, mut straight_opt) = fresh()?;
    train_range(&mut straight, &mut straight_opt, 0..5, &schedule)?;

    println!("first two tasks, then checkpoint:");
    let (mut first, mut first_opt) = fresh()?;
    train_range(&mut first, &mut first_opt, 0..2, &schedule)?;
    let dir = std::env::temp_dir().join("pairtune-checkpoint-example");
    write_checkpoint(&dir, &adaptor_config, &first, &first_opt)?;
    drop(first);

    println!("resumed from {}:", dir.display());
    let restored = read_checkpoint(&dir)?;
    let (mut resumed, mut resumed_opt) = (restored.adaptors, restored.optimizer);
    train_range(&mut resumed, &mut resumed_opt, 2..5, &schedule)?;

    assert_eq!(resumed.checksum(), straight.checksum());
    println!("final adaptors identical: {}", straight.checksum());
    Ok(())
}
