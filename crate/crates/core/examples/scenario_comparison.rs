//! All training protocols side by side on the default world, with template
//! and random prompts.

use pairtune::{evaluate, generate, run, PromptStyle, RunConfig, Scenario, SynthConfig};

fn main() -> pairtune::Result<()> {
    let world = generate(&SynthConfig::default())?;
    let scenarios = [Scenario::Joint, Scenario::ClassIncremental, Scenario::LabelIncremental, Scenario::DataIncremental];

    print!("{:<12}{:>10}", "prompts", "zero_shot");
    for s in scenarios {
        print!("{:>19}", s.as_str());
    }
    println!();
    for style in [PromptStyle::Template, PromptStyle::Generative, PromptStyle::Random] {
        let bank = world.prompt_bank(style).unwrap();
        print!("{:<12}{:>10.4}", style.as_str(), evaluate(None, &world.test, bank)?.mean_auc);
        for scenario in scenarios {
            let config = RunConfig { scenario, prompt_style: style, ..RunConfig::default() };
            let report = run(&config, &world.train, &world.test, bank, &world.disease_names)?;
            let last = report.aggregate.last().unwrap();
            print!("{:>12.4} ±{:.3}", last.mean, last.std.unwrap_or(0.0));
        }
        println!();
    }
    Ok(())
}
