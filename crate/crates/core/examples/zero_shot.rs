//! Zero-shot scoring: each image is compared with a positive and a negative
//! prompt per disease, and the disease is called present when the positive
//! prompt is at least as similar. Identity adaptors leave everything unchanged.

use pairtune::adaptors::{AdaptorOptions, Init};
use pairtune::scenarios::score_test_set;
use pairtune::{evaluate, generate, make_adaptor_set, predict, AdaptorConfig, AdaptorKind, Placement, PromptStyle, SynthConfig};

fn main() -> pairtune::Result<()> {
    let world = generate(&SynthConfig::default())?;
    let bank = world.prompt_bank(PromptStyle::Template).unwrap();

    let raw = evaluate(None, &world.test, bank)?;
    println!("per-disease zero-shot AUC (template prompts):");
    for (name, r) in world.disease_names.iter().zip(&raw.per_disease) {
        println!("  {name:<18} {:.4}  ({} pos / {} neg)", r.value.unwrap_or(f64::NAN), r.num_pos, r.num_neg);
    }
    println!("mean {:.4}", raw.mean_auc);

    let scores = score_test_set(None, &world.test, bank)?;
    let calls = predict(&scores);
    let positives = calls.iter().filter(|&&p| p).count();
    println!("{positives} of {} image/disease pairs called present", calls.len());

    let options = AdaptorOptions { kind: AdaptorKind::Dense, placement: Placement::Both, init: Init::Identity, ..Default::default() };
    let identity = make_adaptor_set(&AdaptorConfig::new(options, world.dim(), 0))?;
    let adapted = score_test_set(Some(&identity), &world.test, bank)?;
    assert_eq!(adapted, scores);
    assert_eq!(evaluate(Some(&identity), &world.test, bank)?, raw);
    println!("identity dense adaptors on both paths: scores, calls and AUCs unchanged");
    Ok(())
}
