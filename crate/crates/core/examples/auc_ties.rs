//! AUC from average ranks, checked against counting every
//! positive/negative pair, with ties and with an undefined column.

use pairtune::metrics::mean_auc;
use pairtune::auc;

fn pair_count(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                wins += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
            }
        }
    }
    wins / pairs
}

fn main() -> pairtune::Result<()> {
    let scores = [0.9, 0.4, 0.4, 0.4, 0.1, 0.7, 0.7];
    let labels = [1, 1, 0, 0, 0, 1, 0];
    let r = auc(&scores, &labels);
    println!(
        "ranked AUC {:.6} from {} positives, {} negatives, {} tie groups",
        r.value.unwrap(),
        r.num_pos,
        r.num_neg,
        r.tie_groups
    );
    println!("pair count {:.6}", pair_count(&scores, &labels));

    let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
    println!("AUC of negated scores {:.6}", auc(&flipped, &labels).value.unwrap());

    let all_same = auc(&[0.5; 4], &[1, 0, 1, 0]);
    println!("constant scores: {:.2}", all_same.value.unwrap());

    let single_class = auc(&[0.1, 0.2, 0.3], &[0, 0, 0]);
    println!("single-class labels: {:?}", single_class.value);

    let mean = mean_auc(&[r, all_same, single_class])?;
    println!("mean over defined columns {:.4} ({} excluded)", mean.value, mean.excluded);
    Ok(())
}
