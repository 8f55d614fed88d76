//! Compares the analytic gradients of the minibatch loss with central
//! finite differences for every adaptor kind and placement.

use ndarray::Array2;
use pairtune::adaptors::{AdaptorOptions, Init};
use pairtune::objective::{batch_gradients, batch_loss};
use pairtune::{make_adaptor_set, rng, AdaptorConfig, AdaptorKind, AdaptorSet, LossNormalization, Placement};

const H: f64 = 1e-5;

fn random_matrix(stream: &mut rng::Stream, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng::standard_normal(stream))
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

fn main() -> pairtune::Result<()> {
    let (n, c, dim) = (6, 3, 5);
    let mut data = rng::derive(7, "example/gradient-check");
    let images = random_matrix(&mut data, n, dim);
    let pos = random_matrix(&mut data, c, dim);
    let neg = random_matrix(&mut data, c, dim);
    let labels = Array2::from_shape_fn((n, c), |_| u8::from(rng::uniform(&mut data) < 0.5));
    let mask = [1, 0, 1];
    let norm = LossNormalization::Batch;

    for kind in [AdaptorKind::Dense, AdaptorKind::Mlp] {
        for placement in Placement::ALL {
            let options = AdaptorOptions { kind, placement, hidden_dim: Some(4), init: Init::ScaledUniform, ..Default::default() };
            let mut set = make_adaptor_set(&AdaptorConfig::new(options, dim, 3))?;
            // Nonzero biases keep every MLP output away from the zero vector.
            for adaptor in set.adaptors_mut() {
                adaptor.params_mut().iter_mut().flatten().for_each(|w| *w = 0.5 * rng::standard_normal(&mut data));
            }
            let loss = |s: &AdaptorSet, x: &Array2<f64>, p: &Array2<f64>, q: &Array2<f64>| {
                batch_loss(s, x.view(), p.view(), q.view(), labels.view(), &mask, norm).unwrap()
            };
            let grads = batch_gradients(&set, images.view(), pos.view(), neg.view(), labels.view(), &mask, norm)?;

            let mut worst: f64 = 0.0;
            for slot in 0..set.adaptors().len() {
                for t in 0..set.adaptors()[slot].params().len() {
                    for i in 0..set.adaptors()[slot].params()[t].len() {
                        let mut plus = set.clone();
                        plus.adaptors_mut()[slot].params_mut()[t][i] += H;
                        let mut minus = set.clone();
                        minus.adaptors_mut()[slot].params_mut()[t][i] -= H;
                        let numeric = (loss(&plus, &images, &pos, &neg) - loss(&minus, &images, &pos, &neg)) / (2.0 * H);
                        worst = worst.max(relative_error(grads.params[slot][t][i], numeric));
                    }
                }
            }
            for (which, analytic) in [(0, &grads.images), (1, &grads.pos), (2, &grads.neg)] {
                for (idx, &a) in analytic.indexed_iter() {
                    let bump = |delta: f64| {
                        let (mut x, mut p, mut q) = (images.clone(), pos.clone(), neg.clone());
                        [&mut x, &mut p, &mut q][which][idx] += delta;
                        loss(&set, &x, &p, &q)
                    };
                    worst = worst.max(relative_error(a, (bump(H) - bump(-H)) / (2.0 * H)));
                }
            }
            println!("{:<6} {:<10} worst relative error {worst:.2e}", format!("{kind:?}"), placement.as_str());
        }
    }
    Ok(())
}
