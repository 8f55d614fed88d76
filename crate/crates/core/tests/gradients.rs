mod common;

use common::{check_gradients, GradCase, FD_STEP};
use ndarray::{array, Array2};
use pairtune::adaptors::{AdaptorOptions, Init};
use pairtune::scoring::sigmoid;
use pairtune::{
    backprop_scores, bce_loss, make_adaptor_set, rng, score_batch, Adaptor, AdaptorConfig, AdaptorKind,
    BatchScores, LossNormalization, Placement,
};

fn gauss(stream: &mut rng::Stream, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng::standard_normal(stream))
}

#[test]
fn dense_backward_matches_finite_differences() {
    let mut s = rng::derive(1, "test/dense-backward");
    let params = vec![gauss(&mut s, 3, 3).into_raw_vec_and_offset().0, gauss(&mut s, 3, 1).into_raw_vec_and_offset().0];
    let adaptor = Adaptor::from_params(AdaptorKind::Dense, 3, 3, params.clone()).unwrap();
    let x = gauss(&mut s, 1, 3);
    let upstream = gauss(&mut s, 1, 3);
    let (_, cache) = adaptor.forward(x.view()).unwrap();
    let (grads, _) = adaptor.backward(&cache, upstream.view()).unwrap();
    // Scalar objective L = <upstream, forward(x)>.
    let objective = |p: &Vec<Vec<f64>>| {
        let a = Adaptor::from_params(AdaptorKind::Dense, 3, 3, p.clone()).unwrap();
        (&a.forward(x.view()).unwrap().0 * &upstream).sum()
    };
    let mut worst: f64 = 0.0;
    for t in 0..2 {
        for i in 0..params[t].len() {
            let mut plus = params.clone();
            plus[t][i] += FD_STEP;
            let mut minus = params.clone();
            minus[t][i] -= FD_STEP;
            let numeric = (objective(&plus) - objective(&minus)) / (2.0 * FD_STEP);
            worst = worst.max((grads[t][i] - numeric).abs() / grads[t][i].abs().max(1e-12));
        }
    }
    assert!(worst < 1e-6, "worst relative error {worst}");
}

#[test]
fn identity_dense_backward_is_linear_calculus() {
    let options = AdaptorOptions { kind: AdaptorKind::Dense, init: Init::Identity, ..Default::default() };
    let set = make_adaptor_set(&AdaptorConfig::new(options, 3, 0)).unwrap();
    let adaptor = &set.adaptors()[0];
    let x = array![[1.0, -2.0, 0.5]];
    let g = array![[0.3, 0.1, -0.7]];
    let (y, cache) = adaptor.forward(x.view()).unwrap();
    assert_eq!(y, x);
    let (grads, grad_in) = adaptor.backward(&cache, g.view()).unwrap();
    assert_eq!(grad_in, g);
    let outer = g.t().dot(&x);
    assert_eq!(grads[0], outer.into_raw_vec_and_offset().0);
    assert_eq!(grads[1], vec![0.3, 0.1, -0.7]);
}

#[test]
fn score_backprop_matches_finite_differences_in_3d() {
    let mut s = rng::derive(2, "test/score-backprop");
    let (imgs, pos, neg) = (gauss(&mut s, 2, 3), gauss(&mut s, 2, 3), gauss(&mut s, 2, 3));
    let weights = gauss(&mut s, 2, 2);
    let objective = |m: &[Array2<f64>; 3]| (&score_batch(m[0].view(), m[1].view(), m[2].view()).unwrap().logits() * &weights).sum();
    let g = backprop_scores(imgs.view(), pos.view(), neg.view(), weights.view()).unwrap();
    for (which, analytic) in [(0, &g.images), (1, &g.pos), (2, &g.neg)] {
        for (idx, &a) in analytic.indexed_iter() {
            let bumped = |d: f64| {
                let mut m = [imgs.clone(), pos.clone(), neg.clone()];
                m[which][idx] += d;
                objective(&m)
            };
            let numeric = (bumped(FD_STEP) - bumped(-FD_STEP)) / (2.0 * FD_STEP);
            assert!((a - numeric).abs() <= 1e-4 * a.abs().max(numeric.abs()).max(1e-8), "{which} {idx:?}: {a} vs {numeric}");
        }
    }
}

#[test]
fn bce_gradient_is_sigmoid_minus_label_over_n() {
    let z = array![[0.3, -1.2, 2.0], [-0.1, 0.0, 4.5]];
    let y = array![[1u8, 0, 1], [0, 1, 0]];
    let mask = [1, 0, 1];
    let scores = BatchScores::new(z.clone(), Array2::zeros((2, 3))).unwrap();
    let (_, grad) = bce_loss(&scores, y.view(), &mask, LossNormalization::Batch).unwrap();
    for ((i, j), &g) in grad.indexed_iter() {
        let expect = if mask[j] == 1 { (sigmoid(z[(i, j)]) - y[(i, j)] as f64) / 2.0 } else { 0.0 };
        assert!((g - expect).abs() < 1e-15);
        if mask[j] == 1 {
            let bumped = |d: f64| {
                let mut zz = z.clone();
                zz[(i, j)] += d;
                let s = BatchScores::new(zz, Array2::zeros((2, 3))).unwrap();
                bce_loss(&s, y.view(), &mask, LossNormalization::Batch).unwrap().0
            };
            let numeric = (bumped(FD_STEP) - bumped(-FD_STEP)) / (2.0 * FD_STEP);
            assert!((g - numeric).abs() < 1e-9, "({i},{j}) {g} vs {numeric}");
        }
    }
}

#[test]
fn batch_loss_matches_loop_reference() {
    for kind in [AdaptorKind::Dense, AdaptorKind::Mlp] {
        for placement in Placement::ALL {
            for seed in 0..5 {
                let case = GradCase::random(kind, placement, seed);
                let lib = pairtune::objective::batch_loss(
                    &case.adaptor_set(),
                    case.images.view(),
                    case.pos.view(),
                    case.neg.view(),
                    case.labels.view(),
                    &case.mask,
                    case.norm,
                )
                .unwrap();
                let reference = case.reference_loss();
                assert!((lib - reference).abs() <= 1e-12 * reference.max(1.0), "{kind:?} {placement}: {lib} vs {reference}");
            }
        }
    }
}

#[test]
fn end_to_end_gradients_on_random_batches() {
    for kind in [AdaptorKind::Dense, AdaptorKind::Mlp] {
        for placement in Placement::ALL {
            let mut done = 0;
            let mut seed = 1000;
            while done < 10 {
                seed += 1;
                let case = GradCase::random(kind, placement, seed);
                if case.kink_margin() < 1e-3 {
                    continue;
                }
                let r = check_gradients(&case);
                assert!(r.failures.is_empty(), "{kind:?} {placement} seed {seed}: {:?}", r.failures);
                done += 1;
            }
        }
    }
}

#[test]
fn hidden_prompts_get_zero_gradient() {
    let mut case = (0..)
        .map(|seed| GradCase::random(AdaptorKind::Mlp, Placement::Both, seed))
        .find(|c| c.mask.len() >= 2)
        .unwrap();
    case.mask = vec![0; case.mask.len()];
    case.mask[0] = 1;
    let g = pairtune::objective::batch_gradients(
        &case.adaptor_set(),
        case.images.view(),
        case.pos.view(),
        case.neg.view(),
        case.labels.view(),
        &case.mask,
        case.norm,
    )
    .unwrap();
    for j in 1..case.mask.len() {
        assert!(g.pos.row(j).iter().chain(g.neg.row(j)).all(|&v| v == 0.0));
    }
}
