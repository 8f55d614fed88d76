//! Loop-level reference implementations shared by the integration tests.

#![allow(dead_code)]

use ndarray::Array2;
use pairtune::adaptors::{AdaptorOptions, Init};
use pairtune::objective::batch_gradients;
use pairtune::{make_adaptor_set, rng, AdaptorConfig, AdaptorKind, AdaptorSet, LossNormalization, Placement};

pub const FD_STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
pub const ABS_FLOOR: f64 = 1e-8;

/// One random minibatch problem.
#[derive(Clone, Debug)]
pub struct GradCase {
    pub kind: AdaptorKind,
    pub placement: Placement,
    pub dim: usize,
    pub hidden: usize,
    pub store: Vec<Vec<Vec<f64>>>,
    pub images: Array2<f64>,
    pub pos: Array2<f64>,
    pub neg: Array2<f64>,
    pub labels: Array2<u8>,
    pub mask: Vec<u8>,
    pub norm: LossNormalization,
}

fn slots(placement: Placement) -> (Option<usize>, Option<usize>) {
    match placement {
        Placement::ImageOnly => (Some(0), None),
        Placement::TextOnly => (None, Some(0)),
        Placement::Shared => (Some(0), Some(0)),
        Placement::Both => (Some(0), Some(1)),
    }
}

impl GradCase {
    pub fn random(kind: AdaptorKind, placement: Placement, seed: u64) -> Self {
        let mut s = rng::derive(seed, &format!("test/grad-case/{kind:?}/{placement}"));
        let pick = |s: &mut rng::Stream, lo: usize, hi: usize| lo + (rng::uniform(s) * (hi - lo + 1) as f64) as usize;
        let dim = pick(&mut s, 2, 6);
        let hidden = pick(&mut s, 1, 7);
        let n = pick(&mut s, 1, 5);
        let c = pick(&mut s, 1, 4);
        let options = AdaptorOptions { kind, placement, hidden_dim: Some(hidden), init: Init::ScaledUniform, ..Default::default() };
        let set = make_adaptor_set(&AdaptorConfig::new(options, dim, seed)).unwrap();
        let store = set
            .adaptors()
            .iter()
            .map(|a| a.params().iter().map(|t| t.iter().map(|_| 0.6 * rng::standard_normal(&mut s)).collect()).collect())
            .collect();
        let mut gauss = |r: usize, k: usize| Array2::from_shape_fn((r, k), |_| rng::standard_normal(&mut s));
        let images = gauss(n, dim);
        let pos = gauss(c, dim);
        let neg = gauss(c, dim);
        let labels = Array2::from_shape_fn((n, c), |_| u8::from(rng::uniform(&mut s) < 0.5));
        let mut mask: Vec<u8> = (0..c).map(|_| u8::from(rng::uniform(&mut s) < 0.6)).collect();
        let forced = pick(&mut s, 0, c - 1);
        mask[forced] = 1;
        let norm = if rng::uniform(&mut s) < 0.5 { LossNormalization::Batch } else { LossNormalization::BatchAndDiseases };
        Self { kind, placement, dim, hidden: if kind == AdaptorKind::Dense { dim } else { hidden }, store, images, pos, neg, labels, mask, norm }
    }

    pub fn adaptor_set(&self) -> AdaptorSet {
        let adaptors = self
            .store
            .iter()
            .map(|p| pairtune::Adaptor::from_params(self.kind, self.dim, self.hidden, p.clone()).unwrap())
            .collect();
        AdaptorSet::from_adaptors(self.placement, adaptors).unwrap()
    }

    fn apply(&self, slot: Option<usize>, x: &[f64], store: &[Vec<Vec<f64>>], pre: &mut Vec<f64>) -> Vec<f64> {
        let Some(k) = slot else { return x.to_vec() };
        let p = &store[k];
        let d = self.dim;
        match self.kind {
            AdaptorKind::Dense => (0..d).map(|i| p[1][i] + (0..d).map(|j| p[0][i * d + j] * x[j]).sum::<f64>()).collect(),
            AdaptorKind::Mlp => {
                let h = self.hidden;
                let act: Vec<f64> = (0..h)
                    .map(|i| {
                        let z = p[1][i] + (0..d).map(|j| p[0][i * d + j] * x[j]).sum::<f64>();
                        pre.push(z);
                        z.max(0.0)
                    })
                    .collect();
                (0..d).map(|i| p[3][i] + (0..h).map(|j| p[2][i * h + j] * act[j]).sum::<f64>()).collect()
            }
        }
    }

    /// Loss from plain loops, plus every hidden pre-activation it computed.
    pub fn reference_loss_with(
        &self,
        store: &[Vec<Vec<f64>>],
        images: &Array2<f64>,
        pos: &Array2<f64>,
        neg: &Array2<f64>,
    ) -> (f64, Vec<f64>) {
        let (img_slot, txt_slot) = slots(self.placement);
        let mut pre = Vec::new();
        let cos = |u: &[f64], v: &[f64]| {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            dot / (nu * nv)
        };
        let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        let n = images.nrows();
        let visible: Vec<usize> = (0..self.mask.len()).filter(|&j| self.mask[j] == 1).collect();
        let prompts: Vec<(Vec<f64>, Vec<f64>)> = visible
            .iter()
            .map(|&j| {
                let p = self.apply(txt_slot, pos.row(j).as_slice().unwrap(), store, &mut pre);
                let q = self.apply(txt_slot, neg.row(j).as_slice().unwrap(), store, &mut pre);
                (p, q)
            })
            .collect();
        let mut total = 0.0;
        for i in 0..n {
            let x = self.apply(img_slot, images.row(i).as_slice().unwrap(), store, &mut pre);
            for (k, &j) in visible.iter().enumerate() {
                let z = cos(&x, &prompts[k].0) - cos(&x, &prompts[k].1);
                let y = self.labels[(i, j)] as f64;
                total += y * softplus(-z) + (1.0 - y) * softplus(z);
            }
        }
        let denom = match self.norm {
            LossNormalization::Batch => n as f64,
            LossNormalization::BatchAndDiseases => (n * visible.len()) as f64,
        };
        (total / denom, pre)
    }

    pub fn reference_loss(&self) -> f64 {
        self.reference_loss_with(&self.store, &self.images, &self.pos, &self.neg).0
    }

    /// Smallest |pre-activation| of any hidden unit; infinite for dense.
    pub fn kink_margin(&self) -> f64 {
        let (_, pre) = self.reference_loss_with(&self.store, &self.images, &self.pos, &self.neg);
        pre.iter().fold(f64::INFINITY, |m, z| m.min(z.abs()))
    }
}

#[derive(Debug)]
pub struct GradCheck {
    pub checked: usize,
    pub failures: Vec<String>,
    pub worst_relative: f64,
    pub loss_gap: f64,
}

fn agree(a: f64, n: f64) -> bool {
    (a - n).abs() <= (REL_TOL * a.abs().max(n.abs())).max(ABS_FLOOR)
}

/// Compares every analytic gradient of `batch_gradients` with central
/// differences of the loop-level reference loss.
pub fn check_gradients(case: &GradCase) -> GradCheck {
    let set = case.adaptor_set();
    let g = batch_gradients(
        &set,
        case.images.view(),
        case.pos.view(),
        case.neg.view(),
        case.labels.view(),
        &case.mask,
        case.norm,
    )
    .unwrap();
    let mut out = GradCheck {
        checked: 0,
        failures: Vec::new(),
        worst_relative: 0.0,
        loss_gap: (g.loss - case.reference_loss()).abs(),
    };
    let mut compare = |what: String, a: f64, n: f64| {
        out.checked += 1;
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(ABS_FLOOR);
        if (a - n).abs() > ABS_FLOOR {
            out.worst_relative = out.worst_relative.max(rel);
        }
        if !agree(a, n) {
            out.failures.push(format!("{what}: analytic {a:e} vs numeric {n:e}"));
        }
    };

    for slot in 0..case.store.len() {
        for t in 0..case.store[slot].len() {
            for i in 0..case.store[slot][t].len() {
                let bumped = |d: f64| {
                    let mut s = case.store.clone();
                    s[slot][t][i] += d;
                    case.reference_loss_with(&s, &case.images, &case.pos, &case.neg).0
                };
                let numeric = (bumped(FD_STEP) - bumped(-FD_STEP)) / (2.0 * FD_STEP);
                compare(format!("adaptor {slot} tensor {t}[{i}]"), g.params[slot][t][i], numeric);
            }
        }
    }
    for (name, which, analytic) in [("image", 0, &g.images), ("positive prompt", 1, &g.pos), ("negative prompt", 2, &g.neg)] {
        for (idx, &a) in analytic.indexed_iter() {
            let bumped = |d: f64| {
                let mut m = [case.images.clone(), case.pos.clone(), case.neg.clone()];
                m[which][idx] += d;
                case.reference_loss_with(&case.store, &m[0], &m[1], &m[2]).0
            };
            let numeric = (bumped(FD_STEP) - bumped(-FD_STEP)) / (2.0 * FD_STEP);
            compare(format!("{name} {idx:?}"), a, numeric);
        }
    }
    out
}

/// Positive/negative pair counting.
pub fn pair_count_auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] != 0 && labels[j] == 0 {
                pairs += 1;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}
