//! Prompt-pair scoring.
//!
//! Each image is compared with the positive and the negative prompt of every
//! disease by cosine similarity. The difference `S+ - S-` is the logit fed to
//! binary cross-entropy during training and the decision statistic at
//! inference, where a disease is predicted present when `S+ >= S-`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScorePair {
    pub s_pos: f64,
    pub s_neg: f64,
}

impl ScorePair {
    pub fn logit(&self) -> f64 {
        self.s_pos - self.s_neg
    }
}

/// Cosine similarities of a batch of images against every prompt pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchScores {
    /// `N x C` similarities with the positive prompts.
    pub pos: Array2<f64>,
    /// `N x C` similarities with the negative prompts.
    pub neg: Array2<f64>,
}

impl BatchScores {
    pub fn new(pos: Array2<f64>, neg: Array2<f64>) -> Result<Self> {
        if pos.dim() != neg.dim() {
            return Err(Error::ShapeMismatch(format!("S+ {:?} vs S- {:?}", pos.dim(), neg.dim())));
        }
        Ok(Self { pos, neg })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.pos.dim()
    }

    pub fn pair(&self, image: usize, disease: usize) -> ScorePair {
        ScorePair { s_pos: self.pos[(image, disease)], s_neg: self.neg[(image, disease)] }
    }

    pub fn logits(&self) -> Array2<f64> {
        &self.pos - &self.neg
    }
}

/// How the summed cross-entropy is normalised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossNormalization {
    /// Divide by the number of images.
    #[default]
    Batch,
    /// Divide by images times visible diseases.
    BatchAndDiseases,
}

pub fn cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!("cosine of widths {} and {}", u.len(), v.len())));
    }
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNormVector(format!("|u| = {nu}, |v| = {nv}")));
    }
    Ok(u.dot(&v) / (nu * nv))
}

/// Gradients of `cosine(u, v)` with respect to `u` and `v`.
pub fn cosine_grad(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    let c = cosine(u, v)?;
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    let du = &v / (nu * nv) - &u * (c / (nu * nu));
    let dv = &u / (nu * nv) - &v * (c / (nv * nv));
    Ok((du, dv))
}

fn row_norms(m: ArrayView2<'_, f64>, what: &str) -> Result<Array1<f64>> {
    let norms = m.map_axis(Axis(1), |r| r.dot(&r).sqrt());
    if let Some(i) = norms.iter().position(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::ZeroNormVector(format!("{what} row {i}")));
    }
    Ok(norms)
}

fn normalized(m: ArrayView2<'_, f64>, norms: &Array1<f64>) -> Array2<f64> {
    let mut out = m.to_owned();
    for (mut row, &n) in out.outer_iter_mut().zip(norms) {
        row /= n;
    }
    out
}

struct Normalized {
    images: Array2<f64>,
    image_norms: Array1<f64>,
    pos: Array2<f64>,
    pos_norms: Array1<f64>,
    neg: Array2<f64>,
    neg_norms: Array1<f64>,
}

fn normalize_all(
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
) -> Result<Normalized> {
    let d = images.ncols();
    if pos.ncols() != d || neg.ncols() != d || pos.nrows() != neg.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "images {:?}, positive {:?}, negative {:?}",
            images.dim(),
            pos.dim(),
            neg.dim()
        )));
    }
    let image_norms = row_norms(images, "image")?;
    let pos_norms = row_norms(pos, "positive prompt")?;
    let neg_norms = row_norms(neg, "negative prompt")?;
    Ok(Normalized {
        images: normalized(images, &image_norms),
        image_norms,
        pos: normalized(pos, &pos_norms),
        pos_norms,
        neg: normalized(neg, &neg_norms),
        neg_norms,
    })
}

/// Scores `N` adapted images against `C` adapted prompt pairs.
pub fn score_batch(
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
) -> Result<BatchScores> {
    let n = normalize_all(images, pos, neg)?;
    Ok(BatchScores { pos: n.images.dot(&n.pos.t()), neg: n.images.dot(&n.neg.t()) })
}

/// `-log(sigmoid(-x))`, computed without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy on `S+ - S-` logits over the diseases selected by `mask`.
///
/// Returns the loss and its gradient with respect to every logit; unmasked
/// columns get zero gradient.
pub fn bce_loss(
    scores: &BatchScores,
    labels: ArrayView2<'_, u8>,
    mask: &[u8],
    normalization: LossNormalization,
) -> Result<(f64, Array2<f64>)> {
    let (n, c) = scores.dim();
    if labels.dim() != (n, c) || mask.len() != c {
        return Err(Error::ShapeMismatch(format!(
            "scores {n}x{c}, labels {:?}, mask {}",
            labels.dim(),
            mask.len()
        )));
    }
    let visible = mask.iter().filter(|&&m| m == 1).count();
    if visible == 0 {
        return Err(Error::EmptyMask);
    }
    let denom = match normalization {
        LossNormalization::Batch => n as f64,
        LossNormalization::BatchAndDiseases => (n * visible) as f64,
    };

    let mut total = 0.0;
    let mut grad = Array2::zeros((n, c));
    for i in 0..n {
        for j in (0..c).filter(|&j| mask[j] == 1) {
            let z = scores.pos[(i, j)] - scores.neg[(i, j)];
            let y = labels[(i, j)] as f64;
            total += y * softplus(-z) + (1.0 - y) * softplus(z);
            grad[(i, j)] = (sigmoid(z) - y) / denom;
        }
    }
    Ok((total / denom, grad))
}

/// Presence decisions: `S+ >= S-`, ties count as present.
pub fn predict(scores: &BatchScores) -> Array2<bool> {
    ndarray::Zip::from(&scores.pos).and(&scores.neg).map_collect(|&p, &q| p >= q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreGrads {
    pub images: Array2<f64>,
    pub pos: Array2<f64>,
    pub neg: Array2<f64>,
}

/// Backpropagates logit gradients through both cosine terms.
pub fn backprop_scores(
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
    dlogits: ArrayView2<'_, f64>,
) -> Result<ScoreGrads> {
    let n = normalize_all(images, pos, neg)?;
    if dlogits.dim() != (images.nrows(), pos.nrows()) {
        return Err(Error::ShapeMismatch(format!(
            "dloss/dlogits {:?} for {} images x {} diseases",
            dlogits.dim(),
            images.nrows(),
            pos.nrows()
        )));
    }
    let s_pos = n.images.dot(&n.pos.t());
    let s_neg = n.images.dot(&n.neg.t());

    // d cos(u, v)/du = (v_hat - cos * u_hat) / |u|, symmetric in v.
    let gp = &dlogits * &s_pos;
    let gn = &dlogits * &s_neg;
    let mut d_images = dlogits.dot(&n.pos) - dlogits.dot(&n.neg);
    let radial = gp.sum_axis(Axis(1)) - gn.sum_axis(Axis(1));
    for (i, mut row) in d_images.outer_iter_mut().enumerate() {
        row.scaled_add(-radial[i], &n.images.row(i));
        row /= n.image_norms[i];
    }

    let g_t = dlogits.t();
    let mut d_pos = g_t.dot(&n.images);
    let pos_radial = gp.sum_axis(Axis(0));
    for (j, mut row) in d_pos.outer_iter_mut().enumerate() {
        row.scaled_add(-pos_radial[j], &n.pos.row(j));
        row /= n.pos_norms[j];
    }

    let mut d_neg = g_t.dot(&n.images);
    let neg_radial = gn.sum_axis(Axis(0));
    for (j, mut row) in d_neg.outer_iter_mut().enumerate() {
        row.scaled_add(-neg_radial[j], &n.neg.row(j));
        row /= -n.neg_norms[j];
    }

    Ok(ScoreGrads { images: d_images, pos: d_pos, neg: d_neg })
}
