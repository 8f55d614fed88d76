//! Loss and gradients for one minibatch, end to end.
//!
//! Raw image embeddings go through the image path, the visible diseases'
//! prompt embeddings go through the text path, and the prompt-pair BCE is
//! backpropagated into every adaptor parameter and every raw input. Prompts
//! of diseases hidden by the mask are never forwarded.

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};

use crate::adaptors::{AdaptorSet, PathOutput};
use crate::error::{Error, Result};
use crate::scoring::{backprop_scores, bce_loss, score_batch, LossNormalization};

#[derive(Clone, Debug)]
pub struct BatchGradients {
    pub loss: f64,
    /// One entry per adaptor in the set's store, tensors in parameter order.
    pub params: Vec<Vec<Vec<f64>>>,
    pub images: Array2<f64>,
    /// `C x dim`; rows of hidden diseases are zero.
    pub pos: Array2<f64>,
    pub neg: Array2<f64>,
}

pub fn batch_loss(
    adaptors: &AdaptorSet,
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
    labels: ArrayView2<'_, u8>,
    mask: &[u8],
    normalization: LossNormalization,
) -> Result<f64> {
    Ok(forward(adaptors, images, pos, neg, labels, mask, normalization)?.loss)
}

struct Forward {
    loss: f64,
    visible: Vec<usize>,
    image_out: PathOutput,
    text_out: PathOutput,
    dlogits: Array2<f64>,
}

fn forward(
    adaptors: &AdaptorSet,
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
    labels: ArrayView2<'_, u8>,
    mask: &[u8],
    normalization: LossNormalization,
) -> Result<Forward> {
    let c = pos.nrows();
    if mask.len() != c || labels.dim() != (images.nrows(), c) {
        return Err(Error::ShapeMismatch(format!(
            "{c} prompt pairs, mask of {}, labels {:?} for {} images",
            mask.len(),
            labels.dim(),
            images.nrows()
        )));
    }
    let visible: Vec<usize> = (0..c).filter(|&j| mask[j] == 1).collect();
    if visible.is_empty() {
        return Err(Error::EmptyMask);
    }
    let k = visible.len();

    let prompts = concatenate(Axis(0), &[pos.select(Axis(0), &visible).view(), neg.select(Axis(0), &visible).view()])
        .expect("prompt widths checked by caller");
    let image_out = adaptors.apply_image(images)?;
    let text_out = adaptors.apply_text(prompts.view())?;
    let adapted_pos = text_out.embeddings.slice(s![..k, ..]);
    let adapted_neg = text_out.embeddings.slice(s![k.., ..]);

    let scores = score_batch(image_out.embeddings.view(), adapted_pos, adapted_neg)?;
    let sub_labels = labels.select(Axis(1), &visible);
    let (loss, dlogits) = bce_loss(&scores, sub_labels.view(), &vec![1; k], normalization)?;
    Ok(Forward { loss, visible, image_out, text_out, dlogits })
}

pub fn batch_gradients(
    adaptors: &AdaptorSet,
    images: ArrayView2<'_, f64>,
    pos: ArrayView2<'_, f64>,
    neg: ArrayView2<'_, f64>,
    labels: ArrayView2<'_, u8>,
    mask: &[u8],
    normalization: LossNormalization,
) -> Result<BatchGradients> {
    let fwd = forward(adaptors, images, pos, neg, labels, mask, normalization)?;
    let k = fwd.visible.len();
    let text = &fwd.text_out.embeddings;
    let sg = backprop_scores(
        fwd.image_out.embeddings.view(),
        text.slice(s![..k, ..]),
        text.slice(s![k.., ..]),
        fwd.dlogits.view(),
    )?;

    let mut params = adaptors.zero_grads();
    let mut accumulate = |slot: usize, grads: Vec<Vec<f64>>| {
        for (acc, g) in params[slot].iter_mut().zip(grads) {
            acc.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
    };

    let image_grad = match &fwd.image_out.cache {
        Some((slot, cache)) => {
            let (g, grad_in) = adaptors.adaptors()[*slot].backward(cache, sg.images.view())?;
            accumulate(*slot, g);
            grad_in
        }
        None => sg.images,
    };

    let text_upstream = concatenate(Axis(0), &[sg.pos.view(), sg.neg.view()]).expect("same widths");
    let text_grad = match &fwd.text_out.cache {
        Some((slot, cache)) => {
            let (g, grad_in) = adaptors.adaptors()[*slot].backward(cache, text_upstream.view())?;
            accumulate(*slot, g);
            grad_in
        }
        None => text_upstream,
    };

    let mut pos_grad = Array2::zeros(pos.dim());
    let mut neg_grad = Array2::zeros(neg.dim());
    for (r, &j) in fwd.visible.iter().enumerate() {
        pos_grad.row_mut(j).assign(&text_grad.row(r));
        neg_grad.row_mut(j).assign(&text_grad.row(k + r));
    }

    Ok(BatchGradients { loss: fwd.loss, params, images: image_grad, pos: pos_grad, neg: neg_grad })
}
