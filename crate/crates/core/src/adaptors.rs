//! Trainable adaptors placed after the frozen image and text encoders.
//!
//! An adaptor maps a `dim`-wide embedding to another `dim`-wide embedding,
//! either with a single dense layer or with a one-hidden-layer ReLU MLP.
//! Parameters are kept as flat row-major buffers so the optimizer and the
//! checkpoint writer can treat every adaptor as a list of tensors.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptorKind {
    Dense,
    Mlp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    ImageOnly,
    TextOnly,
    Shared,
    Both,
}

impl Placement {
    pub const ALL: [Placement; 4] = [Placement::ImageOnly, Placement::TextOnly, Placement::Shared, Placement::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::ImageOnly => "image_only",
            Placement::TextOnly => "text_only",
            Placement::Shared => "shared",
            Placement::Both => "both",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Placement::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown placement `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    ScaledUniform,
    /// Exact identity map, so training starts from zero-shot behaviour.
    /// MLPs need `hidden_dim >= 2 * dim`.
    #[default]
    Identity,
}

/// Adaptor architecture independent of the data it will run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptorOptions {
    pub kind: AdaptorKind,
    pub placement: Placement,
    /// Hidden width of the MLP. `None` means the embedding width, or twice
    /// it under identity init, the narrowest MLP that can represent the identity.
    pub hidden_dim: Option<usize>,
    pub activation: Activation,
    pub init: Init,
}

impl Default for AdaptorOptions {
    fn default() -> Self {
        Self {
            kind: AdaptorKind::Mlp,
            placement: Placement::Both,
            hidden_dim: None,
            activation: Activation::Relu,
            init: Init::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptorConfig {
    pub kind: AdaptorKind,
    pub placement: Placement,
    pub dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    pub init: Init,
    pub seed: u64,
}

impl AdaptorConfig {
    pub fn new(options: AdaptorOptions, dim: usize, seed: u64) -> Self {
        Self {
            kind: options.kind,
            placement: options.placement,
            dim,
            hidden_dim: options.hidden_dim.unwrap_or(match (options.kind, options.init) {
                (AdaptorKind::Mlp, Init::Identity) => 2 * dim,
                _ => dim,
            }),
            activation: options.activation,
            init: options.init,
            seed,
        }
    }
}

/// Activations kept from [`Adaptor::forward`] for the matching backward call.
#[derive(Clone, Debug)]
pub struct Cache {
    input: Array2<f64>,
    pre_activation: Option<Array2<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adaptor {
    kind: AdaptorKind,
    dim: usize,
    hidden_dim: usize,
    params: Vec<Vec<f64>>,
}

impl Adaptor {
    pub fn new(config: &AdaptorConfig, rng: &mut rng::Stream) -> Result<Self> {
        let dim = config.dim;
        if dim < 2 {
            return Err(Error::Config(format!("adaptor dim must be >= 2, got {dim}")));
        }
        let hidden = match config.kind {
            AdaptorKind::Dense => dim,
            AdaptorKind::Mlp => config.hidden_dim,
        };
        if hidden == 0 {
            return Err(Error::Config("hidden_dim must be >= 1".into()));
        }
        let mut adaptor = Self { kind: config.kind, dim, hidden_dim: hidden, params: Vec::new() };
        adaptor.params = adaptor.param_shapes().iter().map(|&(r, c)| vec![0.0; r * c]).collect();

        match (config.init, config.kind) {
            (Init::ScaledUniform, _) => {
                for (tensor, (rows, cols)) in adaptor.params.iter_mut().zip(adaptor_shapes(config.kind, dim, hidden)) {
                    // Biases are stored as (n, 1) and stay zero.
                    if cols == 1 {
                        continue;
                    }
                    let bound = 1.0 / (cols as f64).sqrt();
                    for w in tensor.iter_mut().take(rows * cols) {
                        *w = rng::uniform_in(rng, -bound, bound);
                    }
                }
            }
            (Init::Identity, AdaptorKind::Dense) => {
                for i in 0..dim {
                    adaptor.params[0][i * dim + i] = 1.0;
                }
            }
            (Init::Identity, AdaptorKind::Mlp) => {
                if hidden < 2 * dim {
                    return Err(Error::IdentityInitInfeasible { hidden_dim: hidden, required: 2 * dim });
                }
                // relu(x) - relu(-x) = x through hidden units [x; -x; 0...].
                for i in 0..dim {
                    adaptor.params[0][i * dim + i] = 1.0;
                    adaptor.params[0][(dim + i) * dim + i] = -1.0;
                    adaptor.params[2][i * hidden + i] = 1.0;
                    adaptor.params[2][i * hidden + dim + i] = -1.0;
                }
            }
        }
        Ok(adaptor)
    }

    /// Builds an adaptor from explicit parameter tensors.
    pub fn from_params(kind: AdaptorKind, dim: usize, hidden_dim: usize, params: Vec<Vec<f64>>) -> Result<Self> {
        let hidden_dim = if kind == AdaptorKind::Dense { dim } else { hidden_dim };
        let shapes = adaptor_shapes(kind, dim, hidden_dim);
        if params.len() != shapes.len() {
            return Err(Error::ShapeMismatch(format!("{kind:?} adaptor takes {} tensors, got {}", shapes.len(), params.len())));
        }
        for (i, (p, (r, c))) in params.iter().zip(&shapes).enumerate() {
            if p.len() != r * c {
                return Err(Error::ShapeMismatch(format!("tensor {i} has {} values, expected {r}x{c}", p.len())));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::ShapeMismatch(format!("tensor {i} holds non-finite values")));
            }
        }
        Ok(Self { kind, dim, hidden_dim, params })
    }

    pub fn kind(&self) -> AdaptorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// `(rows, cols)` of each parameter tensor; biases are `(n, 1)`.
    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        adaptor_shapes(self.kind, self.dim, self.hidden_dim)
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.params
    }

    fn matrix(&self, i: usize) -> ArrayView2<'_, f64> {
        let (r, c) = self.param_shapes()[i];
        ArrayView2::from_shape((r, c), &self.params[i]).expect("parameter shape")
    }

    fn vector(&self, i: usize) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.params[i][..])
    }

    /// Applies the adaptor to each row of `x`.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Cache)> {
        if x.ncols() != self.dim {
            return Err(Error::ShapeMismatch(format!("input width {} != adaptor dim {}", x.ncols(), self.dim)));
        }
        let (y, pre_activation) = match self.kind {
            AdaptorKind::Dense => (x.dot(&self.matrix(0).t()) + &self.vector(1), None),
            AdaptorKind::Mlp => {
                let pre = x.dot(&self.matrix(0).t()) + &self.vector(1);
                let hidden = pre.mapv(|a| a.max(0.0));
                (hidden.dot(&self.matrix(2).t()) + &self.vector(3), Some(pre))
            }
        };
        debug_assert_eq!(y.ncols(), x.ncols());
        Ok((y, Cache { input: x.to_owned(), pre_activation }))
    }

    pub fn forward_one(&self, x: ArrayView1<'_, f64>) -> Result<(Array1<f64>, Cache)> {
        let (y, cache) = self.forward(x.insert_axis(Axis(0)))?;
        Ok((y.row(0).to_owned(), cache))
    }

    /// Gradients of a scalar objective given its gradient at the adaptor output.
    ///
    /// Parameter gradients are summed over the batch rows held in `cache`.
    pub fn backward(&self, cache: &Cache, grad_out: ArrayView2<'_, f64>) -> Result<(Vec<Vec<f64>>, Array2<f64>)> {
        let x = &cache.input;
        if x.ncols() != self.dim {
            return Err(Error::StaleCache(format!("cached input width {} != adaptor dim {}", x.ncols(), self.dim)));
        }
        if grad_out.dim() != (x.nrows(), self.dim) {
            return Err(Error::ShapeMismatch(format!(
                "grad_out {:?} does not match batch {}x{}",
                grad_out.dim(),
                x.nrows(),
                self.dim
            )));
        }
        match (self.kind, &cache.pre_activation) {
            (AdaptorKind::Dense, None) => {
                let dw = grad_out.t().dot(x);
                let db = grad_out.sum_axis(Axis(0));
                let grad_in = grad_out.dot(&self.matrix(0));
                Ok((vec![flat(dw), db.to_vec()], grad_in))
            }
            (AdaptorKind::Mlp, Some(pre)) => {
                if pre.dim() != (x.nrows(), self.hidden_dim) {
                    return Err(Error::StaleCache(format!(
                        "cached pre-activation {:?} != {}x{}",
                        pre.dim(),
                        x.nrows(),
                        self.hidden_dim
                    )));
                }
                let hidden = pre.mapv(|a| a.max(0.0));
                let dw2 = grad_out.t().dot(&hidden);
                let db2 = grad_out.sum_axis(Axis(0));
                let mut dpre = grad_out.dot(&self.matrix(2));
                dpre.zip_mut_with(pre, |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                let dw1 = dpre.t().dot(x);
                let db1 = dpre.sum_axis(Axis(0));
                let grad_in = dpre.dot(&self.matrix(0));
                Ok((vec![flat(dw1), db1.to_vec(), flat(dw2), db2.to_vec()], grad_in))
            }
            _ => Err(Error::StaleCache("cache was produced by a different adaptor kind".into())),
        }
    }
}

fn adaptor_shapes(kind: AdaptorKind, dim: usize, hidden: usize) -> Vec<(usize, usize)> {
    match kind {
        AdaptorKind::Dense => vec![(dim, dim), (dim, 1)],
        AdaptorKind::Mlp => vec![(hidden, dim), (hidden, 1), (dim, hidden), (dim, 1)],
    }
}

fn flat(m: Array2<f64>) -> Vec<f64> {
    if m.is_standard_layout() {
        m.into_raw_vec_and_offset().0
    } else {
        m.iter().copied().collect()
    }
}

/// Which adaptor, if any, sits on each encoder path.
///
/// Adaptors live in one store; the image and text paths hold slot indices
/// into it. The shared placement points both paths at slot 0, so there is a
/// single parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptorSet {
    placement: Placement,
    store: Vec<Adaptor>,
    image_slot: Option<usize>,
    text_slot: Option<usize>,
}

/// Output of one encoder path plus the cache needed to backpropagate it.
pub struct PathOutput {
    pub embeddings: Array2<f64>,
    pub cache: Option<(usize, Cache)>,
}

impl AdaptorSet {
    pub fn new(config: &AdaptorConfig) -> Result<Self> {
        let make = |role: &str| Adaptor::new(config, &mut rng::derive(config.seed, &format!("adaptor/{role}")));
        let (store, image_slot, text_slot) = match config.placement {
            Placement::ImageOnly => (vec![make("image")?], Some(0), None),
            Placement::TextOnly => (vec![make("text")?], None, Some(0)),
            Placement::Shared => (vec![make("shared")?], Some(0), Some(0)),
            Placement::Both => (vec![make("image")?, make("text")?], Some(0), Some(1)),
        };
        Ok(Self { placement: config.placement, store, image_slot, text_slot })
    }

    /// Reassembles a set from stored adaptors, in slot order.
    pub fn from_adaptors(placement: Placement, store: Vec<Adaptor>) -> Result<Self> {
        let (expected, image_slot, text_slot) = match placement {
            Placement::ImageOnly => (1, Some(0), None),
            Placement::TextOnly => (1, None, Some(0)),
            Placement::Shared => (1, Some(0), Some(0)),
            Placement::Both => (2, Some(0), Some(1)),
        };
        if store.len() != expected {
            return Err(Error::ShapeMismatch(format!("{placement} placement needs {expected} adaptors, got {}", store.len())));
        }
        Ok(Self { placement, store, image_slot, text_slot })
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn adaptors(&self) -> &[Adaptor] {
        &self.store
    }

    pub fn adaptors_mut(&mut self) -> &mut [Adaptor] {
        &mut self.store
    }

    pub fn image_adaptor(&self) -> Option<&Adaptor> {
        self.image_slot.map(|s| &self.store[s])
    }

    pub fn text_adaptor(&self) -> Option<&Adaptor> {
        self.text_slot.map(|s| &self.store[s])
    }

    pub fn image_adaptor_mut(&mut self) -> Option<&mut Adaptor> {
        self.image_slot.map(|s| &mut self.store[s])
    }

    pub fn text_adaptor_mut(&mut self) -> Option<&mut Adaptor> {
        self.text_slot.map(|s| &mut self.store[s])
    }

    pub fn image_slot(&self) -> Option<usize> {
        self.image_slot
    }

    pub fn text_slot(&self) -> Option<usize> {
        self.text_slot
    }

    fn apply(&self, slot: Option<usize>, x: ArrayView2<'_, f64>) -> Result<PathOutput> {
        match slot {
            None => Ok(PathOutput { embeddings: x.to_owned(), cache: None }),
            Some(s) => {
                let (embeddings, cache) = self.store[s].forward(x)?;
                Ok(PathOutput { embeddings, cache: Some((s, cache)) })
            }
        }
    }

    pub fn apply_image(&self, x: ArrayView2<'_, f64>) -> Result<PathOutput> {
        self.apply(self.image_slot, x)
    }

    pub fn apply_text(&self, x: ArrayView2<'_, f64>) -> Result<PathOutput> {
        self.apply(self.text_slot, x)
    }

    /// Zero gradients shaped like every adaptor in the store.
    pub fn zero_grads(&self) -> Vec<Vec<Vec<f64>>> {
        self.store.iter().map(|a| a.params.iter().map(|p| vec![0.0; p.len()]).collect()).collect()
    }

    /// Hex SHA-256 over all parameters in slot order.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for adaptor in &self.store {
            for tensor in &adaptor.params {
                for v in tensor {
                    hasher.update(v.to_le_bytes());
                }
            }
        }
        hex::encode(hasher.finalize())
    }
}

pub fn make_adaptor_set(config: &AdaptorConfig) -> Result<AdaptorSet> {
    AdaptorSet::new(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn config(kind: AdaptorKind, dim: usize, hidden: usize, init: Init, seed: u64) -> AdaptorConfig {
        AdaptorConfig {
            kind,
            placement: Placement::Both,
            dim,
            hidden_dim: hidden,
            activation: Activation::Relu,
            init,
            seed,
        }
    }

    #[test]
    fn dense_identity_init() {
        let set = make_adaptor_set(&config(AdaptorKind::Dense, 4, 4, Init::Identity, 0)).unwrap();
        let a = set.image_adaptor().unwrap();
        let w = a.matrix(0);
        assert_eq!(w, Array2::<f64>::eye(4));
        assert!(a.params()[1].iter().all(|&b| b == 0.0));
        let (y, _) = a.forward_one(array![3.0, -1.0, 0.5, 2.0].view()).unwrap();
        assert_eq!(y, array![3.0, -1.0, 0.5, 2.0]);
    }

    #[test]
    fn mlp_identity_needs_wide_hidden_layer() {
        let err = make_adaptor_set(&config(AdaptorKind::Mlp, 4, 7, Init::Identity, 0)).unwrap_err();
        assert!(matches!(err, Error::IdentityInitInfeasible { hidden_dim: 7, required: 8 }));
        let set = make_adaptor_set(&config(AdaptorKind::Mlp, 4, 8, Init::Identity, 0)).unwrap();
        let x = array![[-2.0, 3.0, 0.25, -0.125]];
        let (y, _) = set.text_adaptor().unwrap().forward(x.view()).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let c = config(AdaptorKind::Mlp, 4, 4, Init::ScaledUniform, 7);
        let a = make_adaptor_set(&c).unwrap();
        let b = make_adaptor_set(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
    }

    #[test]
    fn scaled_uniform_bound() {
        for seed in 0..50 {
            let set = make_adaptor_set(&config(AdaptorKind::Dense, 4, 4, Init::ScaledUniform, seed)).unwrap();
            for a in set.adaptors() {
                assert!(a.params()[0].iter().all(|w| w.abs() <= 0.5));
                assert!(a.params()[1].iter().all(|&b| b == 0.0));
            }
        }
    }

    #[test]
    fn dense_forward_hand_case() {
        let a = Adaptor::from_params(AdaptorKind::Dense, 2, 2, vec![vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let (y, _) = a.forward_one(array![2.0, 5.0].view()).unwrap();
        assert_eq!(y, array![6.0, 2.0]);
    }

    #[test]
    fn mlp_forward_clips_with_relu() {
        let eye = vec![1.0, 0.0, 0.0, 1.0];
        let a = Adaptor::from_params(AdaptorKind::Mlp, 2, 2, vec![eye.clone(), vec![0.0; 2], eye, vec![0.0; 2]]).unwrap();
        let (y, _) = a.forward_one(array![-2.0, 3.0].view()).unwrap();
        assert_eq!(y, array![0.0, 3.0]);
    }

    #[test]
    fn identity_dense_backward() {
        let set = make_adaptor_set(&config(AdaptorKind::Dense, 3, 3, Init::Identity, 0)).unwrap();
        let a = set.image_adaptor().unwrap();
        let x = array![[1.0, -2.0, 0.5]];
        let g = array![[0.3, 0.1, -0.7]];
        let (_, cache) = a.forward(x.view()).unwrap();
        let (grads, grad_in) = a.backward(&cache, g.view()).unwrap();
        assert_eq!(grad_in, g);
        let outer = g.t().dot(&x);
        assert_eq!(grads[0], outer.iter().copied().collect::<Vec<_>>());
        assert_eq!(grads[1], vec![0.3, 0.1, -0.7]);
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_grads() {
        for kind in [AdaptorKind::Dense, AdaptorKind::Mlp] {
            let set = make_adaptor_set(&config(kind, 3, 5, Init::ScaledUniform, 9)).unwrap();
            let a = set.image_adaptor().unwrap();
            let (_, cache) = a.forward(array![[1.0, 2.0, -3.0], [0.5, 0.1, 0.2]].view()).unwrap();
            let (grads, grad_in) = a.backward(&cache, Array2::zeros((2, 3)).view()).unwrap();
            assert!(grads.iter().flatten().all(|&g| g == 0.0));
            assert!(grad_in.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn shape_errors() {
        let set = make_adaptor_set(&config(AdaptorKind::Mlp, 3, 5, Init::ScaledUniform, 9)).unwrap();
        let a = set.image_adaptor().unwrap();
        assert!(matches!(a.forward(Array2::zeros((1, 4)).view()), Err(Error::ShapeMismatch(_))));

        let other = make_adaptor_set(&config(AdaptorKind::Mlp, 3, 6, Init::ScaledUniform, 9)).unwrap();
        let (_, cache) = other.image_adaptor().unwrap().forward(Array2::ones((1, 3)).view()).unwrap();
        assert!(matches!(a.backward(&cache, Array2::zeros((1, 3)).view()), Err(Error::StaleCache(_))));
        assert!(matches!(a.backward(&cache, Array2::zeros((2, 3)).view()), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn shared_placement_has_one_parameter_store() {
        let mut c = config(AdaptorKind::Dense, 2, 2, Init::Identity, 0);
        c.placement = Placement::Shared;
        let mut set = make_adaptor_set(&c).unwrap();
        assert_eq!(set.adaptors().len(), 1);
        set.image_adaptor_mut().unwrap().params_mut()[1][0] = 5.0;
        assert_eq!(set.text_adaptor().unwrap().params()[1][0], 5.0);
    }

    #[test]
    fn single_sided_placements_leave_other_path_untouched() {
        let mut c = config(AdaptorKind::Mlp, 3, 3, Init::ScaledUniform, 2);
        c.placement = Placement::ImageOnly;
        let set = make_adaptor_set(&c).unwrap();
        let x = array![[0.1, 0.2, 0.3]];
        assert!(set.text_adaptor().is_none());
        assert_eq!(set.apply_text(x.view()).unwrap().embeddings, x);
        c.placement = Placement::TextOnly;
        let set = make_adaptor_set(&c).unwrap();
        assert_eq!(set.apply_image(x.view()).unwrap().embeddings, x);
    }
}
