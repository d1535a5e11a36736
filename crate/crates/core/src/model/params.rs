use ndarray::Array2;
use rand_distr::{Distribution, Normal};

use super::config::{EncoderConfig, NormStyle, Precision};
use crate::rng::keyed_rng;

/// An ordered collection of named 2-D tensors (vectors are stored as 1×n).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Array2<f64>>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet { names: Vec::new(), tensors: Vec::new() }
    }

    pub(crate) fn push(&mut self, name: String, t: Array2<f64>) -> usize {
        self.names.push(name);
        self.tensors.push(t);
        self.tensors.len() - 1
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize) -> &Array2<f64> {
        &self.tensors[i]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Array2<f64> {
        &mut self.tensors[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array2<f64>)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn tensors(&self) -> &[Array2<f64>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.tensors
    }

    pub fn zeros_like(&self) -> Self {
        ParamSet {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(|t| Array2::zeros(t.raw_dim())).collect(),
        }
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &ParamSet) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            *a += b;
        }
    }

    pub fn scale(&mut self, k: f64) {
        for t in &mut self.tensors {
            t.mapv_inplace(|x| x * k);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors.iter().flat_map(|t| t.iter()).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub(crate) fn round_to_f32(&mut self) {
        for t in &mut self.tensors {
            t.mapv_inplace(|x| x as f32 as f64);
        }
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::new()
    }
}

/// `(weight, bias)` indices of a linear map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearIx {
    pub w: usize,
    pub b: usize,
}

/// `(gamma, beta)` indices of a LayerNorm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormIx {
    pub gamma: usize,
    pub beta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerIx {
    pub q: LinearIx,
    pub k: LinearIx,
    pub v: LinearIx,
    pub o: LinearIx,
    pub ln1: NormIx,
    pub ffn1: LinearIx,
    pub ffn2: LinearIx,
    pub ln2: NormIx,
}

/// Where every tensor lives in the [`ParamSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub token_embedding: usize,
    pub position_embedding: usize,
    pub layers: Vec<LayerIx>,
    pub final_norm: Option<NormIx>,
    pub mlm: LinearIx,
    pub dd: LinearIx,
    pub tser: LinearIx,
    pub trwr: LinearIx,
    pub classifier: Option<LinearIx>,
}

struct Builder<'a> {
    cfg: &'a EncoderConfig,
    set: ParamSet,
}

impl Builder<'_> {
    fn normal(&mut self, name: String, rows: usize, cols: usize) -> usize {
        let mut rng = keyed_rng(self.cfg.seed, &[b"init", name.as_bytes()]);
        let dist = Normal::new(0.0, self.cfg.init_std).expect("init_std validated");
        let t = Array2::from_shape_simple_fn((rows, cols), || dist.sample(&mut rng));
        self.set.push(name, t)
    }

    fn constant(&mut self, name: String, cols: usize, value: f64) -> usize {
        self.set.push(name, Array2::from_elem((1, cols), value))
    }

    fn linear(&mut self, name: &str, fan_in: usize, fan_out: usize) -> LinearIx {
        LinearIx { w: self.normal(format!("{name}.weight"), fan_in, fan_out), b: self.constant(format!("{name}.bias"), fan_out, 0.0) }
    }

    fn norm(&mut self, name: &str) -> NormIx {
        let h = self.cfg.hidden_dim;
        NormIx { gamma: self.constant(format!("{name}.gamma"), h, 1.0), beta: self.constant(format!("{name}.beta"), h, 0.0) }
    }
}

/// Deterministically initialize every tensor for `cfg`. Each tensor draws
/// from its own stream keyed by `(seed, name)`.
pub fn init_params(cfg: &EncoderConfig) -> (ParamSet, Layout) {
    let h = cfg.hidden_dim;
    let mut b = Builder { cfg, set: ParamSet::new() };
    let token_embedding = b.normal("embeddings.token".into(), cfg.vocab_size, h);
    let position_embedding = b.normal("embeddings.position".into(), cfg.max_len, h);
    let layers = (0..cfg.layers)
        .map(|l| {
            let p = format!("layer{l}");
            LayerIx {
                q: b.linear(&format!("{p}.attention.query"), h, h),
                k: b.linear(&format!("{p}.attention.key"), h, h),
                v: b.linear(&format!("{p}.attention.value"), h, h),
                o: b.linear(&format!("{p}.attention.output"), h, h),
                ln1: b.norm(&format!("{p}.norm1")),
                ffn1: b.linear(&format!("{p}.ffn.inner"), h, cfg.ffn_dim),
                ffn2: b.linear(&format!("{p}.ffn.outer"), cfg.ffn_dim, h),
                ln2: b.norm(&format!("{p}.norm2")),
            }
        })
        .collect();
    let final_norm = (cfg.norm == NormStyle::Pre && cfg.layers > 0).then(|| b.norm("final_norm"));
    let mlm = b.linear("heads.mlm", h, cfg.vocab_size);
    let dd = b.linear("heads.dd", h, cfg.dd_classes.max(1));
    let tser = b.linear("heads.tser", 2 * h, 2);
    let trwr = b.linear("heads.trwr", 2 * h, 2);
    let classifier = (cfg.classifier_classes > 0).then(|| b.linear("heads.classifier", h, cfg.classifier_classes));
    let mut set = b.set;
    if cfg.precision == Precision::F32 {
        set.round_to_f32();
    }
    (
        set,
        Layout { token_embedding, position_embedding, layers, final_norm, mlm, dd, tser, trwr, classifier },
    )
}
