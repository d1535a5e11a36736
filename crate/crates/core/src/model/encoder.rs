use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::config::{EncoderConfig, NormStyle};
use super::params::{init_params, LayerIx, Layout, LinearIx, NormIx, ParamSet};
use crate::error::{Error, Result};

const LN_EPS: f64 = 1e-12;

/// Transformer encoder with its multi-task heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub config: EncoderConfig,
    pub params: ParamSet,
    pub layout: Layout,
}

struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

struct AttnCache {
    input: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    probs: Vec<Array2<f64>>,
    concat: Array2<f64>,
}

struct FfnCache {
    input: Array2<f64>,
    pre: Array2<f64>,
    act: Array2<f64>,
}

struct LayerCache {
    norm1: NormCache,
    norm2: NormCache,
    attn: AttnCache,
    ffn: FfnCache,
    drop1: Option<Array2<f64>>,
    drop2: Option<Array2<f64>>,
}

/// Intermediate values recorded by a training-mode forward pass.
pub struct ForwardCache {
    ids: Vec<u32>,
    layers: Vec<LayerCache>,
    final_norm: Option<NormCache>,
}

fn linear(x: &ArrayView2<f64>, p: &ParamSet, ix: LinearIx) -> Array2<f64> {
    x.dot(p.get(ix.w)) + p.get(ix.b)
}

fn linear_backward(x: &ArrayView2<f64>, dy: &Array2<f64>, p: &ParamSet, g: &mut ParamSet, ix: LinearIx) -> Array2<f64> {
    *g.get_mut(ix.w) += &x.t().dot(dy);
    *g.get_mut(ix.b) += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    dy.dot(&p.get(ix.w).t())
}

fn norm_forward(x: &Array2<f64>, p: &ParamSet, ix: NormIx) -> (Array2<f64>, NormCache) {
    let h = x.ncols() as f64;
    let mean = x.sum_axis(Axis(1)) / h;
    let centered = x - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|v| v * v).sum_axis(Axis(1)) / h;
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = &centered * &inv_std.view().insert_axis(Axis(1));
    let y = &xhat * p.get(ix.gamma) + p.get(ix.beta);
    (y, NormCache { xhat, inv_std })
}

fn norm_backward(dy: &Array2<f64>, c: &NormCache, p: &ParamSet, g: &mut ParamSet, ix: NormIx) -> Array2<f64> {
    *g.get_mut(ix.gamma) += &(dy * &c.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
    *g.get_mut(ix.beta) += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    let dxhat = dy * p.get(ix.gamma);
    let h = dy.ncols() as f64;
    let m1 = dxhat.sum_axis(Axis(1)) / h;
    let m2 = (&dxhat * &c.xhat).sum_axis(Axis(1)) / h;
    let inner = dxhat - &m1.insert_axis(Axis(1)) - &(&c.xhat * &m2.insert_axis(Axis(1)));
    inner * &c.inv_std.view().insert_axis(Axis(1))
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let t = (GELU_C * (x + 0.044715 * x * x * x)).tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

/// Numerically stable softmax of one row.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn softmax_rows(m: &mut Array2<f64>) {
    for mut row in m.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|z| (z - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|e| e / sum);
    }
}

fn dropout_mask<R: Rng>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Array2<f64> {
    let keep = 1.0 / (1.0 - rate);
    Array2::from_shape_simple_fn((rows, cols), || if rng.gen::<f64>() < rate { 0.0 } else { keep })
}

impl Encoder {
    pub fn new(config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        let (params, layout) = init_params(&config);
        Ok(Encoder { config, params, layout })
    }

    /// Rebuild from stored tensors; names and shapes must match `config`.
    pub fn from_params(config: EncoderConfig, params: ParamSet) -> Result<Self> {
        config.validate()?;
        let (template, layout) = init_params(&config);
        if template.names() != params.names() {
            return Err(Error::Config("parameter names do not match the encoder configuration".into()));
        }
        for ((name, a), (_, b)) in template.iter().zip(params.iter()) {
            if a.shape() != b.shape() {
                return Err(Error::Config(format!("tensor {name} has shape {:?}, expected {:?}", b.shape(), a.shape())));
            }
        }
        Ok(Encoder { config, params, layout })
    }

    /// Add (or replace) a `classes`-way classifier over position 0.
    pub fn with_classifier(&self, classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::Config("classifier needs at least one class".into()));
        }
        let mut config = self.config.clone();
        config.classifier_classes = classes;
        let mut fresh = Encoder::new(config)?;
        for (i, name) in self.params.names().iter().enumerate() {
            if name.starts_with("heads.classifier") {
                continue;
            }
            let j = fresh.params.index_of(name).expect("body tensors are shared");
            fresh.params.get_mut(j).assign(self.params.get(i));
        }
        Ok(fresh)
    }

    fn check_input(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::DegenerateInput("empty input sequence".into()));
        }
        if ids.len() > self.config.max_len {
            return Err(Error::SequenceTooLong { len: ids.len(), max_len: self.config.max_len });
        }
        if let Some(&bad) = ids.iter().find(|&&id| id as usize >= self.config.vocab_size) {
            return Err(Error::Config(format!("token id {bad} outside vocabulary of {}", self.config.vocab_size)));
        }
        Ok(())
    }

    fn embed(&self, ids: &[u32]) -> Array2<f64> {
        let tok = self.params.get(self.layout.token_embedding);
        let pos = self.params.get(self.layout.position_embedding);
        let mut x = Array2::zeros((ids.len(), self.config.hidden_dim));
        for (i, &id) in ids.iter().enumerate() {
            let mut row = x.row_mut(i);
            row += &tok.row(id as usize);
            row += &pos.row(i);
        }
        x
    }

    fn attention(&self, x: Array2<f64>, l: &LayerIx) -> (Array2<f64>, AttnCache) {
        let p = &self.params;
        let xv = x.view();
        let (q, k, v) = (linear(&xv, p, l.q), linear(&xv, p, l.k), linear(&xv, p, l.v));
        let d = self.config.head_dim();
        let scale = 1.0 / (d as f64).sqrt();
        let mut concat = Array2::zeros(x.raw_dim());
        let mut probs = Vec::with_capacity(self.config.heads);
        for h in 0..self.config.heads {
            let cols = s![.., h * d..(h + 1) * d];
            let mut scores = q.slice(cols).dot(&k.slice(cols).t()) * scale;
            softmax_rows(&mut scores);
            concat.slice_mut(cols).assign(&scores.dot(&v.slice(cols)));
            probs.push(scores);
        }
        let out = linear(&concat.view(), p, l.o);
        (out, AttnCache { input: x, q, k, v, probs, concat })
    }

    fn attention_backward(&self, dout: &Array2<f64>, c: &AttnCache, l: &LayerIx, g: &mut ParamSet) -> Array2<f64> {
        let p = &self.params;
        let dconcat = linear_backward(&c.concat.view(), dout, p, g, l.o);
        let d = self.config.head_dim();
        let scale = 1.0 / (d as f64).sqrt();
        let mut dq = Array2::zeros(c.q.raw_dim());
        let mut dk = Array2::zeros(c.k.raw_dim());
        let mut dv = Array2::zeros(c.v.raw_dim());
        for (h, probs) in c.probs.iter().enumerate() {
            let cols = s![.., h * d..(h + 1) * d];
            let dhead = dconcat.slice(cols);
            let dprobs = dhead.dot(&c.v.slice(cols).t());
            dv.slice_mut(cols).assign(&probs.t().dot(&dhead));
            let row_dot = (&dprobs * probs).sum_axis(Axis(1)).insert_axis(Axis(1));
            let dscores = (probs * &(dprobs - &row_dot)) * scale;
            dq.slice_mut(cols).assign(&dscores.dot(&c.k.slice(cols)));
            dk.slice_mut(cols).assign(&dscores.t().dot(&c.q.slice(cols)));
        }
        let xv = c.input.view();
        linear_backward(&xv, &dq, p, g, l.q) + linear_backward(&xv, &dk, p, g, l.k) + linear_backward(&xv, &dv, p, g, l.v)
    }

    fn ffn(&self, x: Array2<f64>, l: &LayerIx) -> (Array2<f64>, FfnCache) {
        let pre = linear(&x.view(), &self.params, l.ffn1);
        let act = pre.mapv(gelu);
        let out = linear(&act.view(), &self.params, l.ffn2);
        (out, FfnCache { input: x, pre, act })
    }

    fn ffn_backward(&self, dout: &Array2<f64>, c: &FfnCache, l: &LayerIx, g: &mut ParamSet) -> Array2<f64> {
        let dact = linear_backward(&c.act.view(), dout, &self.params, g, l.ffn2);
        let dpre = dact * &c.pre.mapv(gelu_grad);
        linear_backward(&c.input.view(), &dpre, &self.params, g, l.ffn1)
    }

    fn layer_forward<R: Rng>(&self, x: Array2<f64>, l: &LayerIx, rng: &mut Option<&mut R>) -> (Array2<f64>, LayerCache) {
        let rate = self.config.dropout;
        let mut drop = |m: Array2<f64>| -> (Array2<f64>, Option<Array2<f64>>) {
            match rng {
                Some(r) if rate > 0.0 => {
                    let mask = dropout_mask(m.nrows(), m.ncols(), rate, *r);
                    (m * &mask, Some(mask))
                }
                _ => (m, None),
            }
        };
        match self.config.norm {
            NormStyle::Post => {
                let (a, attn) = self.attention(x.clone(), l);
                let (a, drop1) = drop(a);
                let (h, norm1) = norm_forward(&(x + &a), &self.params, l.ln1);
                let (f, ffn) = self.ffn(h.clone(), l);
                let (f, drop2) = drop(f);
                let (y, norm2) = norm_forward(&(h + &f), &self.params, l.ln2);
                (y, LayerCache { norm1, norm2, attn, ffn, drop1, drop2 })
            }
            NormStyle::Pre => {
                let (u, norm1) = norm_forward(&x, &self.params, l.ln1);
                let (a, attn) = self.attention(u, l);
                let (a, drop1) = drop(a);
                let h = x + &a;
                let (u2, norm2) = norm_forward(&h, &self.params, l.ln2);
                let (f, ffn) = self.ffn(u2, l);
                let (f, drop2) = drop(f);
                (h + &f, LayerCache { norm1, norm2, attn, ffn, drop1, drop2 })
            }
        }
    }

    fn layer_backward(&self, dy: Array2<f64>, c: &LayerCache, l: &LayerIx, g: &mut ParamSet) -> Array2<f64> {
        let undrop = |d: &Array2<f64>, mask: &Option<Array2<f64>>| match mask {
            Some(m) => d * m,
            None => d.clone(),
        };
        let p = &self.params;
        match self.config.norm {
            NormStyle::Post => {
                let dr2 = norm_backward(&dy, &c.norm2, p, g, l.ln2);
                let dh = self.ffn_backward(&undrop(&dr2, &c.drop2), &c.ffn, l, g) + &dr2;
                let dr1 = norm_backward(&dh, &c.norm1, p, g, l.ln1);
                self.attention_backward(&undrop(&dr1, &c.drop1), &c.attn, l, g) + &dr1
            }
            NormStyle::Pre => {
                let du2 = self.ffn_backward(&undrop(&dy, &c.drop2), &c.ffn, l, g);
                let dh = norm_backward(&du2, &c.norm2, p, g, l.ln2) + &dy;
                let du = self.attention_backward(&undrop(&dh, &c.drop1), &c.attn, l, g);
                norm_backward(&du, &c.norm1, p, g, l.ln1) + &dh
            }
        }
    }

    /// Evaluation-mode forward pass: hidden states `[n × hidden_dim]`.
    pub fn encode(&self, ids: &[u32]) -> Result<Array2<f64>> {
        self.forward::<rand::rngs::mock::StepRng>(ids, None).map(|(h, _)| h)
    }

    /// Forward pass recording everything needed by [`Encoder::backward`].
    /// Dropout is active only when `rng` is given.
    pub fn forward<R: Rng>(&self, ids: &[u32], mut rng: Option<&mut R>) -> Result<(Array2<f64>, ForwardCache)> {
        self.check_input(ids)?;
        let mut x = self.embed(ids);
        let mut layers = Vec::with_capacity(self.layout.layers.len());
        for l in &self.layout.layers {
            let (y, cache) = self.layer_forward(x, l, &mut rng);
            layers.push(cache);
            x = y;
        }
        let final_norm = match self.layout.final_norm {
            Some(ix) => {
                let (y, c) = norm_forward(&x, &self.params, ix);
                x = y;
                Some(c)
            }
            None => None,
        };
        Ok((x, ForwardCache { ids: ids.to_vec(), layers, final_norm }))
    }

    /// Propagate `dhidden` back to every encoder parameter, adding into `g`.
    pub fn backward(&self, cache: &ForwardCache, dhidden: Array2<f64>, g: &mut ParamSet) {
        let mut dx = dhidden;
        if let (Some(ix), Some(c)) = (self.layout.final_norm, &cache.final_norm) {
            dx = norm_backward(&dx, c, &self.params, g, ix);
        }
        for (l, c) in self.layout.layers.iter().zip(&cache.layers).rev() {
            dx = self.layer_backward(dx, c, l, g);
        }
        let tok = g.get_mut(self.layout.token_embedding);
        for (i, &id) in cache.ids.iter().enumerate() {
            let mut row = tok.row_mut(id as usize);
            row += &dx.row(i);
        }
        let pos = g.get_mut(self.layout.position_embedding);
        let n = cache.ids.len();
        let mut rows = pos.slice_mut(s![0..n, ..]);
        rows += &dx;
    }

    pub fn param_count(&self) -> usize {
        self.params.num_scalars()
    }
}
