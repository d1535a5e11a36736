use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Precision;
use super::encoder::Encoder;
use super::heads::{LossBreakdown, Sample};
use super::params::ParamSet;
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig { lr: 3e-5, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 0.01 }
    }
}

/// Adam with decoupled weight decay and bias-corrected moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW {
    pub config: AdamWConfig,
    pub m: ParamSet,
    pub v: ParamSet,
    pub t: u64,
}

impl AdamW {
    pub fn new(config: AdamWConfig, params: &ParamSet) -> Self {
        AdamW { config, m: params.zeros_like(), v: params.zeros_like(), t: 0 }
    }

    /// `p ← p − lr·(m̂ / (√v̂ + ε)) − lr·λ·p`
    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) {
        let AdamWConfig { lr, beta1, beta2, eps, weight_decay } = self.config;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads.get(i);
            let m = self.m.get_mut(i);
            m.zip_mut_with(g, |m, &g| *m = beta1 * *m + (1.0 - beta1) * g);
            let v = self.v.get_mut(i);
            v.zip_mut_with(g, |v, &g| *v = beta2 * *v + (1.0 - beta2) * g * g);
            let (m, v) = (self.m.get(i), self.v.get(i));
            let p = params.get_mut(i);
            ndarray::Zip::from(p).and(m).and(v).for_each(|p, &m, &v| {
                let update = (m / c1) / ((v / c2).sqrt() + eps);
                *p -= lr * update + lr * weight_decay * *p;
            });
        }
    }
}

/// Mean loss and mean gradient over `samples`.
///
/// Samples are processed in parallel but reduced in input order, so the
/// result does not depend on the thread count. `micro_batch` bounds how many
/// per-sample gradients are alive at once (gradient accumulation).
pub fn batch_gradient(
    enc: &Encoder,
    samples: &[Sample],
    micro_batch: usize,
    dropout_seed: u64,
    step: u64,
) -> Result<(LossBreakdown, ParamSet)> {
    if samples.is_empty() {
        return Err(Error::Config("cannot take a step on an empty batch".into()));
    }
    let n = samples.len() as f64;
    let mut total = enc.params.zeros_like();
    let mut loss = LossBreakdown::default();
    for (c, chunk) in samples.chunks(micro_batch.max(1)).enumerate() {
        let parts: Vec<(LossBreakdown, ParamSet)> = chunk
            .par_iter()
            .enumerate()
            .map(|(k, s)| {
                let idx = (c * micro_batch.max(1) + k) as u64;
                let mut rng = keyed_rng(dropout_seed, &[b"dropout", &step.to_le_bytes(), &idx.to_le_bytes()]);
                enc.loss_and_grad(s, 1.0 / n, Some(&mut rng))
            })
            .collect::<Result<_>>()?;
        for (l, g) in parts {
            loss.add(&l);
            total.add_assign(&g);
        }
    }
    Ok((loss.scaled(1.0 / n), total))
}

/// One optimizer update from `samples`; returns the mean loss before the
/// update. Gradients are clipped to `max_grad_norm` when given.
pub fn train_step(
    enc: &mut Encoder,
    opt: &mut AdamW,
    samples: &[Sample],
    micro_batch: usize,
    max_grad_norm: Option<f64>,
    dropout_seed: u64,
) -> Result<LossBreakdown> {
    let (loss, mut grads) = batch_gradient(enc, samples, micro_batch, dropout_seed, opt.t)?;
    if let Some(max) = max_grad_norm {
        let norm = grads.l2_norm();
        if norm > max {
            grads.scale(max / norm);
        }
    }
    opt.step(&mut enc.params, &grads);
    if enc.config.precision == Precision::F32 {
        enc.params.round_to_f32();
    }
    Ok(loss)
}
