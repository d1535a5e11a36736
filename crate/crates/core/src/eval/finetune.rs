use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{encode_input, LabeledInstance};
use super::metrics::{accuracy, mean_absolute_error, MetricReport};
use crate::error::{Error, Result};
use crate::model::{softmax, train_step, AdamW, AdamWConfig, Encoder, Sample, Supervision, Vocabulary};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneGrid {
    pub batch_sizes: Vec<usize>,
    pub learning_rates: Vec<f64>,
    /// Checkpoints at which validation accuracy is measured; training runs
    /// to the largest value once per (batch size, learning rate).
    pub epochs: Vec<usize>,
}

impl FinetuneGrid {
    /// Batch {16, 32} × lr {2e-5, 5e-5} × epochs {5, 10, 15}.
    pub fn standard() -> Self {
        FinetuneGrid { batch_sizes: vec![16, 32], learning_rates: vec![2e-5, 5e-5], epochs: vec![5, 10, 15] }
    }

    /// Same shape with learning rates suited to small randomly initialized
    /// encoders.
    pub fn desk() -> Self {
        FinetuneGrid { batch_sizes: vec![16, 32], learning_rates: vec![5e-4, 1e-3], epochs: vec![5, 10, 15] }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_sizes.is_empty() || self.learning_rates.is_empty() || self.epochs.is_empty() {
            return Err(Error::Config("fine-tuning grid has an empty axis".into()));
        }
        if self.batch_sizes.contains(&0) || self.epochs.contains(&0) {
            return Err(Error::Config("batch sizes and epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub grid: FinetuneGrid,
    pub weight_decay: f64,
    pub max_grad_norm: Option<f64>,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        FinetuneConfig { grid: FinetuneGrid::standard(), weight_decay: 0.01, max_grad_norm: Some(1.0), max_len: 128, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct FinetuneOutcome {
    pub encoder: Encoder,
    pub best: GridPoint,
    pub trials: Vec<GridPoint>,
}

fn to_samples(vocab: &Vocabulary, data: &[LabeledInstance], max_len: usize) -> Vec<Sample> {
    data.iter()
        .map(|x| Sample {
            ids: encode_input(vocab, &x.text, x.context.as_ref(), max_len),
            targets: Supervision { label: Some(x.gold.index), ..Default::default() },
        })
        .collect()
}

/// Class distribution from the classifier head over position 0.
pub fn class_probabilities(enc: &Encoder, ids: &[u32]) -> Result<Vec<f64>> {
    let hidden = enc.encode(ids)?;
    let out = enc.multitask_heads(&hidden, &Supervision { label: Some(0), ..Default::default() })?;
    let logits = out.classifier.expect("label requested");
    Ok(softmax(logits.as_slice().expect("contiguous logits")))
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

pub fn predict(enc: &Encoder, vocab: &Vocabulary, data: &[LabeledInstance], max_len: usize) -> Result<Vec<usize>> {
    data.par_iter()
        .map(|x| class_probabilities(enc, &encode_input(vocab, &x.text, x.context.as_ref(), max_len)).map(|p| argmax(&p)))
        .collect()
}

/// ACC and MAE of the classifier on `data`.
pub fn evaluate_classifier(enc: &Encoder, vocab: &Vocabulary, data: &[LabeledInstance], max_len: usize) -> Result<MetricReport> {
    let preds = predict(enc, vocab, data, max_len)?;
    let golds: Vec<usize> = data.iter().map(|x| x.gold.index).collect();
    Ok(MetricReport { acc: accuracy(&preds, &golds)?, mae: mean_absolute_error(&preds, &golds)?, ..Default::default() })
}

/// Train a `classes`-way classifier on top of `base` for every grid point
/// and keep the one with the best validation accuracy (earliest grid point
/// on ties). Without validation data, training accuracy is used.
pub fn finetune_classifier(
    base: &Encoder,
    vocab: &Vocabulary,
    train: &[LabeledInstance],
    val: &[LabeledInstance],
    classes: usize,
    cfg: &FinetuneConfig,
) -> Result<FinetuneOutcome> {
    if train.is_empty() {
        return Err(Error::Config("fine-tuning needs training instances".into()));
    }
    cfg.grid.validate()?;
    if let Some(x) = train.iter().chain(val).find(|x| x.gold.index >= classes) {
        return Err(Error::OutOfSpan(format!("gold class {} of {classes}", x.gold.index)));
    }
    let max_len = cfg.max_len.min(base.config.max_len);
    let samples = to_samples(vocab, train, max_len);
    let selection = if val.is_empty() { train } else { val };
    let mut epochs = cfg.grid.epochs.clone();
    epochs.sort_unstable();
    epochs.dedup();
    let last = *epochs.last().expect("validated non-empty");

    let mut trials = Vec::new();
    let mut best: Option<(GridPoint, Encoder)> = None;
    for &batch_size in &cfg.grid.batch_sizes {
        for &lr in &cfg.grid.learning_rates {
            let mut enc = base.with_classifier(classes)?;
            let mut opt = AdamW::new(AdamWConfig { lr, weight_decay: cfg.weight_decay, ..Default::default() }, &enc.params);
            let mut order: Vec<usize> = (0..samples.len()).collect();
            for epoch in 1..=last {
                let key = [b"finetune".as_slice(), &batch_size.to_le_bytes(), &lr.to_bits().to_le_bytes(), &epoch.to_le_bytes()];
                order.shuffle(&mut keyed_rng(cfg.seed, &key));
                for chunk in order.chunks(batch_size) {
                    let batch: Vec<Sample> = chunk.iter().map(|&i| samples[i].clone()).collect();
                    train_step(&mut enc, &mut opt, &batch, batch_size, cfg.max_grad_norm, cfg.seed)?;
                }
                if epochs.contains(&epoch) {
                    let val_acc = evaluate_classifier(&enc, vocab, selection, max_len)?.acc;
                    let point = GridPoint { batch_size, learning_rate: lr, epochs: epoch, val_acc };
                    trials.push(point);
                    if best.as_ref().map_or(true, |(b, _)| val_acc > b.val_acc) {
                        best = Some((point, enc.clone()));
                    }
                }
            }
        }
    }
    let (best, encoder) = best.expect("grid has at least one point");
    Ok(FinetuneOutcome { encoder, best, trials })
}
