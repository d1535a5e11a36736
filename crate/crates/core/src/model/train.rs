use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::encoder::Encoder;
use super::heads::{LossBreakdown, Sample};
use super::optim::{train_step, AdamW, AdamWConfig};
use crate::annotate::AnnotatedDocument;
use crate::error::{Error, Result};
use crate::objectives::{build_examples, ExampleContext, ObjectiveSet};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub steps: u64,
    pub batch_size: usize,
    pub accumulation_steps: usize,
    pub optimizer: AdamWConfig,
    pub max_grad_norm: Option<f64>,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            steps: 100,
            batch_size: 8,
            accumulation_steps: 8,
            optimizer: AdamWConfig::default(),
            max_grad_norm: Some(1.0),
            seed: 0,
        }
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: u64,
    pub epoch: u64,
    pub loss: f64,
    pub parts: LossBreakdown,
}

/// Yields shuffled batches, regenerating (re-masking) examples every epoch.
struct EpochFeeder<'a> {
    docs: &'a [AnnotatedDocument],
    objectives: &'a ObjectiveSet,
    ctx: &'a ExampleContext<'a>,
    seed: u64,
    epoch: u64,
    pending: Vec<Sample>,
}

impl EpochFeeder<'_> {
    fn refill(&mut self) -> Result<()> {
        let examples = build_examples(self.docs, self.objectives, self.ctx, self.seed, self.epoch)?;
        let mut samples: Vec<Sample> = examples.iter().map(Sample::from).collect();
        samples.shuffle(&mut keyed_rng(self.seed, &[b"order", &self.epoch.to_le_bytes()]));
        samples.reverse();
        self.pending = samples;
        Ok(())
    }

    fn next_batch(&mut self, size: usize) -> Result<(u64, Vec<Sample>)> {
        let mut batch = Vec::with_capacity(size);
        let epoch = self.epoch;
        while batch.len() < size {
            if self.pending.is_empty() {
                if !batch.is_empty() {
                    break;
                }
                if self.epoch > epoch || self.docs.is_empty() {
                    return Err(Error::Config("no training documents".into()));
                }
                self.epoch += 1;
                self.refill()?;
            }
            batch.extend(self.pending.pop());
        }
        Ok((epoch, batch))
    }
}

/// Joint multi-task pre-training.
///
/// Each optimizer step consumes `batch_size × accumulation_steps` examples;
/// epochs are cut short rather than mixed across a step. `on_step` sees every
/// log line as it is produced.
pub fn pretrain(
    enc: &mut Encoder,
    opt: Option<AdamW>,
    docs: &[AnnotatedDocument],
    objectives: &ObjectiveSet,
    ctx: &ExampleContext,
    cfg: &PretrainConfig,
    mut on_step: impl FnMut(&StepLog),
) -> Result<(AdamW, Vec<StepLog>)> {
    if objectives.is_empty() {
        return Err(Error::Config("pre-training needs at least one objective".into()));
    }
    if docs.is_empty() {
        return Err(Error::Config("no training documents".into()));
    }
    let mut opt = opt.unwrap_or_else(|| AdamW::new(cfg.optimizer, &enc.params));
    let mut feeder = EpochFeeder { docs, objectives, ctx, seed: cfg.seed, epoch: 0, pending: Vec::new() };
    feeder.refill()?;
    let per_step = cfg.batch_size.max(1) * cfg.accumulation_steps.max(1);
    let mut log = Vec::with_capacity(cfg.steps as usize);
    for _ in 0..cfg.steps {
        let (epoch, batch) = feeder.next_batch(per_step)?;
        let step = opt.t;
        let parts = train_step(enc, &mut opt, &batch, cfg.batch_size.max(1), cfg.max_grad_norm, cfg.seed)?;
        let line = StepLog { step, epoch, loss: parts.total(), parts };
        on_step(&line);
        log.push(line);
    }
    Ok((opt, log))
}
