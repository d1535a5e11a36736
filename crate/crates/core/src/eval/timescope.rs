use super::dataset::{encode_input, Context};
use super::finetune::class_probabilities;
use crate::corpus::{CorpusSpan, TimeLabel};
use crate::error::{Error, Result};
use crate::model::{Encoder, Vocabulary};
use crate::timepoint::{Granularity, TimePoint};

/// The two most probable classes in chronological order. Equal
/// probabilities favor the earlier class; a runner-up with zero
/// probability collapses the scope to a single class.
pub fn scope_indices(probs: &[f64]) -> Result<(usize, usize)> {
    if probs.len() < 2 {
        return Err(Error::Config("time scope needs at least two classes".into()));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let (first, second) = (order[0], order[1]);
    if probs[second] <= 0.0 {
        return Ok((first, first));
    }
    Ok((first.min(second), first.max(second)))
}

/// Scope over month classes of `span`.
pub fn scope_from_probabilities(probs: &[f64], span: &CorpusSpan) -> Result<(TimePoint, TimePoint)> {
    let (a, b) = scope_indices(probs)?;
    let at = |index| span.label_to_timepoint(TimeLabel { granularity: Granularity::Month, index });
    Ok((at(a)?, at(b)?))
}

/// Estimate a `(start, end)` month scope for a question (plus optional
/// retrieved document) with a month-level fine-tuned classifier.
pub fn estimate_time_scope(
    enc: &Encoder,
    vocab: &Vocabulary,
    question: &str,
    context: Option<&Context>,
    span: &CorpusSpan,
    max_len: usize,
) -> Result<(TimePoint, TimePoint)> {
    let ids = encode_input(vocab, question, context, max_len.min(enc.config.max_len));
    let probs = class_probabilities(enc, &ids)?;
    if probs.len() != span.class_count(Granularity::Month) {
        return Err(Error::Config(format!(
            "classifier has {} classes but the span has {} months",
            probs.len(),
            span.class_count(Granularity::Month)
        )));
    }
    scope_from_probabilities(&probs, span)
}
