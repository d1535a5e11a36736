use rayon::prelude::*;

use super::dataset::encode_input;
use super::semantic::cosine;
use crate::error::{Error, Result};
use crate::model::{Encoder, Vocabulary};
use crate::timepoint::TimePoint;

/// Position-0 state of `text` as a standalone input.
pub fn cls_state(enc: &Encoder, vocab: &Vocabulary, text: &str, max_len: usize) -> Result<Vec<f64>> {
    let ids = encode_input(vocab, text, None, max_len.min(enc.config.max_len));
    Ok(enc.encode(&ids)?.row(0).to_vec())
}

/// Candidates by descending cosine similarity to `query`; ties keep the
/// earlier candidate first.
pub fn rank_by_cosine(query: &[f64], candidates: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = candidates.iter().map(|c| cosine(query, c)).enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Rank every candidate time by similarity to the event description; the
/// first entry is the estimate.
pub fn zero_shot_similarity(
    enc: &Encoder,
    vocab: &Vocabulary,
    event_text: &str,
    candidates: &[TimePoint],
    max_len: usize,
) -> Result<Vec<(TimePoint, f64)>> {
    if candidates.is_empty() {
        return Err(Error::Config("empty time vocabulary".into()));
    }
    let query = cls_state(enc, vocab, event_text, max_len)?;
    let states: Vec<Vec<f64>> =
        candidates.par_iter().map(|t| cls_state(enc, vocab, &t.to_string(), max_len)).collect::<Result<_>>()?;
    Ok(rank_by_cosine(&query, &states).into_iter().map(|(i, s)| (candidates[i].clone(), s)).collect())
}

/// Years `first..=last` as year points.
pub fn year_vocabulary(first: i32, last: i32) -> Vec<TimePoint> {
    (first..=last).map(TimePoint::year).collect()
}
