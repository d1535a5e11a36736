use rayon::prelude::*;

use super::metrics::{pearson, spearman};
use crate::annotate::tokenize_raw;
use crate::error::{Error, Result};
use crate::model::{Encoder, Vocabulary};

/// Mean contextual state of `word` over its occurrences in `sentences`
/// (each occurrence is the mean of its subword states); `None` if it never
/// occurs. Matching is case-insensitive on whole words.
pub fn word_representation(
    enc: &Encoder,
    vocab: &Vocabulary,
    word: &str,
    sentences: &[String],
    max_len: usize,
) -> Result<Option<Vec<f64>>> {
    let target = word.to_lowercase();
    let max_len = max_len.min(enc.config.max_len);
    let per_sentence: Vec<Option<(Vec<f64>, usize)>> = sentences
        .par_iter()
        .map(|s| -> Result<Option<(Vec<f64>, usize)>> {
            let sp = vocab.special();
            let mut ids = vec![sp.cls];
            let mut hits = Vec::new();
            for tok in tokenize_raw(s) {
                let pieces = vocab.encode_word(&tok.text);
                if ids.len() + pieces.len() + 1 > max_len {
                    break;
                }
                if tok.text.to_lowercase() == target {
                    hits.push(ids.len()..ids.len() + pieces.len());
                }
                ids.extend(pieces);
            }
            ids.push(sp.sep);
            if hits.is_empty() {
                return Ok(None);
            }
            let hidden = enc.encode(&ids)?;
            let mut sum = vec![0.0; hidden.ncols()];
            for r in &hits {
                for p in r.clone() {
                    for (s, h) in sum.iter_mut().zip(hidden.row(p)) {
                        *s += h / r.len() as f64;
                    }
                }
            }
            Ok(Some((sum, hits.len())))
        })
        .collect::<Result<_>>()?;
    let mut total: Option<Vec<f64>> = None;
    let mut count = 0usize;
    for (sum, n) in per_sentence.into_iter().flatten() {
        count += n;
        match &mut total {
            Some(t) => t.iter_mut().zip(&sum).for_each(|(a, b)| *a += b),
            None => total = Some(sum),
        }
    }
    Ok(total.map(|t| t.into_iter().map(|x| x / count as f64).collect()))
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// `1 − cos(rep_t1, rep_t2)`, in `[0, 2]`.
pub fn semantic_change_score(
    enc: &Encoder,
    vocab: &Vocabulary,
    word: &str,
    sentences_t1: &[String],
    sentences_t2: &[String],
    max_len: usize,
) -> Result<f64> {
    let missing = |period: usize| Error::MissingOccurrences { word: word.to_string(), period };
    let a = word_representation(enc, vocab, word, sentences_t1, max_len)?.ok_or_else(|| missing(1))?;
    let b = word_representation(enc, vocab, word, sentences_t2, max_len)?.ok_or_else(|| missing(2))?;
    Ok(1.0 - cosine(&a, &b))
}

/// Pearson and Spearman correlation of predicted scores with gold shifts.
pub fn correlate_with_gold(scores: &[f64], gold: &[f64]) -> Result<(f64, f64)> {
    Ok((pearson(scores, gold)?, spearman(scores, gold)?))
}
