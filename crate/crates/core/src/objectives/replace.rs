use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoded::{EncodedDoc, Edit};
use super::sampling::MaskDecision;
use crate::annotate::{Relation, SignalLexicon, Span, SpanKind};
use crate::corpus::EntityCalendar;
use crate::error::{Error, Result};
use crate::model::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReplacementLabel {
    Replaced,
    NotReplaced,
}

impl ReplacementLabel {
    pub fn class_index(self) -> usize {
        match self {
            ReplacementLabel::NotReplaced => 0,
            ReplacementLabel::Replaced => 1,
        }
    }
}

/// Outcome for one person or signal span after a replacement pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacementDecision {
    /// Index into `EncodedDoc::spans` after all edits of this pass.
    pub span_index: usize,
    pub original_surface: String,
    pub label: ReplacementLabel,
    pub replacement_surface: Option<String>,
}

/// Shift mask positions through an edit.
fn remap_decisions(decisions: &mut [MaskDecision], edit: &Edit) {
    for d in decisions.iter_mut() {
        d.position = edit.remap(d.position).expect("replaced spans never contain sampled positions");
    }
}

/// Spans of `kind` none of whose pieces are sampled, identified by their
/// stable word start (indices shift as edits happen).
fn unsampled_spans(doc: &EncodedDoc, kind: SpanKind, decisions: &[MaskDecision]) -> Vec<usize> {
    let sampled: BTreeSet<usize> = decisions.iter().map(|d| d.position).collect();
    doc.spans_of(kind)
        .filter(|(_, s)| !doc.positions(s).any(|p| sampled.contains(&p)))
        .map(|(_, s)| s.token_start)
        .collect()
}

fn find_span(doc: &EncodedDoc, kind: SpanKind, token_start: usize) -> Option<usize> {
    doc.spans.iter().position(|s| s.kind == kind && s.token_start == token_start)
}

/// Replace each unsampled person span, with probability `p_replace`, by a
/// different person from the same month of the entity calendar.
///
/// Spans left with no alternative in their month set are `NotReplaced`.
/// Mask positions in `decisions` are re-mapped through every edit.
pub fn apply_tser<R: Rng>(
    doc: &mut EncodedDoc,
    decisions: &mut [MaskDecision],
    calendar: &EntityCalendar,
    vocab: &Vocabulary,
    p_replace: f64,
    rng: &mut R,
) -> Result<Vec<ReplacementDecision>> {
    let month = doc.timestamp.month_key().expect("document timestamps carry a month");
    let pool = calendar.get(&month).ok_or_else(|| Error::CalendarMiss(month.clone()))?;
    Ok(replace_spans(doc, decisions, SpanKind::Person, vocab, rng, |span, rng| {
        if !rng.gen_bool(p_replace) {
            return None;
        }
        let alternatives: Vec<&String> = pool.iter().filter(|s| **s != span.surface).collect();
        if alternatives.is_empty() {
            return None;
        }
        Some((alternatives[rng.gen_range(0..alternatives.len())].clone(), None))
    }))
}

/// Replace each unsampled signal, with probability `p_replace`, by a lexicon
/// entry of a different relation class.
pub fn apply_trwr<R: Rng>(
    doc: &mut EncodedDoc,
    decisions: &mut [MaskDecision],
    lexicon: &SignalLexicon,
    vocab: &Vocabulary,
    p_replace: f64,
    rng: &mut R,
) -> Vec<ReplacementDecision> {
    replace_spans(doc, decisions, SpanKind::TemporalSignal, vocab, rng, |span, rng| {
        if !rng.gen_bool(p_replace) {
            return None;
        }
        let relation = span.relation.expect("signal spans carry a relation");
        let alternatives: Vec<_> = lexicon.alternatives(relation).collect();
        if alternatives.is_empty() {
            return None;
        }
        let entry = alternatives[rng.gen_range(0..alternatives.len())];
        Some((match_case(&span.surface, &entry.phrase), Some(entry.relation)))
    })
}

/// Shared replacement pass. `pick` decides, per eligible span, whether and
/// with what surface (and relation) to replace it.
fn replace_spans<R, F>(
    doc: &mut EncodedDoc,
    decisions: &mut [MaskDecision],
    kind: SpanKind,
    vocab: &Vocabulary,
    rng: &mut R,
    mut pick: F,
) -> Vec<ReplacementDecision>
where
    R: Rng,
    F: FnMut(&Span, &mut R) -> Option<(String, Option<Relation>)>,
{
    let mut starts = unsampled_spans(doc, kind, decisions);
    let mut out = Vec::with_capacity(starts.len());
    for k in 0..starts.len() {
        let idx = find_span(doc, kind, starts[k]).expect("eligible span survives earlier edits");
        let span = doc.spans[idx].clone();
        let choice = pick(&span, rng);
        let label = if choice.is_some() { ReplacementLabel::Replaced } else { ReplacementLabel::NotReplaced };
        let mut replacement_surface = None;
        if let Some((surface, relation)) = choice {
            let (edit, new_idx) = doc.replace_span(idx, &surface, vocab);
            if relation.is_some() {
                doc.spans[new_idx].relation = relation;
            }
            remap_decisions(decisions, &edit);
            let delta = doc.spans[new_idx].len() as isize - span.len() as isize;
            for later in starts.iter_mut().skip(k + 1) {
                *later = (*later as isize + delta) as usize;
            }
            replacement_surface = Some(surface);
        }
        out.push(ReplacementDecision { span_index: usize::MAX, original_surface: span.surface, label, replacement_surface });
    }
    for (d, &start) in out.iter_mut().zip(&starts) {
        d.span_index = find_span(doc, kind, start).expect("replaced spans are kept");
    }
    out
}

fn match_case(template: &str, phrase: &str) -> String {
    if template.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = phrase.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        phrase.to_string()
    }
}
