//! Rule-based annotation of raw text: tokens, sentences, temporal
//! expressions, temporal signals and person mentions.

mod persons;
mod sentences;
mod signals;
mod temporal;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use persons::{annotate_persons, ExternalPerson, PersonMode};
pub use sentences::{split_sentences, ABBREVIATIONS};
pub use signals::{tag_temporal_signals, LexiconEntry, Relation, SignalLexicon, DEFAULT_LEXICON};
pub use temporal::tag_temporal_expressions;
pub use tokenize::{char_slice, tokenize_raw, Token};

use crate::error::Result;
use crate::timepoint::{parse_timestamp, TimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpanKind {
    TemporalExpression,
    TemporalSignal,
    Person,
}

/// A typed token range. `relation` is set exactly for signals and
/// `normalized` only ever for expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub kind: SpanKind,
    pub token_start: usize,
    pub token_end: usize,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<TimePoint>,
}

impl Span {
    pub fn len(&self) -> usize {
        self.token_end - self.token_start
    }

    pub fn is_empty(&self) -> bool {
        self.token_end <= self.token_start
    }

    pub fn contains(&self, token: usize) -> bool {
        (self.token_start..self.token_end).contains(&token)
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.token_start < other.token_end && other.token_start < self.token_end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub id: String,
    pub timestamp: TimePoint,
    pub text: String,
    pub tokens: Vec<Token>,
    pub spans: Vec<Span>,
    pub sentence_bounds: Vec<(usize, usize)>,
}

impl AnnotatedDocument {
    pub fn spans_of(&self, kind: SpanKind) -> impl Iterator<Item = &Span> {
        self.spans.iter().filter(move |s| s.kind == kind)
    }
}

/// Rebuild the original spelling of a token range, with a single space
/// wherever the source had any separator.
pub(crate) fn surface_of(tokens: &[Token], start: usize, end: usize) -> String {
    let mut out = String::new();
    for (k, tok) in tokens[start..end].iter().enumerate() {
        if k > 0 && tokens[start + k - 1].char_end < tok.char_start {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

/// Tokenize, split sentences and run all three taggers.
///
/// Spans that cross a sentence boundary are discarded. Spans are ordered by
/// `(token_start, kind)`.
pub fn annotate_document(
    id: &str,
    timestamp_text: &str,
    text: &str,
    persons: &PersonMode,
    lexicon: &SignalLexicon,
) -> Result<AnnotatedDocument> {
    let timestamp = parse_timestamp(timestamp_text)?;
    let tokens = tokenize_raw(text);
    let sentence_bounds = split_sentences(&tokens);
    let expressions = tag_temporal_expressions(&tokens);
    let signals = tag_temporal_signals(&tokens, lexicon, &expressions);
    let mut blocked = vec![false; tokens.len()];
    for s in &expressions {
        blocked[s.token_start..s.token_end].iter_mut().for_each(|b| *b = true);
    }
    let people = annotate_persons(&tokens, text.chars().count(), persons, &blocked)?;

    let mut sentence_of = vec![0usize; tokens.len()];
    for (k, &(a, b)) in sentence_bounds.iter().enumerate() {
        sentence_of[a..b].iter_mut().for_each(|s| *s = k);
    }
    let mut spans: Vec<Span> = expressions
        .into_iter()
        .chain(signals)
        .chain(people)
        .filter(|s| sentence_of[s.token_start] == sentence_of[s.token_end - 1])
        .collect();
    spans.sort_by_key(|s| (s.token_start, s.kind));

    Ok(AnnotatedDocument {
        id: id.to_string(),
        timestamp,
        text: text.to_string(),
        tokens,
        spans,
        sentence_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn annotate(text: &str) -> AnnotatedDocument {
        annotate_document("d", "2007-05-04", text, &PersonMode::Heuristic, &SignalLexicon::default()).unwrap()
    }

    #[test]
    fn composes_taggers() {
        let doc = annotate("Before 2006, he quit.");
        assert_eq!(doc.timestamp.to_string(), "2007-05-04");
        assert_eq!(doc.spans_of(SpanKind::TemporalSignal).count(), 1);
        assert_eq!(doc.spans_of(SpanKind::TemporalExpression).count(), 1);
        assert_eq!(doc.sentence_bounds, vec![(0, 6)]);
    }

    #[test]
    fn empty_text() {
        let doc = annotate("");
        assert!(doc.tokens.is_empty() && doc.spans.is_empty() && doc.sentence_bounds.is_empty());
    }

    #[test]
    fn bad_timestamp() {
        let err = annotate_document("d", "2007-13-01", "x", &PersonMode::Heuristic, &SignalLexicon::default())
            .unwrap_err();
        assert!(matches!(err, Error::TimestampParse(_)));
    }

    #[test]
    fn spans_crossing_sentences_are_dropped() {
        let text = "He met Tupac. Shakur left in 1996.";
        let toks = tokenize_raw(text);
        let mode = PersonMode::External(vec![ExternalPerson { char_start: 7, char_end: 20, surface: String::new() }]);
        let doc = annotate_document("d", "2007-05-04", text, &mode, &SignalLexicon::default()).unwrap();
        assert_eq!(doc.sentence_bounds.len(), 2);
        assert_eq!(doc.spans_of(SpanKind::Person).count(), 0);
        assert_eq!(toks.len(), doc.tokens.len());
    }

    #[test]
    fn surfaces_keep_glued_punctuation() {
        let toks = tokenize_raw("May 4, 2007");
        assert_eq!(surface_of(&toks, 0, toks.len()), "May 4, 2007");
    }
}
