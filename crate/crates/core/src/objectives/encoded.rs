use std::ops::Range;

use crate::annotate::{tokenize_raw, AnnotatedDocument, Span, SpanKind};
use crate::model::Vocabulary;
use crate::timepoint::TimePoint;

/// A document as subword pieces per word, framed as `[CLS] pieces.. [SEP]`.
///
/// Spans keep word-level indices; [`EncodedDoc::positions`] maps them to
/// sequence positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDoc {
    pub doc_id: String,
    pub timestamp: TimePoint,
    pub words: Vec<String>,
    pub pieces: Vec<Vec<u32>>,
    pub spans: Vec<Span>,
    cls: u32,
    sep: u32,
}

impl EncodedDoc {
    /// Encode a document, keeping only whole words that fit in `max_len`
    /// together with `[CLS]` and `[SEP]`. Spans cut by the limit are dropped.
    pub fn new(doc: &AnnotatedDocument, vocab: &Vocabulary, max_len: usize) -> Self {
        let budget = max_len.saturating_sub(2);
        let mut used = 0;
        let mut words = Vec::new();
        let mut pieces = Vec::new();
        for tok in &doc.tokens {
            let ids = vocab.encode_word(&tok.text);
            if used + ids.len() > budget {
                break;
            }
            used += ids.len();
            words.push(tok.text.clone());
            pieces.push(ids);
        }
        let kept = words.len();
        let spans = doc.spans.iter().filter(|s| s.token_end <= kept).cloned().collect();
        let special = vocab.special();
        EncodedDoc {
            doc_id: doc.id.clone(),
            timestamp: doc.timestamp,
            words,
            pieces,
            spans,
            cls: special.cls,
            sep: special.sep,
        }
    }

    /// Number of content pieces (excluding `[CLS]` and `[SEP]`).
    pub fn content_len(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    /// Sequence position of each word's first piece, plus one past the last piece.
    pub fn word_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.pieces.len() + 1);
        let mut pos = 1;
        for p in &self.pieces {
            offsets.push(pos);
            pos += p.len();
        }
        offsets.push(pos);
        offsets
    }

    pub fn positions(&self, span: &Span) -> Range<usize> {
        let offsets = self.word_offsets();
        offsets[span.token_start]..offsets[span.token_end]
    }

    pub fn spans_of(&self, kind: SpanKind) -> impl Iterator<Item = (usize, &Span)> {
        self.spans.iter().enumerate().filter(move |(_, s)| s.kind == kind)
    }

    pub fn ids(&self) -> Vec<u32> {
        let mut ids = Vec::with_capacity(self.content_len() + 2);
        ids.push(self.cls);
        for p in &self.pieces {
            ids.extend_from_slice(p);
        }
        ids.push(self.sep);
        ids
    }

    /// Replace span `span_index` with `surface`, re-tokenized and re-encoded.
    ///
    /// Returns `(first position, old piece count, new piece count)`. Other
    /// spans after the edit are shifted; spans partially overlapping it are
    /// removed, so indices of later spans may change. Use the returned
    /// index of the replaced span.
    pub fn replace_span(&mut self, span_index: usize, surface: &str, vocab: &Vocabulary) -> (Edit, usize) {
        let target = self.spans[span_index].clone();
        let range = self.positions(&target);
        let new_words: Vec<String> = tokenize_raw(surface).into_iter().map(|t| t.text).collect();
        let new_pieces: Vec<Vec<u32>> = new_words.iter().map(|w| vocab.encode_word(w)).collect();
        let new_len: usize = new_pieces.iter().map(Vec::len).sum();
        let word_delta = new_words.len() as isize - target.len() as isize;

        self.words.splice(target.token_start..target.token_end, new_words);
        self.pieces.splice(target.token_start..target.token_end, new_pieces);

        let mut kept = Vec::with_capacity(self.spans.len());
        let mut new_index = 0;
        for (i, mut s) in std::mem::take(&mut self.spans).into_iter().enumerate() {
            if i == span_index {
                s.token_end = (s.token_end as isize + word_delta) as usize;
                s.surface = surface.to_string();
                new_index = kept.len();
                kept.push(s);
            } else if s.token_end <= target.token_start {
                kept.push(s);
            } else if s.token_start >= target.token_end {
                s.token_start = (s.token_start as isize + word_delta) as usize;
                s.token_end = (s.token_end as isize + word_delta) as usize;
                kept.push(s);
            }
        }
        self.spans = kept;
        (Edit { start: range.start, old_len: range.len(), new_len }, new_index)
    }
}

/// A splice of the piece sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edit {
    pub start: usize,
    pub old_len: usize,
    pub new_len: usize,
}

impl Edit {
    /// New position of an untouched position; `None` inside the edited range.
    pub fn remap(&self, pos: usize) -> Option<usize> {
        if pos < self.start {
            Some(pos)
        } else if pos >= self.start + self.old_len {
            Some(pos + self.new_len - self.old_len)
        } else {
            None
        }
    }
}
