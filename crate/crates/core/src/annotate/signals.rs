use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::Token;
use super::{Span, SpanKind};
use crate::error::{Error, Result};

/// Temporal relation class of a signal word or phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Relation {
    Before,
    After,
    Overlap,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Before, Relation::After, Relation::Overlap];
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "BEFORE" => Ok(Relation::Before),
            "AFTER" => Ok(Relation::After),
            "OVERLAP" => Ok(Relation::Overlap),
            other => Err(Error::Config(format!("unknown relation class {other:?}"))),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Before => "BEFORE",
            Relation::After => "AFTER",
            Relation::Overlap => "OVERLAP",
        })
    }
}

pub const DEFAULT_LEXICON: &str = "\
# tempo signal lexicon v1
before\tBEFORE
prior to\tBEFORE
until\tBEFORE
by\tBEFORE
after\tAFTER
following\tAFTER
since\tAFTER
from\tAFTER
during\tOVERLAP
in\tOVERLAP
on\tOVERLAP
at\tOVERLAP
throughout\tOVERLAP
amid\tOVERLAP
";

/// Signals that only count when a temporal expression follows immediately.
const CONTEXT_BOUND: &[&str] = &["in"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub phrase: String,
    pub words: Vec<String>,
    pub relation: Relation,
}

/// Temporal-signal lexicon: lowercase phrases with their relation class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalLexicon {
    entries: Vec<LexiconEntry>,
}

fn normalize_phrase(phrase: &str) -> String {
    phrase.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

impl SignalLexicon {
    /// Parse `phrase<TAB>CLASS` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<LexiconEntry> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let (phrase, class) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: n + 1,
                message: "expected phrase<TAB>CLASS".into(),
            })?;
            let relation = class
                .parse()
                .map_err(|e: Error| Error::Parse { line: n + 1, message: e.to_string() })?;
            let phrase = normalize_phrase(phrase);
            if phrase.is_empty() {
                return Err(Error::Parse { line: n + 1, message: "empty phrase".into() });
            }
            let words = phrase.split(' ').map(str::to_string).collect();
            entries.retain(|e| e.phrase != phrase);
            entries.push(LexiconEntry { phrase, words, relation });
        }
        Ok(SignalLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn classify(&self, phrase: &str) -> Result<Relation> {
        let key = normalize_phrase(phrase);
        self.entries
            .iter()
            .find(|e| e.phrase == key)
            .map(|e| e.relation)
            .ok_or(Error::NotInLexicon(phrase.to_string()))
    }

    /// Entries whose class differs from `relation`, in lexicon order.
    pub fn alternatives(&self, relation: Relation) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.iter().filter(move |e| e.relation != relation)
    }

    fn longest_match(&self, lower: &[String], at: usize) -> Option<&LexiconEntry> {
        self.entries
            .iter()
            .filter(|e| {
                at + e.words.len() <= lower.len()
                    && e.words.iter().zip(&lower[at..]).all(|(w, t)| w == t)
            })
            .max_by_key(|e| e.words.len())
    }
}

impl Default for SignalLexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("default lexicon is well formed")
    }
}

/// Tag signal spans, skipping anything inside a temporal expression.
///
/// Matching is case-insensitive, greedy left to right, longest entry first.
pub fn tag_temporal_signals(tokens: &[Token], lexicon: &SignalLexicon, expressions: &[Span]) -> Vec<Span> {
    let lower: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
    let mut in_expr = vec![false; tokens.len()];
    let mut expr_start = vec![false; tokens.len() + 1];
    for e in expressions {
        in_expr[e.token_start..e.token_end].iter_mut().for_each(|f| *f = true);
        expr_start[e.token_start] = true;
    }
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let Some(entry) = lexicon.longest_match(&lower, i) else {
            i += 1;
            continue;
        };
        let end = i + entry.words.len();
        let inside = in_expr[i..end].iter().any(|&f| f);
        let context_ok = !CONTEXT_BOUND.contains(&entry.phrase.as_str()) || expr_start[end];
        if inside || !context_ok {
            i += 1;
            continue;
        }
        spans.push(Span {
            kind: SpanKind::TemporalSignal,
            token_start: i,
            token_end: end,
            surface: super::surface_of(tokens, i, end),
            relation: Some(entry.relation),
            normalized: None,
        });
        i = end;
    }
    spans
}
