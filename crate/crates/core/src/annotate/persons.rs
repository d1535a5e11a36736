use serde::{Deserialize, Serialize};

use super::tokenize::Token;
use super::{Span, SpanKind};
use crate::error::{Error, Result};

/// A person mention supplied by an external recognizer, in character offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalPerson {
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PersonMode {
    External(Vec<ExternalPerson>),
    Heuristic,
}

const HONORIFICS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "sen", "rep", "gov", "prof", "gen", "rev", "sgt", "lt", "col",
    "capt", "judge", "justice", "president", "senator", "governor", "mayor",
];

/// Capitalized words that do not start or continue a name.
const STOPWORDS: &[&str] = &[
    "the", "a", "an", "in", "on", "at", "by", "for", "from", "to", "of", "and", "or", "but",
    "before", "after", "during", "since", "until", "following", "prior", "then", "when", "while",
    "this", "that", "these", "those", "he", "she", "it", "they", "we", "i", "you", "his", "her",
    "their", "our", "its", "as", "with", "without", "is", "was", "were", "are", "if", "so", "yet",
    "not", "no", "yes", "there", "here", "what", "who", "how", "why", "where", "january",
    "february", "march", "april", "may", "june", "july", "august", "september", "october",
    "november", "december", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday", "today", "yesterday", "tomorrow", "early", "late", "mid", "last", "next",
];

fn is_name_word(tok: &Token) -> bool {
    let mut chars = tok.text.chars();
    let first_upper = chars.next().is_some_and(char::is_uppercase);
    first_upper
        && tok.text.chars().all(|c| c.is_alphabetic() || matches!(c, '.' | '-' | '\'' | '\u{2019}'))
        && !STOPWORDS.contains(&tok.text.to_lowercase().as_str())
}

fn is_honorific(tok: &Token) -> bool {
    tok.text.chars().next().is_some_and(char::is_uppercase)
        && HONORIFICS.contains(&tok.text.to_lowercase().as_str())
}

fn person_span(tokens: &[Token], start: usize, end: usize) -> Span {
    Span {
        kind: SpanKind::Person,
        token_start: start,
        token_end: end,
        surface: super::surface_of(tokens, start, end),
        relation: None,
        normalized: None,
    }
}

/// Honorific plus names (`Mr. Smith`), or two or more consecutive capitalized
/// name words (`Tupac Shakur`). Tokens flagged in `blocked` never join a name.
fn heuristic_persons(tokens: &[Token], blocked: &[bool]) -> Vec<Span> {
    let usable = |i: usize| i < tokens.len() && !blocked[i];
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !usable(i) {
            i += 1;
            continue;
        }
        if is_honorific(&tokens[i]) {
            let mut j = i + 1;
            if usable(j) && tokens[j].text == "." && tokens[j].char_start == tokens[i].char_end {
                j += 1;
            }
            let names_start = j;
            while usable(j) && j - names_start < 3 && is_name_word(&tokens[j]) {
                j += 1;
            }
            if j > names_start {
                spans.push(person_span(tokens, i, j));
                i = j;
                continue;
            }
        }
        if is_name_word(&tokens[i]) && !is_honorific(&tokens[i]) {
            let mut j = i + 1;
            while usable(j) && is_name_word(&tokens[j]) {
                j += 1;
            }
            if j - i >= 2 {
                spans.push(person_span(tokens, i, j));
                i = j;
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// Snap character-offset mentions onto covering tokens; later mentions that
/// overlap an earlier one are dropped.
fn external_persons(tokens: &[Token], text_chars: usize, mentions: &[ExternalPerson]) -> Result<Vec<Span>> {
    let mut sorted: Vec<&ExternalPerson> = mentions.iter().collect();
    sorted.sort_by_key(|m| (m.char_start, m.char_end));
    let mut spans: Vec<Span> = Vec::new();
    for m in sorted {
        if m.char_start >= m.char_end || m.char_end > text_chars {
            return Err(Error::AnnotationAlignment { start: m.char_start, end: m.char_end, len: text_chars });
        }
        let covering: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.char_start < m.char_end && t.char_end > m.char_start)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (covering.first(), covering.last()) else { continue };
        if spans.last().is_some_and(|prev| prev.token_end > first) {
            continue;
        }
        spans.push(person_span(tokens, first, last + 1));
    }
    Ok(spans)
}

/// Person spans aligned to token boundaries.
///
/// `blocked` marks tokens the heuristic must not use (temporal expressions);
/// external mentions are taken as given.
pub fn annotate_persons(
    tokens: &[Token],
    text_chars: usize,
    mode: &PersonMode,
    blocked: &[bool],
) -> Result<Vec<Span>> {
    match mode {
        PersonMode::External(mentions) => external_persons(tokens, text_chars, mentions),
        PersonMode::Heuristic => Ok(heuristic_persons(tokens, blocked)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::tokenize_raw;

    fn heuristic(s: &str) -> Vec<String> {
        let toks = tokenize_raw(s);
        let blocked = vec![false; toks.len()];
        annotate_persons(&toks, s.chars().count(), &PersonMode::Heuristic, &blocked)
            .unwrap()
            .into_iter()
            .map(|sp| sp.surface)
            .collect()
    }

    #[test]
    fn honorific_names() {
        assert_eq!(heuristic("Mr. Smith said"), ["Mr. Smith"]);
        assert_eq!(heuristic("yesterday Dr. Ruth Westheimer spoke"), ["Dr. Ruth Westheimer"]);
    }

    #[test]
    fn capitalized_runs() {
        assert_eq!(heuristic("fans of Tupac Shakur and the Notorious B.I.G. mourned"), [
            "Tupac Shakur",
            "Notorious B.I.G"
        ]);
        assert!(heuristic("The Smith family").is_empty());
        assert!(heuristic("In March Smith left").is_empty());
    }

    #[test]
    fn lowercase_text_has_no_persons() {
        assert!(heuristic("no names are mentioned here at all").is_empty());
    }

    #[test]
    fn external_mentions_snap_to_tokens() {
        let text = "Rappers like Tupac Shakur died.";
        let toks = tokenize_raw(text);
        let mode = PersonMode::External(vec![ExternalPerson {
            char_start: 13,
            char_end: 20,
            surface: "Tupac S".into(),
        }]);
        let spans = annotate_persons(&toks, text.chars().count(), &mode, &[]).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].surface, "Tupac Shakur");
        assert_eq!((spans[0].token_start, spans[0].token_end), (2, 4));
    }

    #[test]
    fn external_out_of_bounds_is_an_error() {
        let toks = tokenize_raw("short");
        let mode = PersonMode::External(vec![ExternalPerson { char_start: 3, char_end: 40, surface: "x".into() }]);
        assert!(matches!(annotate_persons(&toks, 5, &mode, &[]), Err(Error::AnnotationAlignment { .. })));
    }

    #[test]
    fn overlapping_external_mentions_keep_first() {
        let text = "Tupac Shakur sang";
        let toks = tokenize_raw(text);
        let mode = PersonMode::External(vec![
            ExternalPerson { char_start: 0, char_end: 12, surface: "Tupac Shakur".into() },
            ExternalPerson { char_start: 6, char_end: 12, surface: "Shakur".into() },
        ]);
        let spans = annotate_persons(&toks, text.chars().count(), &mode, &[]).unwrap();
        assert_eq!(spans.len(), 1);
    }
}
