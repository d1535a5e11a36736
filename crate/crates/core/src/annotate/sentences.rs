use super::tokenize::Token;

/// Tokens that end with a period without ending a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "gen", "sen", "rep", "gov", "prof", "rev", "inc",
    "co", "corp", "ltd", "lt", "col", "capt", "sgt", "mt", "vs", "etc", "jan", "feb", "mar",
    "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "a.m", "p.m",
];

fn is_terminal(tok: &Token) -> bool {
    matches!(tok.text.as_str(), "." | "!" | "?")
}

fn is_closer(tok: &Token) -> bool {
    matches!(tok.text.as_str(), "\"" | "'" | ")" | "]" | "\u{201d}" | "\u{2019}")
}

fn starts_sentence(tok: &Token) -> bool {
    tok.text.chars().next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit() || "\"'(\u{201c}".contains(c))
}

fn is_abbreviation(tok: &Token) -> bool {
    let lower = tok.text.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single initials ("J. Smith") and dotted acronyms ("B.I.G.")
    let mut chars = tok.text.chars();
    let single_upper = matches!((chars.next(), chars.next()), (Some(c), None) if c.is_uppercase());
    single_upper || (tok.text.contains('.') && tok.text.chars().all(|c| c.is_alphabetic() || c == '.'))
}

/// Rule-based sentence boundaries as half-open token ranges covering every token.
///
/// A sentence ends at `.`, `!` or `?` (plus trailing closing quotes or
/// brackets) when the next token is capitalized, a digit, an opening quote,
/// or the end of input, unless the period follows an abbreviation.
pub fn split_sentences(tokens: &[Token]) -> Vec<(usize, usize)> {
    let mut bounds = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < tokens.len() {
        if is_terminal(&tokens[i]) {
            let abbreviated = tokens[i].text == "."
                && i > 0
                && tokens[i - 1].char_end == tokens[i].char_start
                && is_abbreviation(&tokens[i - 1]);
            let mut end = i + 1;
            while end < tokens.len() && (is_terminal(&tokens[end]) || is_closer(&tokens[end])) {
                end += 1;
            }
            let boundary = end == tokens.len() || starts_sentence(&tokens[end]);
            if boundary && !abbreviated {
                bounds.push((start, end));
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < tokens.len() {
        bounds.push((start, tokens.len()));
    }
    bounds
}
