use serde::{Deserialize, Serialize};

/// A surface token with character (not byte) offsets into its source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

fn is_connector(c: char) -> bool {
    matches!(c, '-' | '/' | '.' | '\'' | '\u{2019}' | ':')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Split text into word and punctuation tokens.
///
/// A word is a run of alphanumerics, possibly joined by `- / . ' :` when the
/// connector sits between two alphanumerics (`2007-05-04`, `mid-1990s`,
/// `B.I.G`, `don't`). An apostrophe directly before a digit opens a word
/// (`'90s`). Every other non-space character is a token of its own.
pub fn tokenize_raw(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let opens_word = c.is_alphanumeric()
            || (is_apostrophe(c) && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit()));
        let start = i;
        if opens_word {
            i += 1;
            while i < chars.len() {
                let cur = chars[i];
                if cur.is_alphanumeric() {
                    i += 1;
                } else if is_connector(cur)
                    && chars[i - 1].is_alphanumeric()
                    && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
                {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        tokens.push(Token { text: chars[start..i].iter().collect(), char_start: start, char_end: i });
    }
    tokens
}

/// Text of `text` between two character offsets.
pub fn char_slice(text: &str, char_start: usize, char_end: usize) -> String {
    text.chars().skip(char_start).take(char_end.saturating_sub(char_start)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<String> {
        tokenize_raw(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn empty_input() {
        assert!(tokenize_raw("").is_empty());
        assert!(tokenize_raw("  \n\t").is_empty());
    }

    #[test]
    fn punctuation_is_split() {
        assert_eq!(texts("Before 2006, he quit."), ["Before", "2006", ",", "he", "quit", "."]);
        assert_eq!(texts("the 1990s"), ["the", "1990s"]);
        assert_eq!(texts("Mr. Smith said"), ["Mr", ".", "Smith", "said"]);
    }

    #[test]
    fn connectors_join_words() {
        assert_eq!(texts("on 2007-05-04 and 05/04/2007"), ["on", "2007-05-04", "and", "05/04/2007"]);
        assert_eq!(texts("the mid-1990s"), ["the", "mid-1990s"]);
        assert_eq!(texts("the '90s"), ["the", "'90s"]);
        assert_eq!(texts("Notorious B.I.G. won't"), ["Notorious", "B.I.G", ".", "won't"]);
        assert_eq!(texts("a - b"), ["a", "-", "b"]);
    }

    #[test]
    fn offsets_are_characters() {
        let toks = tokenize_raw("é 1994");
        assert_eq!(toks[1].char_start, 2);
        assert_eq!(char_slice("é 1994", 2, 6), "1994");
    }
}
