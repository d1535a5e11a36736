//! Pattern inventory for temporal expressions.
//!
//! Recognized forms:
//! - four-digit years 1000..=2999
//! - decades (`1990s`, `1990's`, `'90s`), optionally preceded by `the`
//! - `early` / `mid` / `late` plus a decade or year (`late 1980s`, `mid-1990s`)
//! - month names with optional day and year (`May 4, 2007`, `May 2007`, `4 May 2007`)
//! - numeric dates `YYYY-MM-DD` and `MM/DD/YYYY`
//! - season plus year (`summer 1994`, `the winter of 2001`)
//! - relative expressions (`yesterday`, `last week`, `three years ago`, weekdays),
//!   which are tagged without a normalized value
//!
//! Candidates are resolved longest-first, ties to the leftmost start.

use super::tokenize::Token;
use super::{Span, SpanKind};
use crate::timepoint::TimePoint;

const MONTHS: &[(&str, u32)] = &[
    ("january", 1), ("february", 2), ("march", 3), ("april", 4), ("may", 5), ("june", 6),
    ("july", 7), ("august", 8), ("september", 9), ("october", 10), ("november", 11),
    ("december", 12), ("jan", 1), ("feb", 2), ("mar", 3), ("apr", 4), ("jun", 6), ("jul", 7),
    ("aug", 8), ("sep", 9), ("sept", 9), ("oct", 10), ("nov", 11), ("dec", 12),
];

const SEASONS: &[&str] = &["spring", "summer", "fall", "autumn", "winter"];

const WEEKDAYS: &[&str] =
    &["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];

const DEICTIC: &[&str] = &["today", "yesterday", "tomorrow", "tonight"];

const RELATIVE_HEADS: &[&str] = &["last", "next", "this", "previous", "coming", "past"];

const RELATIVE_UNITS: &[&str] = &[
    "day", "week", "weekend", "month", "year", "decade", "century", "spring", "summer", "fall",
    "autumn", "winter", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday",
];

const COUNT_WORDS: &[&str] = &[
    "a", "an", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "several", "few",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    start: usize,
    end: usize,
    normalized: Option<TimePoint>,
}

struct Cursor<'a> {
    tokens: &'a [Token],
    lower: Vec<String>,
}

impl<'a> Cursor<'a> {
    fn new(tokens: &'a [Token]) -> Self {
        Cursor { tokens, lower: tokens.iter().map(|t| t.text.to_lowercase()).collect() }
    }

    fn lower(&self, i: usize) -> Option<&str> {
        self.lower.get(i).map(String::as_str)
    }

    fn raw(&self, i: usize) -> Option<&str> {
        self.tokens.get(i).map(|t| t.text.as_str())
    }

    fn capitalized(&self, i: usize) -> bool {
        self.raw(i).and_then(|t| t.chars().next()).is_some_and(char::is_uppercase)
    }

    /// Token `i` directly abuts token `i - 1` with no separator.
    fn glued(&self, i: usize) -> bool {
        i > 0 && i < self.tokens.len() && self.tokens[i - 1].char_end == self.tokens[i].char_start
    }
}

fn year_of(s: &str) -> Option<i32> {
    if s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit()) {
        let y: i32 = s.parse().ok()?;
        (1000..=2999).contains(&y).then_some(y)
    } else {
        None
    }
}

fn decade_of(s: &str) -> Option<i32> {
    let body = s.strip_suffix("'s").or_else(|| s.strip_suffix("\u{2019}s")).or_else(|| s.strip_suffix('s'))?;
    if let Some(two) = body.strip_prefix('\'').or_else(|| body.strip_prefix('\u{2019}')) {
        if two.len() == 2 && two.ends_with('0') && two.bytes().all(|b| b.is_ascii_digit()) {
            let d: i32 = two.parse().ok()?;
            // '00s and '10s read as this century, everything else as the last
            return Some(if d < 20 { 2000 + d } else { 1900 + d });
        }
        return None;
    }
    let y = year_of(body)?;
    (y % 10 == 0).then_some(y)
}

fn month_of(s: &str) -> Option<u32> {
    MONTHS.iter().find(|(name, _)| *name == s).map(|&(_, m)| m)
}

fn day_of(s: &str) -> Option<u32> {
    let digits = s
        .strip_suffix("st")
        .or_else(|| s.strip_suffix("nd"))
        .or_else(|| s.strip_suffix("rd"))
        .or_else(|| s.strip_suffix("th"))
        .unwrap_or(s);
    if digits.is_empty() || digits.len() > 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let d: u32 = digits.parse().ok()?;
    (1..=31).contains(&d).then_some(d)
}

fn numeric_date(s: &str) -> Option<TimePoint> {
    let dashed: Vec<&str> = s.split('-').collect();
    if let [y, m, d] = dashed.as_slice() {
        if y.len() == 4 && m.len() == 2 && d.len() == 2 {
            return TimePoint::day(year_of(y)?, m.parse().ok()?, d.parse().ok()?).ok();
        }
        return None;
    }
    let slashed: Vec<&str> = s.split('/').collect();
    if let [m, d, y] = slashed.as_slice() {
        let numeric = |p: &str| !p.is_empty() && p.len() <= 2 && p.bytes().all(|b| b.is_ascii_digit());
        if numeric(m) && numeric(d) {
            return TimePoint::day(year_of(y)?, m.parse().ok()?, d.parse().ok()?).ok();
        }
    }
    None
}

/// Decade or year phrase starting at `i`, returning its end and normalization.
fn decade_or_year(cur: &Cursor, i: usize) -> Option<(usize, TimePoint)> {
    let s = cur.lower(i)?;
    if let Some(d) = decade_of(s) {
        return Some((i + 1, TimePoint::decade(d).ok()?));
    }
    year_of(s).map(|y| (i + 1, TimePoint::year(y)))
}

fn candidates_at(cur: &Cursor, i: usize, out: &mut Vec<Candidate>) {
    let Some(tok) = cur.lower(i) else { return };
    let mut push = |end: usize, normalized: Option<TimePoint>| {
        out.push(Candidate { start: i, end, normalized });
    };

    if let Some(y) = year_of(tok) {
        push(i + 1, Some(TimePoint::year(y)));
    }
    if let Some(tp) = numeric_date(tok) {
        push(i + 1, Some(tp));
    }

    // "the" only ever widens a following decade/modifier/season phrase
    let (body, has_the) = if tok == "the" { (i + 1, true) } else { (i, false) };
    if let Some(b) = cur.lower(body) {
        if let Some(d) = decade_of(b) {
            push(body + 1, TimePoint::decade(d).ok());
        }
        if matches!(b, "early" | "mid" | "late") {
            if let Some((end, tp)) = decade_or_year(cur, body + 1) {
                push(end, Some(tp));
            }
        }
        for prefix in ["early-", "mid-", "late-"] {
            if let Some(rest) = b.strip_prefix(prefix) {
                if let Some(d) = decade_of(rest) {
                    push(body + 1, TimePoint::decade(d).ok());
                } else if let Some(y) = year_of(rest) {
                    push(body + 1, Some(TimePoint::year(y)));
                }
            }
        }
        if SEASONS.contains(&b) {
            if let Some(y) = cur.lower(body + 1).and_then(year_of) {
                if !has_the {
                    push(body + 2, Some(TimePoint::year(y)));
                }
            }
            if cur.lower(body + 1) == Some("of") {
                if let Some(y) = cur.lower(body + 2).and_then(year_of) {
                    push(body + 3, Some(TimePoint::year(y)));
                }
            }
        }
    }
    if has_the {
        return;
    }

    if let Some(month) = month_of(tok).filter(|_| cur.capitalized(i)) {
        let mut j = i + 1;
        if tok.len() <= 4 && cur.raw(j) == Some(".") && cur.glued(j) {
            j += 1;
        }
        let day = cur.lower(j).and_then(day_of);
        if let Some(d) = day {
            let after_day = j + 1;
            let mut k = after_day;
            if cur.raw(k) == Some(",") {
                k += 1;
            }
            if let Some(y) = cur.lower(k).and_then(year_of) {
                push(k + 1, TimePoint::day(y, month, d).ok());
            }
            push(after_day, None);
        }
        let mut k = j;
        if cur.lower(k) == Some("of") || cur.raw(k) == Some(",") {
            k += 1;
        }
        if let Some(y) = cur.lower(k).and_then(year_of) {
            push(k + 1, TimePoint::month(y, month).ok());
        }
        if tok.len() > 3 && tok != "may" && tok != "march" {
            push(i + 1, None);
        }
    }

    if let Some(d) = day_of(tok) {
        if let Some(month) = cur.lower(i + 1).and_then(month_of).filter(|_| cur.capitalized(i + 1)) {
            if let Some(y) = cur.lower(i + 2).and_then(year_of) {
                push(i + 3, TimePoint::day(y, month, d).ok());
            }
        }
    }

    if DEICTIC.contains(&tok) {
        push(i + 1, None);
    }
    if WEEKDAYS.contains(&tok) && cur.capitalized(i) {
        push(i + 1, None);
    }
    if RELATIVE_HEADS.contains(&tok) {
        if let Some(unit) = cur.lower(i + 1) {
            if RELATIVE_UNITS.contains(&unit) {
                push(i + 2, None);
            }
        }
    }
    let is_count = COUNT_WORDS.contains(&tok) || (tok.len() <= 3 && tok.bytes().all(|b| b.is_ascii_digit()));
    if is_count {
        if let (Some(unit), Some("ago")) = (cur.lower(i + 1), cur.lower(i + 2)) {
            let singular = unit.strip_suffix('s').unwrap_or(unit);
            if matches!(singular, "day" | "week" | "month" | "year" | "decade" | "century" | "centurie") {
                push(i + 3, None);
            }
        }
    }
}

/// Tag temporal expressions over a token sequence.
pub fn tag_temporal_expressions(tokens: &[Token]) -> Vec<Span> {
    let cur = Cursor::new(tokens);
    let mut cands = Vec::new();
    for i in 0..tokens.len() {
        candidates_at(&cur, i, &mut cands);
    }
    // prefer the normalized reading when two patterns cover the same tokens
    cands.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(b.normalized.is_some().cmp(&a.normalized.is_some()))
    });
    let mut taken = vec![false; tokens.len()];
    let mut chosen: Vec<Candidate> = Vec::new();
    for c in cands {
        if taken[c.start..c.end].iter().any(|&t| t) {
            continue;
        }
        taken[c.start..c.end].iter_mut().for_each(|t| *t = true);
        chosen.push(c);
    }
    chosen.sort_by_key(|c| c.start);
    chosen
        .into_iter()
        .map(|c| Span {
            kind: SpanKind::TemporalExpression,
            token_start: c.start,
            token_end: c.end,
            surface: super::surface_of(tokens, c.start, c.end),
            relation: None,
            normalized: c.normalized,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::tokenize_raw;
    use crate::timepoint::Granularity;

    fn tag(s: &str) -> Vec<(String, Option<String>)> {
        tag_temporal_expressions(&tokenize_raw(s))
            .into_iter()
            .map(|sp| (sp.surface, sp.normalized.map(|t| t.to_string())))
            .collect()
    }

    fn one(surface: &str, norm: Option<&str>) -> Vec<(String, Option<String>)> {
        vec![(surface.to_string(), norm.map(str::to_string))]
    }

    #[test]
    fn years() {
        assert_eq!(tag("in 2006"), one("2006", Some("2006")));
        assert!(tag("in 999 or 3000 or 12345").is_empty());
        assert_eq!(tag("in 1000"), one("1000", Some("1000")));
    }

    #[test]
    fn decades() {
        assert_eq!(tag("the 1990s"), one("the 1990s", Some("1990s")));
        assert_eq!(tag("the '90s"), one("the '90s", Some("1990s")));
        assert_eq!(tag("in the 1980's"), one("the 1980's", Some("1980s")));
        assert_eq!(tag("1970s"), one("1970s", Some("1970s")));
        assert!(tag("the 1995s").is_empty());
    }

    #[test]
    fn modified_periods() {
        assert_eq!(tag("the late 1980s"), one("the late 1980s", Some("1980s")));
        assert_eq!(tag("early 2001"), one("early 2001", Some("2001")));
        assert_eq!(tag("the mid-1990s"), one("the mid-1990s", Some("1990s")));
    }

    #[test]
    fn month_dates() {
        assert_eq!(tag("May 4, 2007"), one("May 4, 2007", Some("2007-05-04")));
        assert_eq!(tag("May 4 2007"), one("May 4 2007", Some("2007-05-04")));
        assert_eq!(tag("June 2007"), one("June 2007", Some("2007-06")));
        assert_eq!(tag("Sept. 11, 2001"), one("Sept. 11, 2001", Some("2001-09-11")));
        assert_eq!(tag("4 May 2007"), one("4 May 2007", Some("2007-05-04")));
        assert_eq!(tag("on May 4"), one("May 4", None));
        assert_eq!(tag("in January"), one("January", None));
        assert!(tag("you may go").is_empty());
        assert!(tag("May we go").is_empty());
    }

    #[test]
    fn invalid_calendar_dates_keep_span_without_value() {
        assert_eq!(tag("February 30, 2001"), one("February 30, 2001", None));
    }

    #[test]
    fn numeric_dates() {
        assert_eq!(tag("on 2007-05-04"), one("2007-05-04", Some("2007-05-04")));
        assert_eq!(tag("on 05/04/2007"), one("05/04/2007", Some("2007-05-04")));
        assert!(tag("on 2007-13-04").is_empty());
    }

    #[test]
    fn seasons() {
        assert_eq!(tag("summer 1994"), one("summer 1994", Some("1994")));
        assert_eq!(tag("the winter of 2001"), one("the winter of 2001", Some("2001")));
    }

    #[test]
    fn relative_expressions_have_no_value() {
        assert_eq!(tag("yesterday"), one("yesterday", None));
        assert_eq!(tag("last week"), one("last week", None));
        assert_eq!(tag("three years ago"), one("three years ago", None));
        assert_eq!(tag("on Monday"), one("Monday", None));
    }

    #[test]
    fn longest_match_wins() {
        let spans = tag("Before 2006, he quit in May 2007 and during the 1990s.");
        let surfaces: Vec<_> = spans.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(surfaces, ["2006", "May 2007", "the 1990s"]);
    }

    #[test]
    fn granularity_follows_pattern_class() {
        let spans = tag_temporal_expressions(&tokenize_raw(
            "1994 and the 1980s and June 2001 and June 3, 2001 and 2001-06-03",
        ));
        let grans: Vec<_> = spans.iter().map(|s| s.normalized.unwrap().granularity()).collect();
        assert_eq!(grans, [
            Granularity::Year,
            Granularity::Decade,
            Granularity::Month,
            Granularity::Day,
            Granularity::Day
        ]);
    }
}
