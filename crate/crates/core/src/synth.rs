//! Deterministic synthetic corpora and task datasets for tests, benchmarks
//! and smoke runs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::io::IngestRecord;
use crate::eval::TaskRecord;
use crate::rng::{keyed_rng, StreamRng};

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November", "December",
];
const FIRST: [&str; 16] = [
    "Anna", "Boris", "Carla", "David", "Elena", "Frank", "Greta", "Hector", "Irene", "Jonas", "Karen", "Louis", "Maria",
    "Nikolai", "Olga", "Pedro",
];
const LAST: [&str; 12] =
    ["Adler", "Brandt", "Castillo", "Dorsey", "Eklund", "Fischer", "Garcia", "Holm", "Ivanova", "Jensen", "Keller", "Lindqvist"];
const TOPICS: [&str; 10] =
    ["election", "budget", "strike", "festival", "merger", "trial", "summit", "tournament", "harvest", "flood"];
const PLACES: [&str; 8] = ["the capital", "the harbor", "the valley", "the north", "the old town", "the coast", "the plain", "the river"];
const ROLES: [&str; 6] = ["senator", "judge", "coach", "mayor", "director", "singer"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub docs: usize,
    /// First and last publication month.
    pub start: (i32, u32),
    pub end: (i32, u32),
    /// Distinct people active in any month.
    pub persons_per_month: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { docs: 200, start: (2005, 1), end: (2006, 12), persons_per_month: 6, seed: 0 }
    }
}

struct Writer {
    text: String,
    chars: usize,
    persons: Vec<(usize, usize, String)>,
}

impl Writer {
    fn push(&mut self, s: &str) {
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    fn person(&mut self, name: &str) {
        let start = self.chars;
        self.push(name);
        self.persons.push((start, self.chars, name.to_string()));
    }
}

fn month_people(cfg: &SynthConfig, year: i32, month: u32) -> Vec<String> {
    let mut rng = keyed_rng(cfg.seed, &[b"synth-people", &year.to_le_bytes(), &month.to_le_bytes()]);
    let mut all: Vec<String> = FIRST.iter().flat_map(|f| LAST.iter().map(move |l| format!("{f} {l}"))).collect();
    all.shuffle(&mut rng);
    all.truncate(cfg.persons_per_month.max(1));
    all
}

fn pick<'a>(rng: &mut StreamRng, xs: &[&'a str]) -> &'a str {
    xs[rng.gen_range(0..xs.len())]
}

/// News-style documents whose text repeatedly mentions the publication
/// month, with person mentions attached as external annotations.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Vec<IngestRecord> {
    let months: Vec<(i32, u32)> = {
        let (mut y, mut m) = cfg.start;
        let mut out = Vec::new();
        while (y, m) <= cfg.end {
            out.push((y, m));
            (y, m) = if m == 12 { (y + 1, 1) } else { (y, m + 1) };
        }
        out
    };
    (0..cfg.docs)
        .map(|i| {
            let mut rng = keyed_rng(cfg.seed, &[b"synth-doc", &(i as u64).to_le_bytes()]);
            let (year, month) = months[i % months.len().max(1)];
            let day = rng.gen_range(1..=28u32);
            let people = month_people(cfg, year, month);
            let who = |rng: &mut StreamRng| people[rng.gen_range(0..people.len())].clone();
            let mname = MONTHS[month as usize - 1];
            let topic = pick(&mut rng, &TOPICS);
            let mut w = Writer { text: String::new(), chars: 0, persons: Vec::new() };

            w.push(&format!("On {mname} {day}, {year}, "));
            w.person(&who(&mut rng));
            w.push(&format!(" spoke about the {topic} in {}. ", pick(&mut rng, &PLACES)));
            w.push(&format!("Before {}, ", rng.gen_range(1987..year)));
            w.person(&who(&mut rng));
            w.push(&format!(" was a {} in {}. ", pick(&mut rng, &ROLES), pick(&mut rng, &PLACES)));
            w.push(&format!("The {topic} began in {mname} {year} and drew crowds during the {}s revival. ", (year / 10) * 10 - 10));
            w.push(&format!("After the {}, ", pick(&mut rng, &TOPICS)));
            w.person(&who(&mut rng));
            w.push(" met ");
            w.person(&who(&mut rng));
            w.push(&format!(" in {mname} {year}."));

            IngestRecord {
                id: format!("doc{i:05}"),
                timestamp: format!("{year:04}-{month:02}-{day:02}"),
                text: w.text,
                persons: Some(w.persons),
            }
        })
        .collect()
}

/// Short event descriptions whose gold year appears verbatim in the text.
pub fn leakage_task(n: usize, first_year: i32, last_year: i32, seed: u64) -> Vec<TaskRecord> {
    (0..n)
        .map(|i| {
            let mut rng = keyed_rng(seed, &[b"synth-leak", &(i as u64).to_le_bytes()]);
            let year = rng.gen_range(first_year..=last_year);
            let text = format!(
                "The {} in {} was held in {year} with the {}.",
                pick(&mut rng, &TOPICS),
                pick(&mut rng, &PLACES),
                pick(&mut rng, &ROLES)
            );
            TaskRecord { text, time: year.to_string(), context_timestamp: None, context_text: None }
        })
        .collect()
}

/// Two period corpora plus gold shift indices: words in `shifted` appear
/// in different contexts across the periods, words in `stable` in the same.
pub fn semantic_change_corpus(seed: u64) -> (Vec<String>, Vec<String>, Vec<(String, f64)>) {
    let mut rng = keyed_rng(seed, &[b"synth-shift"]);
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for _ in 0..20 {
        let place = pick(&mut rng, &PLACES);
        t1.push(format!("The plane of the valley stretched flat toward {place}."));
        t2.push(format!("The plane landed at the airport after a long flight from {place}."));
        t1.push(format!("The chairman of the board spoke in {place}."));
        t2.push(format!("The chairman of the board spoke in {place}."));
        t1.push(format!("The cell held the prisoner near {place}."));
        t2.push(format!("The cell phone rang twice near {place}."));
    }
    let gold = vec![("plane".into(), 0.882), ("chairman".into(), 0.0), ("cell".into(), 0.6)];
    (t1, t2, gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{char_slice, SpanKind};
    use crate::corpus::io::{annotate_record, PersonSource};
    use crate::annotate::SignalLexicon;

    #[test]
    fn corpus_is_deterministic_and_well_formed() {
        let cfg = SynthConfig { docs: 30, ..Default::default() };
        let a = synthetic_corpus(&cfg);
        assert_eq!(a, synthetic_corpus(&cfg));
        for r in &a {
            for (s, e, surface) in r.persons.as_ref().unwrap() {
                assert_eq!(&char_slice(&r.text, *s, *e), surface);
            }
            let doc = annotate_record(r, &PersonSource::Heuristic, &SignalLexicon::default()).unwrap();
            assert!(doc.spans_of(SpanKind::TemporalExpression).count() >= 3);
            assert!(doc.spans_of(SpanKind::TemporalSignal).count() >= 2);
        }
    }

    #[test]
    fn leakage_text_contains_gold_year() {
        for r in leakage_task(50, 1987, 2007, 1) {
            assert!(r.text.contains(&r.time));
        }
    }
}
