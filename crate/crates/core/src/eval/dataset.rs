use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSpan, TimeLabel};
use crate::error::{Error, Result};
use crate::model::Vocabulary;
use crate::timepoint::{Granularity, TimePoint};

/// One line of a task dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub text: String,
    /// `YYYY`, `YYYY-MM` or `YYYY-MM-DD`.
    pub time: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_text: Option<String>,
}

/// Appended evidence: a retrieved document's timestamp and text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub timestamp: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub text: String,
    pub gold: TimeLabel,
    pub context: Option<Context>,
}

impl LabeledInstance {
    /// Label `record` at granularity `g` within `span`.
    pub fn from_record(record: &TaskRecord, span: &CorpusSpan, g: Granularity) -> Result<Self> {
        let time: TimePoint = record.time.parse()?;
        let gold = span.timestamp_to_label(&time, g)?;
        let context = match (&record.context_timestamp, &record.context_text) {
            (None, None) => None,
            (ts, text) => Some(Context { timestamp: ts.clone().unwrap_or_default(), text: text.clone().unwrap_or_default() }),
        };
        Ok(LabeledInstance { text: record.text.clone(), gold, context })
    }
}

/// Read task records, labeling each line; errors carry the 1-based line.
pub fn load_task(reader: impl BufRead, span: &CorpusSpan, g: Granularity) -> Result<Vec<LabeledInstance>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: Error| Error::Parse { line: i + 1, message: e.to_string() };
        let record: TaskRecord = serde_json::from_str(&line).map_err(|e| at(e.into()))?;
        out.push(LabeledInstance::from_record(&record, span, g).map_err(at)?);
    }
    Ok(out)
}

/// The smallest span covering every record's time (for tasks without an
/// explicit span).
pub fn task_span(records: &[TaskRecord]) -> Result<CorpusSpan> {
    let points = records.iter().map(|r| r.time.parse::<TimePoint>()).collect::<Result<Vec<_>>>()?;
    CorpusSpan::covering(&points).ok_or(Error::EmptyEval)
}

/// `[CLS] text [SEP]`, followed by `timestamp text [SEP]` of the context
/// when given and room is left; never longer than `max_len`.
pub fn encode_input(vocab: &Vocabulary, text: &str, context: Option<&Context>, max_len: usize) -> Vec<u32> {
    let sp = vocab.special();
    let flat = |t: &str| vocab.encode_text(t).into_iter().flatten().collect::<Vec<u32>>();
    let mut ids = vec![sp.cls];
    let mut main = flat(text);
    main.truncate(max_len.saturating_sub(2));
    ids.extend(main);
    ids.push(sp.sep);
    if let Some(c) = context {
        let room = max_len.saturating_sub(ids.len() + 1);
        if room > 0 {
            let mut extra = flat(&c.timestamp);
            extra.extend(flat(&c.text));
            extra.truncate(room);
            ids.extend(extra);
            ids.push(sp.sep);
        }
    }
    ids
}

/// Parse a `word<TAB>shift_index` gold file.
pub fn load_shift_gold(reader: impl BufRead) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
        let (word, score) = t.split_once('\t').ok_or_else(|| bad("expected word<TAB>shift_index"))?;
        let score: f64 = score.trim().parse().map_err(|_| bad("shift index is not a number"))?;
        out.push((word.trim().to_string(), score));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_records_at_each_granularity() {
        let span = CorpusSpan::from_months((1987, 1), (2007, 6)).unwrap();
        let rec = TaskRecord { text: "x".into(), time: "2007-05-04".into(), context_timestamp: None, context_text: None };
        assert_eq!(LabeledInstance::from_record(&rec, &span, Granularity::Month).unwrap().gold.index, 244);
        assert_eq!(LabeledInstance::from_record(&rec, &span, Granularity::Year).unwrap().gold.index, 20);
        let year_only = TaskRecord { time: "1994".into(), ..rec };
        assert!(LabeledInstance::from_record(&year_only, &span, Granularity::Month).is_err());
    }

    #[test]
    fn load_reports_line_numbers() {
        let span = CorpusSpan::from_years(1987, 2007).unwrap();
        let data = "{\"text\":\"a\",\"time\":\"1990\"}\n{\"text\":\"b\"}\n";
        match load_task(data.as_bytes(), &span, Granularity::Year) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let ok = load_task("{\"text\":\"a\",\"time\":\"1990\",\"context_timestamp\":\"1990-01-02\",\"context_text\":\"c\"}\n".as_bytes(), &span, Granularity::Year).unwrap();
        assert_eq!(ok[0].gold.index, 3);
        assert_eq!(ok[0].context.as_ref().unwrap().text, "c");
    }

    #[test]
    fn input_respects_max_len() {
        let vocab = Vocabulary::build(["alpha beta gamma delta"], 20).unwrap();
        let ctx = Context { timestamp: "1990-01-01".into(), text: "gamma delta".into() };
        for max_len in [2, 3, 5, 8, 64] {
            let ids = encode_input(&vocab, "alpha beta gamma", Some(&ctx), max_len);
            assert!(ids.len() <= max_len, "{max_len}: {}", ids.len());
            assert_eq!(ids[0], vocab.special().cls);
            assert_eq!(*ids.last().unwrap(), vocab.special().sep);
        }
    }

    #[test]
    fn shift_gold_parses() {
        let g = load_shift_gold("# gold\nplane\t0.882\nchairman\t0\n".as_bytes()).unwrap();
        assert_eq!(g, vec![("plane".to_string(), 0.882), ("chairman".to_string(), 0.0)]);
        assert!(matches!(load_shift_gold("plane 0.3\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
