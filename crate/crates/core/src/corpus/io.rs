//! Line-oriented JSON formats for documents and annotations.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::annotate::{annotate_document, AnnotatedDocument, ExternalPerson, PersonMode, SignalLexicon, Span, Token};
use crate::error::{Error, Result};
use crate::timepoint::TimePoint;

pub const ANNOTATED_SCHEMA_VERSION: u32 = 1;

/// `[char_start, char_end, surface]`
pub type PersonTriple = (usize, usize, String);

/// One raw input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub id: String,
    pub timestamp: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persons: Option<Vec<PersonTriple>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedRecord {
    pub v: u32,
    pub id: String,
    pub timestamp: TimePoint,
    pub text: String,
    pub tokens: Vec<Token>,
    pub spans: Vec<Span>,
    pub sentences: Vec<(usize, usize)>,
}

impl From<&AnnotatedDocument> for AnnotatedRecord {
    fn from(d: &AnnotatedDocument) -> Self {
        AnnotatedRecord {
            v: ANNOTATED_SCHEMA_VERSION,
            id: d.id.clone(),
            timestamp: d.timestamp,
            text: d.text.clone(),
            tokens: d.tokens.clone(),
            spans: d.spans.clone(),
            sentences: d.sentence_bounds.clone(),
        }
    }
}

impl TryFrom<AnnotatedRecord> for AnnotatedDocument {
    type Error = Error;

    fn try_from(r: AnnotatedRecord) -> Result<Self> {
        if r.v != ANNOTATED_SCHEMA_VERSION {
            return Err(Error::Config(format!("annotated record schema v{} is not supported", r.v)));
        }
        Ok(AnnotatedDocument {
            id: r.id,
            timestamp: r.timestamp,
            text: r.text,
            tokens: r.tokens,
            spans: r.spans,
            sentence_bounds: r.sentences,
        })
    }
}

/// Person sidecar record: mentions for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonSidecarRecord {
    pub doc_id: String,
    pub persons: Vec<PersonTriple>,
}

pub fn to_external(persons: &[PersonTriple]) -> Vec<ExternalPerson> {
    persons
        .iter()
        .map(|(s, e, surface)| ExternalPerson { char_start: *s, char_end: *e, surface: surface.clone() })
        .collect()
}

/// Parse one JSON value per non-blank line; errors carry 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    read_jsonl_lenient(reader, false).map(|(items, _)| items)
}

/// Like [`read_jsonl`], optionally skipping malformed lines. Returns the parsed
/// items together with the line numbers that were skipped.
pub fn read_jsonl_lenient<T: DeserializeOwned>(reader: impl BufRead, skip_bad: bool) -> Result<(Vec<T>, Vec<usize>)> {
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(item) => items.push(item),
            Err(_) if skip_bad => skipped.push(n + 1),
            Err(e) => return Err(Error::Parse { line: n + 1, message: e.to_string() }),
        }
    }
    Ok((items, skipped))
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_sidecar(reader: impl BufRead) -> Result<HashMap<String, Vec<ExternalPerson>>> {
    let records: Vec<PersonSidecarRecord> = read_jsonl(reader)?;
    Ok(records.into_iter().map(|r| (r.doc_id, to_external(&r.persons))).collect())
}

/// How person mentions are obtained for each record.
#[derive(Debug, Clone)]
pub enum PersonSource {
    /// Use the record's `persons` field (or a sidecar entry); missing means none.
    External(HashMap<String, Vec<ExternalPerson>>),
    Heuristic,
}

/// Annotate one ingestion record.
pub fn annotate_record(record: &IngestRecord, persons: &PersonSource, lexicon: &SignalLexicon) -> Result<AnnotatedDocument> {
    let mode = match persons {
        PersonSource::Heuristic => PersonMode::Heuristic,
        PersonSource::External(sidecar) => PersonMode::External(match &record.persons {
            Some(p) => to_external(p),
            None => sidecar.get(&record.id).cloned().unwrap_or_default(),
        }),
    };
    annotate_document(&record.id, &record.timestamp, &record.text, &mode, lexicon)
}

/// Annotate records on `jobs` worker threads; output order follows input order.
pub fn annotate_records(
    records: &[IngestRecord],
    persons: &PersonSource,
    lexicon: &SignalLexicon,
    jobs: usize,
) -> Result<Vec<AnnotatedDocument>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        records
            .par_iter()
            .enumerate()
            .map(|(n, r)| {
                annotate_record(r, persons, lexicon).map_err(|e| Error::Parse { line: n + 1, message: e.to_string() })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const INPUT: &str = r#"{"id":"a","timestamp":"2007-05-04","text":"Before 2006, Tupac Shakur sang.","persons":[[13,25,"Tupac Shakur"]]}

{"id":"b","timestamp":"1999-01-02","text":"During the 1990s he rapped."}
"#;

    #[test]
    fn reads_ingestion_records() {
        let recs: Vec<IngestRecord> = read_jsonl(Cursor::new(INPUT)).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].persons.as_ref().unwrap()[0], (13, 25, "Tupac Shakur".to_string()));
        assert!(recs[1].persons.is_none());
    }

    #[test]
    fn missing_field_names_line() {
        let bad = "{\"id\":\"a\",\"timestamp\":\"2001-01-01\",\"text\":\"x\"}\n{\"id\":\"b\",\"text\":\"y\"}\n";
        let err = read_jsonl::<IngestRecord>(Cursor::new(bad)).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("timestamp"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let (ok, skipped) = read_jsonl_lenient::<IngestRecord>(Cursor::new(bad), true).unwrap();
        assert_eq!((ok.len(), skipped), (1, vec![2]));
    }

    #[test]
    fn annotated_record_round_trip() {
        let recs: Vec<IngestRecord> = read_jsonl(Cursor::new(INPUT)).unwrap();
        let docs = annotate_records(&recs, &PersonSource::External(HashMap::new()), &SignalLexicon::default(), 2).unwrap();
        assert_eq!(docs[0].spans_of(crate::annotate::SpanKind::Person).count(), 1);
        let records: Vec<AnnotatedRecord> = docs.iter().map(AnnotatedRecord::from).collect();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"v\":1,"));
        let back: Vec<AnnotatedRecord> = read_jsonl(Cursor::new(buf)).unwrap();
        let docs_back: Vec<AnnotatedDocument> = back.into_iter().map(|r| r.try_into().unwrap()).collect();
        assert_eq!(docs_back, docs);
    }

    #[test]
    fn parallel_annotation_matches_sequential() {
        let recs: Vec<IngestRecord> = read_jsonl(Cursor::new(INPUT)).unwrap();
        let lex = SignalLexicon::default();
        let one = annotate_records(&recs, &PersonSource::Heuristic, &lex, 1).unwrap();
        let four = annotate_records(&recs, &PersonSource::Heuristic, &lex, 4).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn sidecar_supplies_missing_persons() {
        let side = "{\"doc_id\":\"b\",\"persons\":[[0,6,\"During\"]]}\n";
        let map = load_sidecar(Cursor::new(side)).unwrap();
        let recs: Vec<IngestRecord> = read_jsonl(Cursor::new(INPUT)).unwrap();
        let doc = annotate_record(&recs[1], &PersonSource::External(map), &SignalLexicon::default()).unwrap();
        assert_eq!(doc.spans_of(crate::annotate::SpanKind::Person).count(), 1);
    }
}
