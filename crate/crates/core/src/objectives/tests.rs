use std::collections::BTreeSet;

use super::*;
use crate::annotate::{annotate_document, AnnotatedDocument, ExternalPerson, PersonMode, Relation, SignalLexicon, SpanKind};
use crate::corpus::{build_entity_calendar, CorpusSpan, EntityCalendar};
use crate::error::Error;
use crate::model::Vocabulary;
use crate::rng::keyed_rng;

const FIG2: &str = "Before 2006, Mr. Smith was a notable figure in rap music, feuding with Tupac Shakur \
and the Notorious B.I.G. during the 1990s. It is clear he changed.";

fn persons_in(text: &str, names: &[&str]) -> PersonMode {
    PersonMode::External(
        names
            .iter()
            .map(|n| {
                let b = text.find(n).unwrap();
                let s = text[..b].chars().count();
                ExternalPerson { char_start: s, char_end: s + n.chars().count(), surface: n.to_string() }
            })
            .collect(),
    )
}

fn fig2_doc() -> AnnotatedDocument {
    let mode = persons_in(FIG2, &["Smith", "Tupac Shakur", "Notorious B.I.G."]);
    annotate_document("fig2", "2007-05-04", FIG2, &mode, &SignalLexicon::default()).unwrap()
}

fn fig2_calendar() -> EntityCalendar {
    let mut cal = build_entity_calendar([&fig2_doc()]);
    cal.insert("2007-05", "Antonin Scalia");
    cal
}

fn vocab() -> Vocabulary {
    Vocabulary::build([FIG2, "Antonin Scalia after following since from until by on at amid throughout prior to"], 300)
        .unwrap()
}

fn nyt_span() -> CorpusSpan {
    CorpusSpan::from_months((1987, 1), (2007, 6)).unwrap()
}

fn person_positions(enc: &EncodedDoc, surface: &str) -> std::ops::Range<usize> {
    let (_, s) = enc.spans_of(SpanKind::Person).find(|(_, s)| s.surface == surface).unwrap();
    enc.positions(s)
}

#[test]
fn fig2_entities() {
    let doc = fig2_doc();
    let surfaces: Vec<_> = doc.spans_of(SpanKind::Person).map(|s| s.surface.as_str()).collect();
    assert_eq!(surfaces, ["Smith", "Tupac Shakur", "Notorious B.I.G."]);
}

#[test]
fn tser_replaces_from_month_set() {
    let v = vocab();
    let cal = fig2_calendar();
    let mut saw_example_case = false;
    for seed in 0..200 {
        let mut enc = EncodedDoc::new(&fig2_doc(), &v, 512);
        let mut rng = keyed_rng(seed, &[]);
        let mut masks = Vec::new();
        let out = apply_tser(&mut enc, &mut masks, &cal, &v, 0.5, &mut rng).unwrap();
        assert_eq!(out.len(), 3);
        for d in &out {
            assert_eq!(enc.spans[d.span_index].kind, SpanKind::Person);
            match (&d.label, &d.replacement_surface) {
                (ReplacementLabel::Replaced, Some(r)) => {
                    assert_ne!(r, &d.original_surface);
                    assert!(cal.get("2007-05").unwrap().contains(r));
                    assert_eq!(&enc.spans[d.span_index].surface, r);
                }
                (ReplacementLabel::NotReplaced, None) => {
                    assert_eq!(enc.spans[d.span_index].surface, d.original_surface);
                }
                other => panic!("inconsistent decision {other:?}"),
            }
        }
        let tupac = &out[1];
        let smith = &out[0];
        saw_example_case |= tupac.replacement_surface.as_deref() == Some("Antonin Scalia")
            && smith.label == ReplacementLabel::NotReplaced;
        // the re-encoded text matches the edited words
        assert_eq!(enc.ids().len(), enc.content_len() + 2);
    }
    assert!(saw_example_case);
}

#[test]
fn tser_skips_partially_masked_entities() {
    let v = vocab();
    let mut enc = EncodedDoc::new(&fig2_doc(), &v, 512);
    let big = person_positions(&enc, "Notorious B.I.G.");
    let ids = enc.ids();
    let mut masks = vec![MaskDecision {
        position: big.start + 1,
        action: MaskAction::Mask,
        original_id: ids[big.start + 1],
        source: MaskSource::Ordinary,
    }];
    let out = apply_tser(&mut enc, &mut masks, &fig2_calendar(), &v, 1.0, &mut keyed_rng(0, &[])).unwrap();
    let originals: Vec<_> = out.iter().map(|d| d.original_surface.as_str()).collect();
    assert_eq!(originals, ["Smith", "Tupac Shakur"]);
    // the masked piece still points at the same token after the edits
    assert_eq!(enc.ids()[masks[0].position], masks[0].original_id);
}

#[test]
fn tser_without_alternatives_is_not_replaced() {
    let v = vocab();
    let mut cal = EntityCalendar::new();
    cal.insert("2007-05", "Smith");
    let text = "In 2006, Smith rapped.";
    let doc = annotate_document("x", "2007-05-04", text, &persons_in(text, &["Smith"]), &SignalLexicon::default()).unwrap();
    let mut enc = EncodedDoc::new(&doc, &v, 512);
    let out = apply_tser(&mut enc, &mut Vec::new(), &cal, &v, 1.0, &mut keyed_rng(0, &[])).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].label, ReplacementLabel::NotReplaced);
}

#[test]
fn tser_calendar_miss() {
    let v = vocab();
    let mut enc = EncodedDoc::new(&fig2_doc(), &v, 512);
    let err = apply_tser(&mut enc, &mut Vec::new(), &EntityCalendar::new(), &v, 0.5, &mut keyed_rng(0, &[])).unwrap_err();
    assert!(matches!(err, Error::CalendarMiss(m) if m == "2007-05"));
}

#[test]
fn trwr_changes_relation_class() {
    let v = vocab();
    let lex = SignalLexicon::default();
    let mut saw_before_to_during = false;
    for seed in 0..100 {
        let mut enc = EncodedDoc::new(&fig2_doc(), &v, 512);
        let before: Vec<Relation> = enc.spans_of(SpanKind::TemporalSignal).map(|(_, s)| s.relation.unwrap()).collect();
        let out = apply_trwr(&mut enc, &mut Vec::new(), &lex, &v, 1.0, &mut keyed_rng(seed, &[]));
        assert_eq!(out.len(), before.len());
        for (d, rel) in out.iter().zip(&before) {
            assert_eq!(d.label, ReplacementLabel::Replaced);
            let span = &enc.spans[d.span_index];
            let new_rel = lex.classify(span.surface.as_str()).unwrap();
            assert_ne!(new_rel, *rel);
            assert_eq!(span.relation, Some(new_rel));
        }
        saw_before_to_during |= out[0].original_surface == "Before" && out[0].replacement_surface.as_deref() == Some("During");
    }
    assert!(saw_before_to_during);
}

#[test]
fn trwr_with_zero_rate_is_identity() {
    let v = vocab();
    let mut enc = EncodedDoc::new(&fig2_doc(), &v, 512);
    let ids = enc.ids();
    let out = apply_trwr(&mut enc, &mut Vec::new(), &SignalLexicon::default(), &v, 0.0, &mut keyed_rng(0, &[]));
    assert!(out.iter().all(|d| d.label == ReplacementLabel::NotReplaced));
    assert_eq!(enc.ids(), ids);
}

fn context<'a>(v: &'a Vocabulary, lex: &'a SignalLexicon, cal: &'a EntityCalendar, span: &'a CorpusSpan) -> ExampleContext<'a> {
    ExampleContext { vocab: v, lexicon: lex, calendar: Some(cal), span: Some(span), config: ExampleConfig { max_len: 512, ..Default::default() } }
}

#[test]
fn standard_example_on_fig2() {
    let (v, lex, cal, span) = (vocab(), SignalLexicon::default(), fig2_calendar(), nyt_span());
    let ctx = context(&v, &lex, &cal, &span);
    let doc = fig2_doc();
    let mut saw_replaced = false;
    for seed in 0..20 {
        let (ex, trace) = build_training_example(&doc, &ObjectiveSet::standard(), &ctx, seed, 0).unwrap();
        assert_eq!(ex.dd_index, Some(244));
        assert_eq!(ex.input_ids[0], v.special().cls);
        let masked: BTreeSet<usize> = ex.mlm_targets.iter().map(|&(p, _)| p).collect();
        assert_eq!(masked.len(), trace.masks.len());
        for t in &ex.tser {
            assert!((t.start..t.end).all(|p| !masked.contains(&p)));
        }
        // a temporal span is always among the targets
        assert!(trace.masks.iter().any(|m| m.source == MaskSource::TemporalExpression));
        assert!(trace.masks.iter().any(|m| m.source == MaskSource::TemporalSignal));
        saw_replaced |= ex.tser.iter().any(|t| t.replaced);
    }
    assert!(saw_replaced);
}

#[test]
fn empty_objective_set_is_plain_encoding() {
    let (v, lex, cal, span) = (vocab(), SignalLexicon::default(), fig2_calendar(), nyt_span());
    let ctx = context(&v, &lex, &cal, &span);
    let doc = fig2_doc();
    let (ex, _) = build_training_example(&doc, &ObjectiveSet::default(), &ctx, 1, 0).unwrap();
    assert_eq!(ex.input_ids, EncodedDoc::new(&doc, &v, 512).ids());
    assert!(!ex.has_targets());
}

#[test]
fn examples_are_deterministic_per_seed_doc_epoch() {
    let (v, lex, cal, span) = (vocab(), SignalLexicon::default(), fig2_calendar(), nyt_span());
    let ctx = context(&v, &lex, &cal, &span);
    let doc = fig2_doc();
    let all: ObjectiveSet = "etamlm,dd,tser,trwr".parse().unwrap();
    let a = build_training_example(&doc, &all, &ctx, 7, 3).unwrap().0;
    let b = build_training_example(&doc, &all, &ctx, 7, 3).unwrap().0;
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    let c = build_training_example(&doc, &all, &ctx, 7, 4).unwrap().0;
    assert_ne!(a, c);
}

#[test]
fn truncation_drops_late_targets() {
    let (v, lex, cal, span) = (vocab(), SignalLexicon::default(), fig2_calendar(), nyt_span());
    let mut ctx = context(&v, &lex, &cal, &span);
    ctx.config.max_len = 24;
    for seed in 0..30 {
        let (ex, _) = build_training_example(&fig2_doc(), &ObjectiveSet::standard(), &ctx, seed, 0).unwrap();
        assert!(ex.input_ids.len() <= 24);
        assert_eq!(*ex.input_ids.last().unwrap(), v.special().sep);
        assert!(ex.mlm_targets.iter().all(|&(p, _)| p < ex.input_ids.len() - 1));
        assert!(ex.tser.iter().all(|t| t.end < ex.input_ids.len()));
    }
}

#[test]
fn dd_out_of_span() {
    let (v, lex, cal) = (vocab(), SignalLexicon::default(), fig2_calendar());
    let span = CorpusSpan::from_months((1990, 1), (2000, 12)).unwrap();
    let ctx = context(&v, &lex, &cal, &span);
    let err = build_training_example(&fig2_doc(), &"dd".parse().unwrap(), &ctx, 0, 0).unwrap_err();
    assert!(matches!(err, Error::OutOfSpan(_)));
}

#[test]
fn epoch_zero_index_at_span_start() {
    let (v, lex, cal) = (vocab(), SignalLexicon::default(), fig2_calendar());
    let span = CorpusSpan::from_months((2007, 5), (2007, 6)).unwrap();
    let ctx = context(&v, &lex, &cal, &span);
    let (ex, _) = build_training_example(&fig2_doc(), &"dd".parse().unwrap(), &ctx, 0, 0).unwrap();
    assert_eq!(ex.dd_index, Some(0));
}

#[test]
fn example_record_format() {
    let (v, lex, cal, span) = (vocab(), SignalLexicon::default(), fig2_calendar(), nyt_span());
    let ctx = context(&v, &lex, &cal, &span);
    let (ex, _) = build_training_example(&fig2_doc(), &ObjectiveSet::standard(), &ctx, 0, 0).unwrap();
    let json: serde_json::Value = serde_json::to_value(&ex).unwrap();
    assert_eq!(json["objectives"], serde_json::json!(["etamlm", "tser", "dd"]));
    assert!(json["tser"][0].as_array().unwrap().len() == 3);
    assert!(json["mlm_targets"][0].as_array().unwrap().len() == 2);
    let back: TrainingExample = serde_json::from_value(json).unwrap();
    assert_eq!(back, ex);
}
