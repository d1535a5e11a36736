use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoded::EncodedDoc;
use crate::annotate::SpanKind;
use crate::model::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskAction {
    Mask,
    RandomReplace,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaskSource {
    TemporalExpression,
    TemporalSignal,
    Person,
    Ordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskDecision {
    pub position: usize,
    pub action: MaskAction,
    pub original_id: u32,
    pub source: MaskSource,
}

/// Sampling rates for span-first masking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskRates {
    pub expression: f64,
    pub signal: f64,
    /// Fraction of person spans to mask; `None` leaves persons alone.
    pub person: Option<f64>,
    pub total: f64,
    pub mask: f64,
    pub random: f64,
}

impl Default for MaskRates {
    fn default() -> Self {
        MaskRates { expression: 0.30, signal: 0.30, person: None, total: 0.15, mask: 0.8, random: 0.1 }
    }
}

/// `ceil(rate * count)`, computed so that exact products do not round up.
pub fn ceil_count(rate: f64, count: usize) -> usize {
    let x = rate * count as f64;
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Spans chosen for masking, by index into `doc.spans`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChosenSpans {
    pub expressions: Vec<usize>,
    pub signals: Vec<usize>,
    pub persons: Vec<usize>,
}

fn choose<R: Rng>(rng: &mut R, candidates: &[usize], rate: f64) -> Vec<usize> {
    let k = ceil_count(rate, candidates.len()).min(candidates.len());
    if k == 0 {
        return Vec::new();
    }
    let mut picked: Vec<usize> = sample(rng, candidates.len(), k).into_iter().map(|i| candidates[i]).collect();
    picked.sort_unstable();
    picked
}

/// Span-first masking.
///
/// 1. `ceil(rate * |T|)` expression and `ceil(rate * |S|)` signal spans (and,
///    when `rates.person` is set, person spans) are drawn without replacement;
///    all their pieces are sampled.
/// 2. Ordinary pieces outside every expression/signal (and person, when
///    masked) span are drawn until `ceil(total * n)` pieces are sampled.
/// 3. Each sampled piece independently gets Mask / RandomReplace / Keep.
pub fn sample_masks<R: Rng>(doc: &EncodedDoc, rates: &MaskRates, rng: &mut R) -> (Vec<MaskDecision>, ChosenSpans) {
    let ids = doc.ids();
    let of_kind = |k: SpanKind| doc.spans_of(k).map(|(i, _)| i).collect::<Vec<_>>();
    let expressions = of_kind(SpanKind::TemporalExpression);
    let signals = of_kind(SpanKind::TemporalSignal);
    let persons = of_kind(SpanKind::Person);

    let chosen = ChosenSpans {
        expressions: choose(rng, &expressions, rates.expression),
        signals: choose(rng, &signals, rates.signal),
        persons: match rates.person {
            Some(rate) if !persons.is_empty() => choose(rng, &persons, rate),
            _ => Vec::new(),
        },
    };

    let mut sampled: BTreeMap<usize, MaskSource> = BTreeMap::new();
    let groups = [
        (&chosen.expressions, MaskSource::TemporalExpression),
        (&chosen.signals, MaskSource::TemporalSignal),
        (&chosen.persons, MaskSource::Person),
    ];
    for (indices, source) in groups {
        for &i in indices {
            for p in doc.positions(&doc.spans[i]) {
                sampled.entry(p).or_insert(source);
            }
        }
    }

    let mut excluded: BTreeSet<usize> = BTreeSet::new();
    for &i in expressions.iter().chain(&signals) {
        excluded.extend(doc.positions(&doc.spans[i]));
    }
    if rates.person.is_some() {
        for &i in &persons {
            excluded.extend(doc.positions(&doc.spans[i]));
        }
    }
    let n = doc.content_len();
    let budget = ceil_count(rates.total, n);
    if sampled.len() < budget {
        let ordinary: Vec<usize> = (1..=n).filter(|p| !excluded.contains(p)).collect();
        let extra = (budget - sampled.len()).min(ordinary.len());
        for i in sample(rng, ordinary.len(), extra).into_iter() {
            sampled.insert(ordinary[i], MaskSource::Ordinary);
        }
    }

    let decisions = sampled
        .into_iter()
        .map(|(position, source)| {
            let u: f64 = rng.gen();
            let action = if u < rates.mask {
                MaskAction::Mask
            } else if u < rates.mask + rates.random {
                MaskAction::RandomReplace
            } else {
                MaskAction::Keep
            };
            MaskDecision { position, action, original_id: ids[position], source }
        })
        .collect();
    (decisions, chosen)
}

/// Expression/signal masking with the given rates.
pub fn sample_etamlm<R: Rng>(doc: &EncodedDoc, rates: &MaskRates, rng: &mut R) -> Vec<MaskDecision> {
    sample_masks(doc, &MaskRates { person: None, ..*rates }, rng).0
}

/// As [`sample_etamlm`], additionally masking `person_rate` of person spans.
pub fn sample_tsemlm<R: Rng>(doc: &EncodedDoc, rates: &MaskRates, person_rate: f64, rng: &mut R) -> Vec<MaskDecision> {
    sample_masks(doc, &MaskRates { person: Some(person_rate), ..*rates }, rng).0
}

/// Corrupt `ids` according to `decisions`; targets record the original id of
/// every sampled position regardless of action.
pub fn apply_mask_policy<R: Rng>(
    ids: &[u32],
    decisions: &[MaskDecision],
    vocab: &Vocabulary,
    rng: &mut R,
) -> (Vec<u32>, BTreeMap<usize, u32>) {
    let mut out = ids.to_vec();
    let mut targets = BTreeMap::new();
    let lo = vocab.first_regular_id();
    let hi = vocab.len() as u32;
    for d in decisions {
        targets.insert(d.position, d.original_id);
        match d.action {
            MaskAction::Mask => out[d.position] = vocab.special().mask,
            MaskAction::RandomReplace => {
                // uniform over regular ids other than the original
                let mut r = rng.gen_range(lo..hi - 1);
                if r >= d.original_id && d.original_id >= lo {
                    r += 1;
                }
                out[d.position] = r;
            }
            MaskAction::Keep => {}
        }
    }
    (out, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate_document, PersonMode, SignalLexicon};
    use crate::rng::keyed_rng;

    const FIG1: &str = "Before 2006, Smith was a notable figure in rap music, born to rap during the 1990s.";

    fn encoded(text: &str) -> (EncodedDoc, Vocabulary) {
        let doc = annotate_document("fig1", "2007-05-04", text, &PersonMode::Heuristic, &SignalLexicon::default()).unwrap();
        let vocab = Vocabulary::build([text], 200).unwrap();
        (EncodedDoc::new(&doc, &vocab, 512), vocab)
    }

    #[test]
    fn ceiling_rule() {
        assert_eq!(ceil_count(0.3, 4), 2);
        assert_eq!(ceil_count(0.3, 2), 1);
        assert_eq!(ceil_count(0.3, 10), 3);
        assert_eq!(ceil_count(0.15, 200), 30);
        assert_eq!(ceil_count(0.3, 0), 0);
    }

    #[test]
    fn fig1_document_masks_one_expression_and_one_signal() {
        let (doc, _) = encoded(FIG1);
        let exprs: Vec<_> = doc.spans_of(SpanKind::TemporalExpression).map(|(_, s)| s.surface.clone()).collect();
        let sigs: Vec<_> = doc.spans_of(SpanKind::TemporalSignal).map(|(_, s)| s.surface.clone()).collect();
        assert_eq!(exprs, ["2006", "the 1990s"]);
        assert_eq!(sigs, ["Before", "during"]);
        let mut saw_example_choice = false;
        for seed in 0..64 {
            let mut rng = keyed_rng(seed, &[]);
            let (decisions, chosen) = sample_masks(&doc, &MaskRates::default(), &mut rng);
            assert_eq!(chosen.expressions.len(), 1);
            assert_eq!(chosen.signals.len(), 1);
            let sampled: BTreeSet<usize> = decisions.iter().map(|d| d.position).collect();
            for (i, span) in doc.spans.iter().enumerate() {
                let picked = chosen.expressions.contains(&i) || chosen.signals.contains(&i);
                let hit = doc.positions(span).any(|p| sampled.contains(&p));
                if span.kind != SpanKind::Person {
                    assert_eq!(picked, hit, "span {:?}", span.surface);
                }
            }
            let names: Vec<&str> = chosen
                .expressions
                .iter()
                .chain(&chosen.signals)
                .map(|&i| doc.spans[i].surface.as_str())
                .collect();
            saw_example_choice |= names == ["the 1990s", "Before"];
        }
        assert!(saw_example_choice);
    }

    #[test]
    fn budget_is_filled_with_ordinary_tokens() {
        let (doc, _) = encoded(FIG1);
        let n = doc.content_len();
        let mut rng = keyed_rng(3, &[]);
        let (decisions, chosen) = sample_masks(&doc, &MaskRates::default(), &mut rng);
        let span_tokens: usize = chosen
            .expressions
            .iter()
            .chain(&chosen.signals)
            .map(|&i| doc.positions(&doc.spans[i]).len())
            .sum();
        assert_eq!(decisions.len(), ceil_count(0.15, n).max(span_tokens));
        let ordinary = decisions.iter().filter(|d| d.source == MaskSource::Ordinary).count();
        assert_eq!(ordinary + span_tokens, decisions.len());
    }

    #[test]
    fn overflowing_spans_add_no_ordinary_tokens() {
        let (doc, _) = encoded("In 1990, 1991, 1992, 1993 and 1994 it rained on us.");
        let rates = MaskRates { expression: 1.0, ..MaskRates::default() };
        let (decisions, _) = sample_masks(&doc, &rates, &mut keyed_rng(0, &[]));
        assert!(decisions.iter().all(|d| d.source != MaskSource::Ordinary));
        assert!(decisions.len() > ceil_count(0.15, doc.content_len()));
    }

    #[test]
    fn plain_masking_without_temporal_spans() {
        let (doc, _) = encoded("nothing temporal is said here, only words and more words.");
        assert!(doc.spans.is_empty());
        let decisions = sample_etamlm(&doc, &MaskRates::default(), &mut keyed_rng(1, &[]));
        assert_eq!(decisions.len(), ceil_count(0.15, doc.content_len()));
        assert!(decisions.iter().all(|d| d.source == MaskSource::Ordinary));
    }

    #[test]
    fn person_masking() {
        let text = "Before 2006, Tupac Shakur, Dr. Dre and Mr. Smith argued about Snoop Dogg during the 1990s.";
        let (doc, _) = encoded(text);
        assert_eq!(doc.spans_of(SpanKind::Person).count(), 4);
        let decisions = sample_tsemlm(&doc, &MaskRates::default(), 0.3, &mut keyed_rng(5, &[]));
        let persons = decisions.iter().filter(|d| d.source == MaskSource::Person).map(|d| d.position).collect::<BTreeSet<_>>();
        let masked_spans = doc
            .spans_of(SpanKind::Person)
            .filter(|(_, s)| doc.positions(s).all(|p| persons.contains(&p)))
            .count();
        assert_eq!(masked_spans, ceil_count(0.3, 4));
    }

    #[test]
    fn person_masking_without_persons_matches_plain() {
        let (doc, _) = encoded("Before 2006 it rained during the 1990s and after 1980 too.");
        assert_eq!(doc.spans_of(SpanKind::Person).count(), 0);
        let a = sample_etamlm(&doc, &MaskRates::default(), &mut keyed_rng(11, &[]));
        let b = sample_tsemlm(&doc, &MaskRates::default(), 0.3, &mut keyed_rng(11, &[]));
        assert_eq!(a, b);
    }

    #[test]
    fn mask_policy_actions() {
        let (doc, vocab) = encoded(FIG1);
        let ids = doc.ids();
        let mk = |position, action| MaskDecision { position, action, original_id: ids[position], source: MaskSource::Ordinary };
        let decisions = [mk(1, MaskAction::Keep), mk(2, MaskAction::RandomReplace), mk(3, MaskAction::Mask)];
        for seed in 0..50 {
            let (out, targets) = apply_mask_policy(&ids, &decisions, &vocab, &mut keyed_rng(seed, &[]));
            assert_eq!(out[1], ids[1]);
            assert_ne!(out[2], ids[2]);
            assert!(out[2] >= vocab.first_regular_id() && (out[2] as usize) < vocab.len());
            assert_eq!(out[3], vocab.special().mask);
            assert_eq!(targets.len(), 3);
            assert_eq!(targets[&2], ids[2]);
        }
    }
}
