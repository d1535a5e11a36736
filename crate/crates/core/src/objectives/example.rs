use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::encoded::EncodedDoc;
use super::replace::{apply_trwr, apply_tser, ReplacementDecision, ReplacementLabel};
use super::sampling::{apply_mask_policy, sample_masks, MaskDecision, MaskRates};
use crate::annotate::{AnnotatedDocument, SignalLexicon};
use crate::corpus::{CorpusSpan, EntityCalendar, TimeLabel};
use crate::error::{Error, Result};
use crate::model::Vocabulary;
use crate::rng::doc_epoch_rng;
use crate::timepoint::Granularity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Etamlm,
    Tsemlm,
    Trwr,
    Tser,
    Dd,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "etamlm" => Ok(Objective::Etamlm),
            "tsemlm" => Ok(Objective::Tsemlm),
            "trwr" => Ok(Objective::Trwr),
            "tser" => Ok(Objective::Tser),
            "dd" => Ok(Objective::Dd),
            other => Err(Error::Config(format!("unknown objective {other:?}"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Etamlm => "etamlm",
            Objective::Tsemlm => "tsemlm",
            Objective::Trwr => "trwr",
            Objective::Tser => "tser",
            Objective::Dd => "dd",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveSet(BTreeSet<Objective>);

impl ObjectiveSet {
    pub fn new(objectives: impl IntoIterator<Item = Objective>) -> Self {
        ObjectiveSet(objectives.into_iter().collect())
    }

    /// ETAMLM + DD + TSER.
    pub fn standard() -> Self {
        Self::new([Objective::Etamlm, Objective::Dd, Objective::Tser])
    }

    pub fn contains(&self, o: Objective) -> bool {
        self.0.contains(&o)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Objective> + '_ {
        self.0.iter().copied()
    }
}

impl FromStr for ObjectiveSet {
    type Err = Error;

    /// Comma-separated names, e.g. `etamlm,dd,tser`.
    fn from_str(s: &str) -> Result<Self> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<BTreeSet<_>>>().map(ObjectiveSet)
    }
}

impl fmt::Display for ObjectiveSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(Objective::to_string).collect();
        f.write_str(&names.join(","))
    }
}

/// Binary replacement target over sequence positions `start..end`,
/// serialized as `[start, end, label]` with label 1 for replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, u8)", into = "(usize, usize, u8)")]
pub struct SpanTarget {
    pub start: usize,
    pub end: usize,
    pub replaced: bool,
}

impl From<(usize, usize, u8)> for SpanTarget {
    fn from((start, end, label): (usize, usize, u8)) -> Self {
        SpanTarget { start, end, replaced: label != 0 }
    }
}

impl From<SpanTarget> for (usize, usize, u8) {
    fn from(t: SpanTarget) -> Self {
        (t.start, t.end, u8::from(t.replaced))
    }
}

impl SpanTarget {
    pub fn class_index(&self) -> usize {
        usize::from(self.replaced)
    }
}

/// One multi-task training example, as written to example files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub doc_id: String,
    pub epoch: u64,
    pub input_ids: Vec<u32>,
    /// `(position, original id)`, sorted by position.
    pub mlm_targets: Vec<(usize, u32)>,
    pub dd_index: Option<usize>,
    pub tser: Vec<SpanTarget>,
    #[serde(default)]
    pub trwr: Vec<SpanTarget>,
    pub objectives: ObjectiveSet,
}

impl TrainingExample {
    pub fn dd_target(&self) -> Option<TimeLabel> {
        self.dd_index.map(|index| TimeLabel { granularity: Granularity::Month, index })
    }

    pub fn has_targets(&self) -> bool {
        !self.mlm_targets.is_empty() || self.dd_index.is_some() || !self.tser.is_empty() || !self.trwr.is_empty()
    }
}

/// Rates and limits for example construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConfig {
    pub rates: MaskRates,
    pub person_rate: f64,
    pub tser_rate: f64,
    pub trwr_rate: f64,
    pub max_len: usize,
}

impl Default for ExampleConfig {
    fn default() -> Self {
        ExampleConfig { rates: MaskRates::default(), person_rate: 0.30, tser_rate: 0.50, trwr_rate: 0.50, max_len: 128 }
    }
}

/// Shared, read-only inputs for example construction.
#[derive(Debug, Clone, Copy)]
pub struct ExampleContext<'a> {
    pub vocab: &'a Vocabulary,
    pub lexicon: &'a SignalLexicon,
    pub calendar: Option<&'a EntityCalendar>,
    pub span: Option<&'a CorpusSpan>,
    pub config: ExampleConfig,
}

/// Intermediate decisions, useful for inspection and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleTrace {
    pub encoded: EncodedDoc,
    pub masks: Vec<MaskDecision>,
    pub entities: Vec<ReplacementDecision>,
    pub signals: Vec<ReplacementDecision>,
}

/// Build an example for `(seed, doc.id, epoch)`.
///
/// Objectives apply in the order masking (ETAMLM or TSEMLM), signal
/// replacement, entity replacement, then the DD label; the sequence is then
/// cut to `max_len`, dropping targets that fall past the cut.
pub fn build_training_example(
    doc: &AnnotatedDocument,
    objectives: &ObjectiveSet,
    ctx: &ExampleContext,
    seed: u64,
    epoch: u64,
) -> Result<(TrainingExample, ExampleTrace)> {
    let cfg = &ctx.config;
    if cfg.max_len < 2 {
        return Err(Error::Config("max_len must be at least 2".into()));
    }
    let mut rng = doc_epoch_rng(seed, &doc.id, epoch);
    let mut enc = EncodedDoc::new(doc, ctx.vocab, cfg.max_len);

    let mut masks = if objectives.contains(Objective::Tsemlm) {
        sample_masks(&enc, &MaskRates { person: Some(cfg.person_rate), ..cfg.rates }, &mut rng).0
    } else if objectives.contains(Objective::Etamlm) {
        sample_masks(&enc, &MaskRates { person: None, ..cfg.rates }, &mut rng).0
    } else {
        Vec::new()
    };

    let signals = if objectives.contains(Objective::Trwr) {
        apply_trwr(&mut enc, &mut masks, ctx.lexicon, ctx.vocab, cfg.trwr_rate, &mut rng)
    } else {
        Vec::new()
    };

    let entities = if objectives.contains(Objective::Tser) {
        let calendar = ctx.calendar.ok_or_else(|| Error::Config("entity replacement needs an entity calendar".into()))?;
        apply_tser(&mut enc, &mut masks, calendar, ctx.vocab, cfg.tser_rate, &mut rng)?
    } else {
        Vec::new()
    };

    let dd_index = if objectives.contains(Objective::Dd) {
        let span = ctx.span.ok_or_else(|| Error::Config("document dating needs a corpus span".into()))?;
        Some(span.timestamp_to_label(&doc.timestamp, Granularity::Month)?.index)
    } else {
        None
    };

    let (mut input_ids, targets) = apply_mask_policy(&enc.ids(), &masks, ctx.vocab, &mut rng);

    let to_targets = |decisions: &[ReplacementDecision]| -> Vec<SpanTarget> {
        decisions
            .iter()
            .map(|d| {
                let r = enc.positions(&enc.spans[d.span_index]);
                SpanTarget { start: r.start, end: r.end, replaced: d.label == ReplacementLabel::Replaced }
            })
            .collect()
    };
    let mut tser = to_targets(&entities);
    let mut trwr = to_targets(&signals);
    let mut mlm_targets: Vec<(usize, u32)> = targets.into_iter().collect();

    if input_ids.len() > cfg.max_len {
        let limit = cfg.max_len - 1;
        input_ids.truncate(limit);
        input_ids.push(ctx.vocab.special().sep);
        mlm_targets.retain(|&(p, _)| p < limit);
        tser.retain(|t| t.end <= limit);
        trwr.retain(|t| t.end <= limit);
    }

    let example = TrainingExample {
        doc_id: doc.id.clone(),
        epoch,
        input_ids,
        mlm_targets,
        dd_index,
        tser,
        trwr,
        objectives: objectives.clone(),
    };
    Ok((example, ExampleTrace { encoded: enc, masks, entities, signals }))
}

/// Build examples for many documents on the current rayon pool; output order
/// follows input order.
pub fn build_examples(
    docs: &[AnnotatedDocument],
    objectives: &ObjectiveSet,
    ctx: &ExampleContext,
    seed: u64,
    epoch: u64,
) -> Result<Vec<TrainingExample>> {
    use rayon::prelude::*;
    docs.par_iter()
        .map(|d| build_training_example(d, objectives, ctx, seed, epoch).map(|(e, _)| e))
        .collect()
}
