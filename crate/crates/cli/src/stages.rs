use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tempo_core::annotate::{AnnotatedDocument, SignalLexicon};
use tempo_core::corpus::io::{annotate_record, annotate_records, load_sidecar, read_jsonl_lenient, IngestRecord, PersonSource};
use tempo_core::corpus::{build_entity_calendar, refine_corpus, CorpusSpan, EntityCalendar};
use tempo_core::eval::{
    attach_retrieved_context, correlate_with_gold, estimate_time_scope, evaluate_classifier, finetune_classifier,
    first_relevant_rank, load_shift_gold, mean_reciprocal_rank, random_guess_baseline, semantic_change_score,
    task_span, uniform_golds, welch_ttest, year_vocabulary, zero_shot_similarity, Context, FinetuneConfig, FinetuneGrid,
    LabeledInstance, MetricReport,
};
use tempo_core::model::{
    pretrain, AdamWConfig, Encoder, EncoderCheckpoint, EncoderConfig, PretrainConfig, StepLog, Vocabulary,
};
use tempo_core::objectives::{build_examples, ExampleContext, Objective, ObjectiveSet};
use tempo_core::synth::{leakage_task, semantic_change_corpus, synthetic_corpus, SynthConfig};
use tempo_core::{Error, Granularity, Result, TimePoint};

use crate::args::*;
use crate::artifacts::*;
use crate::config::RunConfig;
use crate::manifest::{digest_all, manifest_path, require, RunManifest, Versions};

pub struct Ctx {
    pub cfg: RunConfig,
    pub force: bool,
}

impl Ctx {
    fn path(&self, given: &Option<PathBuf>, default: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.cfg.artifact(default))
    }

    /// Run `body` unless the manifest of `outputs[0]` shows an identical
    /// earlier run. Returns whether the body ran.
    fn stage(
        &self,
        name: &str,
        args: &impl Serialize,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
        body: impl FnOnce() -> Result<()>,
    ) -> Result<bool> {
        require(name, inputs)?;
        let config = json!({ "run": &self.cfg, "args": args });
        let mpath = manifest_path(&outputs[0]);
        if !self.force {
            if let Some(m) = RunManifest::load(&mpath) {
                if m.is_current(name, &config, inputs) {
                    eprintln!("{name}: up to date ({})", outputs[0].display());
                    return Ok(false);
                }
            }
        }
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let clock = Instant::now();
        body()?;
        RunManifest {
            stage: name.to_string(),
            config,
            inputs: digest_all(inputs)?,
            outputs: digest_all(outputs)?,
            started_unix,
            wall_clock_secs: clock.elapsed().as_secs_f64(),
            versions: Versions::default(),
        }
        .save(&mpath)?;
        Ok(true)
    }

    fn objectives(&self, given: &Option<String>) -> Result<ObjectiveSet> {
        match given {
            Some(s) => {
                let set: ObjectiveSet = s.parse()?;
                if set.is_empty() {
                    return Err(Error::Config("the objective set is empty".into()));
                }
                Ok(set)
            }
            None => self.cfg.pretrain_objectives(),
        }
    }
}

fn print_table(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = std::io::stdout().lock();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| Error::Config(format!("--{flag}: cannot parse {p:?}"))))
        .collect()
}

fn corpus_span(docs: &[AnnotatedDocument]) -> Result<CorpusSpan> {
    CorpusSpan::covering(docs.iter().map(|d| &d.timestamp)).ok_or_else(|| Error::Config("the corpus is empty".into()))
}

fn granularity(given: &Option<String>, fallback: Granularity) -> Result<Granularity> {
    given.as_deref().map_or(Ok(fallback), str::parse)
}

pub fn synth(ctx: &Ctx, a: &SynthArgs) -> Result<()> {
    let seed = ctx.cfg.seed;
    match a.kind {
        SynthKind::Corpus => {
            ctx.stage("synth", a, &[], &[a.out.clone()], || {
                write_lines(&a.out, &synthetic_corpus(&SynthConfig { docs: a.n, seed, ..Default::default() }))
            })?;
        }
        SynthKind::Leakage => {
            if a.first_year > a.last_year {
                return Err(Error::Config("--first-year is after --last-year".into()));
            }
            ctx.stage("synth", a, &[], &[a.out.clone()], || {
                write_lines(&a.out, &leakage_task(a.n, a.first_year, a.last_year, seed))
            })?;
        }
        SynthKind::Shift => {
            let outputs = [a.out.join("gold.tsv"), a.out.join("t1.txt"), a.out.join("t2.txt")];
            ctx.stage("synth", a, &[], &outputs, || {
                let (t1, t2, gold) = semantic_change_corpus(seed);
                let mut w = create(&outputs[0])?;
                for (word, shift) in &gold {
                    writeln!(w, "{word}\t{shift}")?;
                }
                w.flush()?;
                std::fs::write(&outputs[1], t1.join("\n") + "\n")?;
                std::fs::write(&outputs[2], t2.join("\n") + "\n")?;
                Ok(())
            })?;
        }
    }
    Ok(())
}

pub fn baseline(ctx: &Ctx, a: &BaselineArgs) -> Result<()> {
    let r = random_guess_baseline(a.classes, &uniform_golds(a.classes, a.per_class), a.trials, ctx.cfg.seed)?;
    print_table(&[
        ("classes", a.classes.to_string()),
        ("trials", a.trials.to_string()),
        ("ACC (%)", format!("{:.2}", r.acc)),
        ("MAE", format!("{:.2}", r.mae)),
    ]);
    Ok(())
}

pub fn annotate(ctx: &Ctx, a: &AnnotateArgs, jobs: usize) -> Result<()> {
    let input = a
        .input
        .clone()
        .or_else(|| ctx.cfg.corpus.clone())
        .ok_or_else(|| Error::Config("no input corpus: pass --in or set corpus in the config".into()))?;
    let out = ctx.path(&a.out, "annotated.jsonl");
    let mode = a.persons.clone().unwrap_or_else(|| ctx.cfg.persons.clone());
    let mut inputs = vec![input.clone()];
    inputs.extend(a.sidecar.clone());
    ctx.stage("annotate", a, &inputs, &[out.clone()], || {
        let persons = match mode.as_str() {
            "heuristic" => PersonSource::Heuristic,
            "external" => PersonSource::External(match &a.sidecar {
                Some(p) => load_sidecar(BufReader::new(File::open(p)?))?,
                None => Default::default(),
            }),
            other => return Err(Error::Config(format!("--persons must be external or heuristic, got {other:?}"))),
        };
        let lexicon = SignalLexicon::default();
        let (records, bad_lines) = read_jsonl_lenient::<IngestRecord>(BufReader::new(File::open(&input)?), a.skip_bad)?;
        let docs = if a.skip_bad {
            let results: Vec<(String, Result<AnnotatedDocument>)> =
                records.par_iter().map(|r| (r.id.clone(), annotate_record(r, &persons, &lexicon))).collect();
            let mut docs = Vec::with_capacity(results.len());
            for (id, r) in results {
                match r {
                    Ok(d) => docs.push(d),
                    Err(e) => eprintln!("annotate: skipped record {id}: {e}"),
                }
            }
            docs
        } else {
            annotate_records(&records, &persons, &lexicon, jobs)?
        };
        if !bad_lines.is_empty() {
            eprintln!("annotate: skipped malformed lines {bad_lines:?}");
        }
        write_annotated(&out, &docs)?;
        eprintln!("annotate: {} records -> {}", docs.len(), out.display());
        Ok(())
    })?;
    Ok(())
}

pub fn refine(ctx: &Ctx, a: &IoArgs) -> Result<()> {
    let input = ctx.path(&a.input, "annotated.jsonl");
    let out = ctx.path(&a.out, "refined.jsonl");
    ctx.stage("refine", a, &[input.clone()], &[out.clone()], || {
        let docs = read_annotated(&input)?;
        let kept: Vec<AnnotatedDocument> = refine_corpus(&docs).collect();
        write_annotated(&out, &kept)?;
        eprintln!("refine: kept {} of {} documents", kept.len(), docs.len());
        Ok(())
    })?;
    Ok(())
}

pub fn calendar(ctx: &Ctx, a: &IoArgs) -> Result<()> {
    let input = ctx.path(&a.input, "refined.jsonl");
    let out = ctx.path(&a.out, "calendar.json");
    ctx.stage("calendar", a, &[input.clone()], &[out.clone()], || {
        let cal = build_entity_calendar(&read_annotated(&input)?);
        write_json(&out, &cal)?;
        eprintln!("calendar: {} months", cal.len());
        Ok(())
    })?;
    Ok(())
}

pub fn vocab(ctx: &Ctx, a: &VocabArgs) -> Result<()> {
    let input = ctx.path(&a.input, "refined.jsonl");
    let out = ctx.path(&a.out, "vocab.json");
    let size = a.size.unwrap_or(ctx.cfg.vocab_size);
    ctx.stage("vocab", a, &[input.clone()], &[out.clone()], || {
        let docs = read_annotated(&input)?;
        let v = Vocabulary::build(docs.iter().map(|d| d.text.as_str()), size)?;
        write_vocab(&out, &v)?;
        eprintln!("vocab: {} entries", v.len());
        Ok(())
    })?;
    Ok(())
}

/// Upstream inputs shared by `examples` and `pretrain`.
struct TrainingInputs {
    docs: Vec<AnnotatedDocument>,
    vocab: Vocabulary,
    calendar: Option<EntityCalendar>,
    span: CorpusSpan,
}

fn training_paths(
    ctx: &Ctx,
    input: &Option<PathBuf>,
    vocab: &Option<PathBuf>,
    calendar: &Option<PathBuf>,
    objectives: &ObjectiveSet,
) -> Vec<PathBuf> {
    let mut paths = vec![ctx.path(input, "refined.jsonl"), ctx.path(vocab, "vocab.json")];
    if objectives.contains(Objective::Tser) {
        paths.push(ctx.path(calendar, "calendar.json"));
    }
    paths
}

fn load_training_inputs(paths: &[PathBuf]) -> Result<TrainingInputs> {
    let docs = read_annotated(&paths[0])?;
    let span = corpus_span(&docs)?;
    Ok(TrainingInputs {
        vocab: read_vocab(&paths[1])?,
        calendar: paths.get(2).map(|p| read_calendar(p)).transpose()?,
        span,
        docs,
    })
}

pub fn examples(ctx: &Ctx, a: &ExamplesArgs) -> Result<()> {
    let objectives = ctx.objectives(&a.objectives)?;
    let inputs = training_paths(ctx, &a.input, &a.vocab, &a.calendar, &objectives);
    let out = ctx.path(&a.out, "examples.jsonl");
    ctx.stage("examples", a, &inputs, &[out.clone()], || {
        let t = load_training_inputs(&inputs)?;
        let lexicon = SignalLexicon::default();
        let ex_ctx = ExampleContext {
            vocab: &t.vocab,
            lexicon: &lexicon,
            calendar: t.calendar.as_ref(),
            span: Some(&t.span),
            config: ctx.cfg.example_config(),
        };
        let examples = build_examples(&t.docs, &objectives, &ex_ctx, ctx.cfg.seed, a.epoch)?;
        write_lines(&out, &examples)?;
        eprintln!("examples: {} examples for epoch {}", examples.len(), a.epoch);
        Ok(())
    })?;
    Ok(())
}

pub fn pretrain_stage(ctx: &Ctx, a: &PretrainArgs) -> Result<()> {
    let objectives = ctx.objectives(&a.objectives)?;
    let inputs = training_paths(ctx, &a.input, &a.vocab, &a.calendar, &objectives);
    let out = ctx.path(&a.out, "pretrained.ckpt");
    let log_path = ctx.path(&a.log, "pretrain_log.jsonl");
    let cfg = &ctx.cfg;
    ctx.stage("pretrain", a, &inputs, &[out.clone(), log_path.clone()], || {
        let t = load_training_inputs(&inputs)?;
        let preset = a.preset.as_deref().unwrap_or(&cfg.preset);
        let mut enc_cfg = EncoderConfig::preset(preset, t.vocab.len(), t.span.class_count(Granularity::Month))?;
        enc_cfg.seed = cfg.seed;
        enc_cfg.max_len = cfg.max_len;
        let mut enc = Encoder::new(enc_cfg)?;
        let lexicon = SignalLexicon::default();
        let ex_ctx = ExampleContext {
            vocab: &t.vocab,
            lexicon: &lexicon,
            calendar: t.calendar.as_ref(),
            span: Some(&t.span),
            config: cfg.example_config(),
        };
        let pcfg = PretrainConfig {
            steps: a.steps.unwrap_or(cfg.steps),
            batch_size: cfg.batch_size,
            accumulation_steps: cfg.accumulation_steps,
            optimizer: AdamWConfig {
                lr: a.learning_rate.unwrap_or(cfg.learning_rate),
                weight_decay: cfg.weight_decay,
                ..Default::default()
            },
            max_grad_norm: Some(1.0),
            seed: cfg.seed,
        };
        let mut log = create(&log_path)?;
        let mut write_err: Option<std::io::Error> = None;
        let on_step = |line: &StepLog| {
            if line.step % 10 == 0 {
                eprintln!("pretrain: step {} epoch {} loss {:.4}", line.step, line.epoch, line.loss);
            }
            if write_err.is_none() {
                let text = serde_json::to_string(line).expect("log lines serialize");
                if let Err(e) = writeln!(log, "{text}") {
                    write_err = Some(e);
                }
            }
        };
        let (opt, steps) = pretrain(&mut enc, None, &t.docs, &objectives, &ex_ctx, &pcfg, on_step)?;
        if let Some(e) = write_err {
            return Err(e.into());
        }
        log.flush()?;
        if let (Some(first), Some(last)) = (steps.first(), steps.last()) {
            eprintln!("pretrain: loss {:.4} -> {:.4} over {} steps", first.loss, last.loss, steps.len());
        }
        let step = opt.t;
        EncoderCheckpoint { encoder: enc, vocab: t.vocab, optimizer: Some(opt), step }.save(&out)
    })?;
    Ok(())
}

pub fn finetune(ctx: &Ctx, a: &FinetuneArgs) -> Result<()> {
    if a.runs == 0 {
        return Err(Error::Config("--runs must be at least 1".into()));
    }
    let checkpoint = ctx.path(&a.checkpoint, "pretrained.ckpt");
    let out = ctx.path(&a.out, "finetuned.ckpt");
    let g = granularity(&a.granularity, ctx.cfg.granularity)?;
    let mut grid = match a.grid {
        GridKind::Standard => FinetuneGrid::standard(),
        GridKind::Desk => FinetuneGrid::desk(),
    };
    if let Some(s) = &a.batch_sizes {
        grid.batch_sizes = parse_list("batch-sizes", s)?;
    }
    if let Some(s) = &a.learning_rates {
        grid.learning_rates = parse_list("learning-rates", s)?;
    }
    if let Some(s) = &a.epochs {
        grid.epochs = parse_list("epochs", s)?;
    }
    let mut inputs = vec![checkpoint.clone(), a.train.clone()];
    inputs.extend(a.val.clone());
    let run_paths: Vec<PathBuf> =
        (0..a.runs).map(|k| if k == 0 { out.clone() } else { with_suffix(&out, &format!(".run{k}")) }).collect();
    let info_path = task_info_path(&out);
    let mut outputs = run_paths.clone();
    outputs.push(info_path.clone());
    ctx.stage("finetune", a, &inputs, &outputs, || {
        let base = EncoderCheckpoint::load(&checkpoint)?;
        let train_records = read_tasks(&a.train)?;
        let val_records = a.val.as_ref().map(|p| read_tasks(p)).transpose()?.unwrap_or_default();
        let all: Vec<_> = train_records.iter().chain(&val_records).cloned().collect();
        let span = task_span(&all)?;
        let classes = span.class_count(g);
        let label = |r| LabeledInstance::from_record(r, &span, g);
        let train: Vec<LabeledInstance> = train_records.iter().map(label).collect::<Result<_>>()?;
        let val: Vec<LabeledInstance> = val_records.iter().map(label).collect::<Result<_>>()?;
        let mut selected = Vec::new();
        for (k, path) in run_paths.iter().enumerate() {
            let ft_cfg = FinetuneConfig {
                grid: grid.clone(),
                weight_decay: ctx.cfg.weight_decay,
                max_grad_norm: Some(1.0),
                max_len: ctx.cfg.max_len,
                seed: ctx.cfg.seed + k as u64,
            };
            let outcome = finetune_classifier(&base.encoder, &base.vocab, &train, &val, classes, &ft_cfg)?;
            let b = outcome.best;
            eprintln!(
                "finetune: run {k}: batch {} lr {} epochs {} -> selection ACC {:.2}",
                b.batch_size, b.learning_rate, b.epochs, b.val_acc
            );
            EncoderCheckpoint { encoder: outcome.encoder, vocab: base.vocab.clone(), optimizer: None, step: 0 }
                .save(path)?;
            selected.push(b);
        }
        write_json(&info_path, &TaskInfo { granularity: g, span, classes, checkpoints: run_paths.clone(), selected })
    })?;
    Ok(())
}

/// Structured evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: EvalTask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub granularity: Option<Granularity>,
    pub instances: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_guess: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub words: Vec<WordShift>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordShift {
    pub word: String,
    pub score: f64,
    pub gold: f64,
}

fn print_report(r: &EvalReport) {
    let task = serde_json::to_value(r.task).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut rows: Vec<(&str, String)> = vec![("task", task)];
    if let Some(g) = r.granularity {
        rows.push(("granularity", g.to_string()));
    }
    rows.push(("instances", r.instances.to_string()));
    if let Some(acc) = r.acc {
        let std = r.acc_std.map_or(String::new(), |s| format!(" ± {s:.2}"));
        rows.push(("ACC (%)", format!("{acc:.2}{std}")));
    }
    if let Some(mae) = r.mae {
        rows.push(("MAE", format!("{mae:.3}")));
    }
    if let Some(p) = r.pearson {
        rows.push(("Pearson", format!("{p:.4}")));
    }
    if let Some(s) = r.spearman {
        rows.push(("Spearman", format!("{s:.4}")));
    }
    if r.runs.len() > 1 {
        rows.push(("runs", r.runs.len().to_string()));
    }
    if let Some(rg) = &r.random_guess {
        rows.push(("RG ACC (%)", format!("{:.2}", rg.acc)));
        rows.push(("RG MAE", format!("{:.3}", rg.mae)));
    }
    if let Some(p) = r.p_value {
        rows.push(("p-value", format!("{p:.4}")));
    }
    print_table(&rows);
    for w in &r.words {
        println!("  {:<16} {:.4} (gold {})", w.word, w.score, w.gold);
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let report_path = ctx.path(&a.report, "report.json");
    let ran = match a.task {
        EvalTask::DocumentDating | EvalTask::EventDating => eval_dating(ctx, a, &report_path)?,
        EvalTask::SemanticChange => eval_shift(ctx, a, &report_path)?,
    };
    if !ran {
        print_report(&read_json(&report_path)?);
    }
    Ok(())
}

fn eval_dating(ctx: &Ctx, a: &EvalArgs, report_path: &Path) -> Result<bool> {
    let checkpoint = ctx.path(&a.checkpoint, "finetuned.ckpt");
    let test = a.test.clone().ok_or_else(|| Error::Config("--test is required for dating tasks".into()))?;
    let info_path = task_info_path(&checkpoint);
    require("eval", &[checkpoint.clone(), info_path.clone()])?;
    let info: TaskInfo = read_json(&info_path)?;
    if let Some(g) = &a.granularity {
        let g: Granularity = g.parse()?;
        if g != info.granularity {
            return Err(Error::Config(format!(
                "--granularity {g} does not match the fine-tuned label space ({})",
                info.granularity
            )));
        }
    }
    let mut inputs = vec![info_path];
    inputs.extend(info.checkpoints.iter().cloned());
    inputs.push(test.clone());
    inputs.extend(a.context_from.clone());
    inputs.extend(a.compare.clone());
    ctx.stage("eval", a, &inputs, &[report_path.to_path_buf()], || {
        let records = read_tasks(&test)?;
        let mut instances: Vec<LabeledInstance> = records
            .iter()
            .map(|r| LabeledInstance::from_record(r, &info.span, info.granularity))
            .collect::<Result<_>>()?;
        if let Some(p) = &a.context_from {
            let docs = read_annotated(p)?;
            let corpus: Vec<(String, String)> = docs.iter().map(|d| (d.timestamp.to_string(), d.text.clone())).collect();
            attach_retrieved_context(&mut instances, &corpus);
        }
        let mut runs = Vec::new();
        for path in &info.checkpoints {
            let ckpt = EncoderCheckpoint::load(path)?;
            runs.push(evaluate_classifier(&ckpt.encoder, &ckpt.vocab, &instances, ctx.cfg.max_len)?);
        }
        let accs: Vec<f64> = runs.iter().map(|r| r.acc).collect();
        let golds: Vec<usize> = instances.iter().map(|x| x.gold.index).collect();
        let acc_std = (runs.len() > 1).then(|| {
            let m = mean(&accs);
            (accs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (accs.len() - 1) as f64).sqrt()
        });
        let p_value = match &a.compare {
            Some(p) => {
                let other: EvalReport = read_json(p)?;
                let theirs: Vec<f64> = other.runs.iter().map(|r| r.acc).collect();
                Some(welch_ttest(&accs, &theirs)?.p_value)
            }
            None => None,
        };
        let report = EvalReport {
            task: a.task,
            granularity: Some(info.granularity),
            instances: instances.len(),
            acc: Some(mean(&accs)),
            mae: Some(mean(&runs.iter().map(|r| r.mae).collect::<Vec<_>>())),
            acc_std,
            pearson: None,
            spearman: None,
            p_value,
            random_guess: Some(random_guess_baseline(info.classes, &golds, 1000, ctx.cfg.seed)?),
            runs,
            words: Vec::new(),
        };
        print_report(&report);
        write_json(report_path, &report)
    })
}

fn eval_shift(ctx: &Ctx, a: &EvalArgs, report_path: &Path) -> Result<bool> {
    let checkpoint = ctx.path(&a.checkpoint, "pretrained.ckpt");
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone().ok_or_else(|| Error::Config(format!("--{flag} is required for semantic change")))
    };
    let (t1, t2, gold) = (need(&a.t1, "t1")?, need(&a.t2, "t2")?, need(&a.gold, "gold")?);
    let inputs = [checkpoint.clone(), t1.clone(), t2.clone(), gold.clone()];
    ctx.stage("eval", a, &inputs, &[report_path.to_path_buf()], || {
        let ckpt = EncoderCheckpoint::load(&checkpoint)?;
        let gold = load_shift_gold(BufReader::new(File::open(&gold)?))?;
        let (s1, s2) = (read_text_lines(&t1)?, read_text_lines(&t2)?);
        let words: Vec<WordShift> = gold
            .iter()
            .map(|(word, g)| {
                let score = semantic_change_score(&ckpt.encoder, &ckpt.vocab, word, &s1, &s2, ctx.cfg.max_len)?;
                Ok(WordShift { word: word.clone(), score, gold: *g })
            })
            .collect::<Result<_>>()?;
        let scores: Vec<f64> = words.iter().map(|w| w.score).collect();
        let golds: Vec<f64> = words.iter().map(|w| w.gold).collect();
        let (pearson, spearman) = correlate_with_gold(&scores, &golds)?;
        let report = EvalReport {
            task: a.task,
            granularity: None,
            instances: words.len(),
            acc: None,
            mae: None,
            acc_std: None,
            pearson: Some(pearson),
            spearman: Some(spearman),
            p_value: None,
            runs: Vec::new(),
            random_guess: None,
            words,
        };
        print_report(&report);
        write_json(report_path, &report)
    })
}

#[derive(Debug, Serialize)]
struct SimilarityRow {
    text: String,
    gold: i32,
    ranking: Vec<(String, f64)>,
}

pub fn similarity(ctx: &Ctx, a: &SimilarityArgs) -> Result<()> {
    if a.first_year > a.last_year {
        return Err(Error::Config("--first-year is after --last-year".into()));
    }
    let checkpoint = ctx.path(&a.checkpoint, "pretrained.ckpt");
    let out = ctx.path(&a.out, "similarity.jsonl");
    ctx.stage("similarity", a, &[checkpoint.clone(), a.events.clone()], &[out.clone()], || {
        let ckpt = EncoderCheckpoint::load(&checkpoint)?;
        let years = year_vocabulary(a.first_year, a.last_year);
        let mut rows = Vec::new();
        for r in read_tasks(&a.events)? {
            let gold = r.time.parse::<TimePoint>()?.year_value();
            let ranking = zero_shot_similarity(&ckpt.encoder, &ckpt.vocab, &r.text, &years, ctx.cfg.max_len)?;
            let ranking = ranking.into_iter().map(|(t, s)| (t.to_string(), s)).collect();
            rows.push(SimilarityRow { text: r.text, gold, ranking });
        }
        let relevance: Vec<Vec<bool>> =
            rows.iter().map(|r| r.ranking.iter().map(|(y, _)| *y == format!("{:04}", r.gold)).collect()).collect();
        let ranks: Vec<Option<usize>> = relevance.iter().map(|l| first_relevant_rank(l)).collect();
        let hits = |k: usize| ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count() as f64;
        let n = rows.len().max(1) as f64;
        print_table(&[
            ("events", rows.len().to_string()),
            ("candidates", years.len().to_string()),
            ("top-1 (%)", format!("{:.2}", 100.0 * hits(1) / n)),
            ("top-3 (%)", format!("{:.2}", 100.0 * hits(3) / n)),
            ("MRR", mean_reciprocal_rank(&ranks).map_or("n/a".into(), |m| format!("{m:.4}"))),
        ]);
        write_lines(&out, &rows)
    })?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct Question {
    text: String,
    #[serde(default)]
    context_timestamp: Option<String>,
    #[serde(default)]
    context_text: Option<String>,
}

#[derive(Debug, Serialize)]
struct ScopeRow {
    text: String,
    start: String,
    end: String,
}

pub fn timescope(ctx: &Ctx, a: &TimescopeArgs) -> Result<()> {
    let checkpoint = ctx.path(&a.checkpoint, "finetuned.ckpt");
    let info_path = task_info_path(&checkpoint);
    let out = ctx.path(&a.out, "timescope.jsonl");
    let inputs = [checkpoint.clone(), info_path.clone(), a.questions.clone()];
    require("timescope", &inputs)?;
    let info: TaskInfo = read_json(&info_path)?;
    if info.granularity != Granularity::Month {
        return Err(Error::Config(format!("time scope needs a month classifier, got {}", info.granularity)));
    }
    ctx.stage("timescope", a, &inputs, &[out.clone()], || {
        let ckpt = EncoderCheckpoint::load(&checkpoint)?;
        let questions: Vec<Question> = read_lines(&a.questions)?;
        let rows = questions
            .into_iter()
            .map(|q| {
                let context = match (q.context_timestamp, q.context_text) {
                    (None, None) => None,
                    (ts, text) => Some(Context { timestamp: ts.unwrap_or_default(), text: text.unwrap_or_default() }),
                };
                let (start, end) =
                    estimate_time_scope(&ckpt.encoder, &ckpt.vocab, &q.text, context.as_ref(), &info.span, ctx.cfg.max_len)?;
                Ok(ScopeRow { text: q.text, start: start.to_string(), end: end.to_string() })
            })
            .collect::<Result<Vec<_>>>()?;
        eprintln!("timescope: {} questions", rows.len());
        write_lines(&out, &rows)
    })?;
    Ok(())
}
