//! Run configuration: defaults, a `key = value` file, `TEMPO_SEED`, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use tempo_core::objectives::{ExampleConfig, MaskRates, ObjectiveSet};
use tempo_core::{Error, Granularity, Result};

pub const SEED_ENV: &str = "TEMPO_SEED";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub objectives: String,
    pub expression_rate: f64,
    pub signal_rate: f64,
    pub total_rate: f64,
    pub person_rate: f64,
    pub tser_rate: f64,
    pub trwr_rate: f64,
    pub granularity: Granularity,
    pub preset: String,
    pub max_len: usize,
    pub vocab_size: usize,
    pub steps: u64,
    pub batch_size: usize,
    pub accumulation_steps: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub persons: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            out_dir: PathBuf::from("."),
            seed: 0,
            objectives: "etamlm,dd,tser".into(),
            expression_rate: 0.30,
            signal_rate: 0.30,
            total_rate: 0.15,
            person_rate: 0.30,
            tser_rate: 0.50,
            trwr_rate: 0.50,
            granularity: Granularity::Month,
            preset: "desk".into(),
            max_len: 128,
            vocab_size: 8000,
            steps: 100,
            batch_size: 8,
            accumulation_steps: 8,
            learning_rate: 3e-5,
            weight_decay: 0.01,
            persons: "external".into(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse { line, message: format!("invalid value {value:?} for {key}") })
}

impl RunConfig {
    /// Apply `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored; unknown keys are errors.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, message: format!("expected key = value, got {trimmed:?}") })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "corpus" => self.corpus = Some(PathBuf::from(value)),
                "out_dir" => self.out_dir = PathBuf::from(value),
                "seed" => self.seed = parse_value(key, value, line)?,
                "objectives" => self.objectives = value.to_string(),
                "expression_rate" => self.expression_rate = parse_value(key, value, line)?,
                "signal_rate" => self.signal_rate = parse_value(key, value, line)?,
                "total_rate" => self.total_rate = parse_value(key, value, line)?,
                "person_rate" => self.person_rate = parse_value(key, value, line)?,
                "tser_rate" => self.tser_rate = parse_value(key, value, line)?,
                "trwr_rate" => self.trwr_rate = parse_value(key, value, line)?,
                "granularity" => {
                    self.granularity =
                        value.parse().map_err(|e: Error| Error::Parse { line, message: e.to_string() })?
                }
                "preset" => self.preset = value.to_string(),
                "max_len" => self.max_len = parse_value(key, value, line)?,
                "vocab_size" => self.vocab_size = parse_value(key, value, line)?,
                "steps" => self.steps = parse_value(key, value, line)?,
                "batch_size" => self.batch_size = parse_value(key, value, line)?,
                "accumulation_steps" => self.accumulation_steps = parse_value(key, value, line)?,
                "learning_rate" => self.learning_rate = parse_value(key, value, line)?,
                "weight_decay" => self.weight_decay = parse_value(key, value, line)?,
                "persons" => self.persons = value.to_string(),
                other => return Err(Error::Parse { line, message: format!("unknown key {other:?}") }),
            }
        }
        Ok(())
    }

    pub fn load(path: Option<&Path>, seed_env: Option<&str>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(s) = seed_env {
            cfg.seed = s.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not an integer")))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("expression_rate", self.expression_rate),
            ("signal_rate", self.signal_rate),
            ("total_rate", self.total_rate),
            ("person_rate", self.person_rate),
            ("tser_rate", self.tser_rate),
            ("trwr_rate", self.trwr_rate),
        ];
        for (name, r) in rates {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {r}")));
            }
        }
        self.objective_set()?;
        if !matches!(self.persons.as_str(), "external" | "heuristic") {
            return Err(Error::Config(format!("persons must be external or heuristic, got {:?}", self.persons)));
        }
        if self.batch_size == 0 || self.accumulation_steps == 0 {
            return Err(Error::Config("batch_size and accumulation_steps must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn objective_set(&self) -> Result<ObjectiveSet> {
        self.objectives.parse()
    }

    /// The objective set, which must be non-empty for pre-training.
    pub fn pretrain_objectives(&self) -> Result<ObjectiveSet> {
        let set = self.objective_set()?;
        if set.is_empty() {
            return Err(Error::Config("the objective set is empty".into()));
        }
        Ok(set)
    }

    pub fn example_config(&self) -> ExampleConfig {
        ExampleConfig {
            rates: MaskRates {
                expression: self.expression_rate,
                signal: self.signal_rate,
                total: self.total_rate,
                ..MaskRates::default()
            },
            person_rate: self.person_rate,
            tser_rate: self.tser_rate,
            trwr_rate: self.trwr_rate,
            max_len: self.max_len,
        }
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}
