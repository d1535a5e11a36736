//! Reading and writing the files that flow between stages.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tempo_core::annotate::AnnotatedDocument;
use tempo_core::corpus::io::{read_jsonl, write_jsonl, AnnotatedRecord};
use tempo_core::corpus::{CorpusSpan, EntityCalendar};
use tempo_core::eval::{GridPoint, TaskRecord};
use tempo_core::model::{VocabData, Vocabulary};
use tempo_core::{Granularity, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn read_lines<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl(BufReader::new(File::open(path)?))
}

pub fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_jsonl(create(path)?, items)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_annotated(path: &Path) -> Result<Vec<AnnotatedDocument>> {
    read_lines::<AnnotatedRecord>(path)?.into_iter().map(AnnotatedDocument::try_from).collect()
}

pub fn write_annotated(path: &Path, docs: &[AnnotatedDocument]) -> Result<()> {
    let records: Vec<AnnotatedRecord> = docs.iter().map(AnnotatedRecord::from).collect();
    write_lines(path, &records)
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::try_from(read_json::<VocabData>(path)?)
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    write_json(path, &VocabData::from(vocab.clone()))
}

pub fn read_calendar(path: &Path) -> Result<EntityCalendar> {
    read_json(path)
}

pub fn read_tasks(path: &Path) -> Result<Vec<TaskRecord>> {
    read_lines(path)
}

pub fn read_text_lines(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Label space and checkpoints of a fine-tuning run, stored next to the
/// first checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub granularity: Granularity,
    pub span: CorpusSpan,
    pub classes: usize,
    pub checkpoints: Vec<std::path::PathBuf>,
    pub selected: Vec<GridPoint>,
}

pub fn task_info_path(checkpoint: &Path) -> std::path::PathBuf {
    let mut name = checkpoint.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".task.json");
    checkpoint.with_file_name(name)
}
