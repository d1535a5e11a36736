//! Corpus-level processing: ingestion, refinement, entity calendars, time
//! labels and dataset splits.

mod calendar;
pub mod io;
mod refine;
mod span;
mod split;

pub use calendar::{build_entity_calendar, EntityCalendar};
pub use refine::{refine_corpus, refine_document};
pub use span::{CorpusSpan, TimeLabel};
pub use split::{split_dataset, DEFAULT_RATIOS};
