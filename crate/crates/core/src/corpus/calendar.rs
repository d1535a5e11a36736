use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotate::{AnnotatedDocument, SpanKind};

/// Month key (`YYYY-MM`) to the person surfaces seen in documents of that month.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityCalendar {
    months: BTreeMap<String, BTreeSet<String>>,
}

impl EntityCalendar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, month_key: &str, surface: &str) {
        self.months.entry(month_key.to_string()).or_default().insert(surface.to_string());
    }

    pub fn add_document(&mut self, doc: &AnnotatedDocument) {
        let key = doc.timestamp.month_key().expect("document timestamps carry a month");
        let set = self.months.entry(key).or_default();
        set.extend(doc.spans_of(SpanKind::Person).map(|s| s.surface.clone()));
    }

    pub fn get(&self, month_key: &str) -> Option<&BTreeSet<String>> {
        self.months.get(month_key)
    }

    /// Keyed set union.
    pub fn merge(&mut self, other: EntityCalendar) {
        for (k, v) in other.months {
            self.months.entry(k).or_default().extend(v);
        }
    }

    pub fn months(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.months.iter()
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }
}

pub fn build_entity_calendar<'a>(docs: impl IntoIterator<Item = &'a AnnotatedDocument>) -> EntityCalendar {
    let mut cal = EntityCalendar::new();
    for d in docs {
        cal.add_document(d);
    }
    cal
}
