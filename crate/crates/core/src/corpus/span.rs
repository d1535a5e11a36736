use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timepoint::{Granularity, TimePoint};

/// Classifier target: a class index at some granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeLabel {
    pub granularity: Granularity,
    pub index: usize,
}

/// Inclusive calendar range that defines the label space of a corpus or task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpan {
    start: NaiveDate,
    end: NaiveDate,
}

fn months_since_zero(year: i32, month: u32) -> i64 {
    i64::from(year) * 12 + i64::from(month) - 1
}

impl CorpusSpan {
    pub fn from_days(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("span start {start} is after end {end}")));
        }
        Ok(CorpusSpan { start, end })
    }

    /// Whole months `start..=end`, from the first day of `start` to the last day of `end`.
    pub fn from_months(start: (i32, u32), end: (i32, u32)) -> Result<Self> {
        let first = NaiveDate::from_ymd_opt(start.0, start.1, 1)
            .ok_or_else(|| Error::Config(format!("bad month {}-{}", start.0, start.1)))?;
        let after_end = if end.1 == 12 {
            NaiveDate::from_ymd_opt(end.0 + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(end.0, end.1 + 1, 1)
        }
        .ok_or_else(|| Error::Config(format!("bad month {}-{}", end.0, end.1)))?;
        Self::from_days(first, after_end.pred_opt().expect("date in range"))
    }

    /// Whole years `start..=end`.
    pub fn from_years(start: i32, end: i32) -> Result<Self> {
        Self::from_months((start, 1), (end, 12))
    }

    /// Smallest span covering every given point; `None` for an empty input.
    pub fn covering<'a>(points: impl IntoIterator<Item = &'a TimePoint>) -> Option<Self> {
        let mut lo: Option<NaiveDate> = None;
        let mut hi: Option<NaiveDate> = None;
        for p in points {
            let first = NaiveDate::from_ymd_opt(p.year_value(), p.month_value().unwrap_or(1), p.day_value().unwrap_or(1))?;
            let last = match p.granularity() {
                Granularity::Day => first,
                Granularity::Month => CorpusSpan::from_months((p.year_value(), p.month_value()?), (p.year_value(), p.month_value()?)).ok()?.end,
                Granularity::Year => NaiveDate::from_ymd_opt(p.year_value(), 12, 31)?,
                Granularity::Decade => NaiveDate::from_ymd_opt(p.year_value() + 9, 12, 31)?,
            };
            lo = Some(lo.map_or(first, |d| d.min(first)));
            hi = Some(hi.map_or(last, |d| d.max(last)));
        }
        Some(CorpusSpan { start: lo?, end: hi? })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    fn endpoint(&self, date: NaiveDate, g: Granularity) -> TimePoint {
        TimePoint::from_date(date).truncate(g).expect("day points truncate to any granularity")
    }

    pub fn class_count(&self, g: Granularity) -> usize {
        match g {
            Granularity::Decade => (self.end.year().div_euclid(10) - self.start.year().div_euclid(10) + 1) as usize,
            Granularity::Year => (self.end.year() - self.start.year() + 1) as usize,
            Granularity::Month => {
                (months_since_zero(self.end.year(), self.end.month())
                    - months_since_zero(self.start.year(), self.start.month())
                    + 1) as usize
            }
            Granularity::Day => ((self.end - self.start).num_days() + 1) as usize,
        }
    }

    /// Class index of `t` at granularity `g`.
    pub fn timestamp_to_label(&self, t: &TimePoint, g: Granularity) -> Result<TimeLabel> {
        let out = || Error::OutOfSpan(t.to_string());
        let coarse = t.truncate(g).ok_or_else(|| {
            Error::Config(format!("{t} is coarser than the requested {g} granularity"))
        })?;
        let index: i64 = match g {
            Granularity::Decade => i64::from(coarse.year_value().div_euclid(10) - self.start.year().div_euclid(10)),
            Granularity::Year => i64::from(coarse.year_value() - self.start.year()),
            Granularity::Month => {
                months_since_zero(coarse.year_value(), coarse.month_value().expect("month point"))
                    - months_since_zero(self.start.year(), self.start.month())
            }
            Granularity::Day => (coarse.to_date().expect("day point") - self.start).num_days(),
        };
        if index < 0 || index as usize >= self.class_count(g) {
            return Err(out());
        }
        Ok(TimeLabel { granularity: g, index: index as usize })
    }

    /// Inverse of [`CorpusSpan::timestamp_to_label`].
    pub fn label_to_timepoint(&self, label: TimeLabel) -> Result<TimePoint> {
        if label.index >= self.class_count(label.granularity) {
            return Err(Error::OutOfSpan(format!("{} index {}", label.granularity, label.index)));
        }
        let start = self.endpoint(self.start, label.granularity);
        let i = label.index as i64;
        Ok(match label.granularity {
            Granularity::Decade => TimePoint::decade(start.year_value() + 10 * i as i32)?,
            Granularity::Year => TimePoint::year(start.year_value() + i as i32),
            Granularity::Month => {
                let m = months_since_zero(self.start.year(), self.start.month()) + i;
                TimePoint::month(m.div_euclid(12) as i32, (m.rem_euclid(12) + 1) as u32)?
            }
            Granularity::Day => TimePoint::from_date(
                self.start.checked_add_days(Days::new(i as u64)).expect("index below class count"),
            ),
        })
    }
}
