use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calendar resolution of a time point or label, coarsest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Decade,
    Year,
    Month,
    Day,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "decade" => Ok(Granularity::Decade),
            "year" => Ok(Granularity::Year),
            "month" => Ok(Granularity::Month),
            "day" => Ok(Granularity::Day),
            other => Err(Error::Config(format!("unknown granularity {other:?}"))),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Granularity::Decade => "decade",
            Granularity::Year => "year",
            Granularity::Month => "month",
            Granularity::Day => "day",
        };
        f.write_str(s)
    }
}

/// A normalized calendar time at some granularity.
///
/// Serialized as `"1990s"`, `"2007"`, `"2007-05"` or `"2007-05-04"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimePoint {
    year: i32,
    month: Option<u8>,
    day: Option<u8>,
    granularity: Granularity,
}

impl TimePoint {
    pub fn decade(year: i32) -> Result<Self> {
        if year.rem_euclid(10) != 0 {
            return Err(Error::TimestampParse(format!("{year}s is not a decade")));
        }
        Ok(TimePoint { year, month: None, day: None, granularity: Granularity::Decade })
    }

    pub fn year(year: i32) -> Self {
        TimePoint { year, month: None, day: None, granularity: Granularity::Year }
    }

    pub fn month(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::TimestampParse(format!("{year}-{month:02}")));
        }
        Ok(TimePoint { year, month: Some(month as u8), day: None, granularity: Granularity::Month })
    }

    pub fn day(year: i32, month: u32, day: u32) -> Result<Self> {
        if NaiveDate::from_ymd_opt(year, month, day).is_none() {
            return Err(Error::TimestampParse(format!("{year}-{month:02}-{day:02}")));
        }
        Ok(TimePoint {
            year,
            month: Some(month as u8),
            day: Some(day as u8),
            granularity: Granularity::Day,
        })
    }

    pub fn from_date(date: NaiveDate) -> Self {
        TimePoint {
            year: date.year(),
            month: Some(date.month() as u8),
            day: Some(date.day() as u8),
            granularity: Granularity::Day,
        }
    }

    pub fn year_value(&self) -> i32 {
        self.year
    }

    pub fn month_value(&self) -> Option<u32> {
        self.month.map(u32::from)
    }

    pub fn day_value(&self) -> Option<u32> {
        self.day.map(u32::from)
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn to_date(&self) -> Option<NaiveDate> {
        NaiveDate::from_ymd_opt(self.year, self.month_value()?, self.day_value()?)
    }

    /// Coarsen to `granularity`; returns `None` when the point is coarser already.
    pub fn truncate(&self, granularity: Granularity) -> Option<TimePoint> {
        if granularity > self.granularity {
            return None;
        }
        Some(match granularity {
            Granularity::Decade => TimePoint {
                year: self.year - self.year.rem_euclid(10),
                month: None,
                day: None,
                granularity,
            },
            Granularity::Year => TimePoint::year(self.year),
            Granularity::Month => TimePoint { day: None, granularity, ..*self },
            Granularity::Day => *self,
        })
    }

    /// `YYYY-MM` key used by the entity calendar.
    pub fn month_key(&self) -> Option<String> {
        self.month.map(|m| format!("{:04}-{:02}", self.year, m))
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.granularity, self.month, self.day) {
            (Granularity::Decade, _, _) => write!(f, "{}s", self.year),
            (Granularity::Year, _, _) => write!(f, "{:04}", self.year),
            (Granularity::Month, Some(m), _) => write!(f, "{:04}-{:02}", self.year, m),
            (Granularity::Day, Some(m), Some(d)) => write!(f, "{:04}-{:02}-{:02}", self.year, m, d),
            _ => unreachable!("time point invariants violated"),
        }
    }
}

impl FromStr for TimePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::TimestampParse(s.to_string());
        let s = s.trim();
        if let Some(decade) = s.strip_suffix('s') {
            let year: i32 = parse_digits(decade, 4).ok_or_else(bad)?;
            return TimePoint::decade(year).map_err(|_| bad());
        }
        let parts: Vec<&str> = s.split('-').collect();
        match parts.as_slice() {
            [y] => Ok(TimePoint::year(parse_digits(y, 4).ok_or_else(bad)?)),
            [y, m] => TimePoint::month(
                parse_digits(y, 4).ok_or_else(bad)?,
                parse_digits(m, 2).ok_or_else(bad)?,
            )
            .map_err(|_| bad()),
            [y, m, d] => TimePoint::day(
                parse_digits(y, 4).ok_or_else(bad)?,
                parse_digits(m, 2).ok_or_else(bad)?,
                parse_digits(d, 2).ok_or_else(bad)?,
            )
            .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

fn parse_digits<T: FromStr>(s: &str, width: usize) -> Option<T> {
    if s.len() == width && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

impl TryFrom<String> for TimePoint {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimePoint> for String {
    fn from(t: TimePoint) -> String {
        t.to_string()
    }
}

/// Parse an ISO-8601 calendar date (`YYYY-MM-DD`) into a day-granularity point.
pub fn parse_timestamp(text: &str) -> Result<TimePoint> {
    let tp: TimePoint = text.parse().map_err(|_| Error::TimestampParse(text.to_string()))?;
    if tp.granularity() != Granularity::Day {
        return Err(Error::TimestampParse(text.to_string()));
    }
    Ok(tp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips() {
        for s in ["1990s", "2006", "2007-05", "2007-05-04", "1000", "2000-02-29"] {
            let tp: TimePoint = s.parse().unwrap();
            assert_eq!(tp.to_string(), s);
        }
    }

    #[test]
    fn rejects_invalid_dates() {
        assert!(parse_timestamp("2007-13-01").is_err());
        assert!(parse_timestamp("2007-02-30").is_err());
        assert!(parse_timestamp("2007-05").is_err());
        assert!("1995s".parse::<TimePoint>().is_err());
        assert!("07-05-04".parse::<TimePoint>().is_err());
    }

    #[test]
    fn truncation() {
        let t = parse_timestamp("2007-05-04").unwrap();
        assert_eq!(t.truncate(Granularity::Month).unwrap().to_string(), "2007-05");
        assert_eq!(t.truncate(Granularity::Year).unwrap().to_string(), "2007");
        assert_eq!(t.truncate(Granularity::Decade).unwrap().to_string(), "2000s");
        assert!(TimePoint::year(2007).truncate(Granularity::Month).is_none());
    }

    #[test]
    fn serde_uses_text_form() {
        let t = TimePoint::month(1994, 3).unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"1994-03\"");
        let back: TimePoint = serde_json::from_str("\"1994-03\"").unwrap();
        assert_eq!(back, t);
    }
}
