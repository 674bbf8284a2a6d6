//! Aggregates over edit records, built per shard and merged.
//!
//! A [`PartialAggregate`] keeps exact distinct-key state. Shards merge by
//! set union and min/max of first/last-seen times, so any merge tree gives
//! the same result. Report tables are computed from the merged state only.

mod aggregate;
mod hitlist;
mod report;
mod table;

use std::fmt;

use chrono::{DateTime, Datelike, Utc};

pub use aggregate::{AggregateConfig, LifetimeStat, PartialAggregate};
pub use hitlist::{Hitlist, HitlistStats};
pub use report::{ReportOptions, TableName};
pub use table::{Cell, ReportTable};

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("cannot merge aggregates built with different configurations")]
    ConfigMismatch,
    #[error("unknown table {name:?}; valid tables: {}", TableName::ALL.map(|t| t.as_str()).join(", "))]
    UnknownTable { name: String },
    #[error("table {table} needs {needs}")]
    MissingInput { table: &'static str, needs: &'static str },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// ISO-8601 week, in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeekBin {
    pub iso_year: i32,
    pub iso_week: u32,
}

impl WeekBin {
    pub fn of(t: &DateTime<Utc>) -> WeekBin {
        let w = t.iso_week();
        WeekBin { iso_year: w.year(), iso_week: w.week() }
    }
}

impl fmt::Display for WeekBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-W{:02}", self.iso_year, self.iso_week)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonthBin {
    pub year: i32,
    pub month: u32,
}

impl MonthBin {
    pub fn of(t: &DateTime<Utc>) -> MonthBin {
        MonthBin { year: t.year(), month: t.month() }
    }
}

impl fmt::Display for MonthBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// `num / den`, or 0 for an empty denominator.
pub fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Display form of a fraction: two decimals.
pub fn format_fraction(x: f64) -> String {
    format!("{x:.2}")
}

/// Display form of a percentage: two significant figures.
pub fn format_percent(pct: f64) -> String {
    if pct == 0.0 || !pct.is_finite() {
        return format!("{pct}");
    }
    // Scientific formatting rounds first, so 9.96 becomes 1.0e1 and the
    // exponent already reflects the carry.
    let sci = format!("{pct:.1e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (1 - exp).max(0) as usize;
    format!("{pct:.decimals$}")
}
