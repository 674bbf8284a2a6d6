//! IPv6 hitlist snapshots: `date<TAB>address-or-prefix` rows.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use chrono::NaiveDate;
use serde::Serialize;

use super::{AnalyticsError, MonthBin};
use crate::netaddr::prefix::mask128;
use crate::netaddr::Prefix;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct HitlistStats {
    pub rows: u64,
    pub loaded: u64,
    pub bad_rows: u64,
    /// IPv4 entries, which cannot overlap a /48.
    pub ipv4_ignored: u64,
}

#[derive(Debug, Clone, Default)]
struct MonthEntries {
    /// /48s of entries at least that specific.
    slash48: HashSet<u128>,
    /// Entries shorter than /48, matched by containment.
    wider: Vec<Prefix>,
}

#[derive(Debug, Clone, Default)]
pub struct Hitlist {
    months: BTreeMap<MonthBin, MonthEntries>,
}

fn parse_month(text: &str) -> Option<MonthBin> {
    let text = text.trim();
    let date = text.get(..10).and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok());
    if let Some(d) = date {
        if text.len() == 10 || text[10..].starts_with(['T', ' ']) {
            return Some(MonthBin { year: chrono::Datelike::year(&d), month: chrono::Datelike::month(&d) });
        }
        return None;
    }
    // YYYY-MM
    let (y, m) = text.split_once('-')?;
    if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let month: u32 = m.parse().ok()?;
    let year = y.parse().ok()?;
    (1..=12).contains(&month).then_some(MonthBin { year, month })
}

impl Hitlist {
    /// Loads a hitlist TSV. Blank lines and `#` comments are ignored, as is
    /// a first line whose first column is `date`. Bad rows are counted.
    pub fn load<R: BufRead>(input: R) -> Result<(Hitlist, HitlistStats), AnalyticsError> {
        let mut list = Hitlist::default();
        let mut stats = HitlistStats::default();
        let mut first = true;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (date, entry) = (fields.next().unwrap_or(""), fields.next());
            if std::mem::take(&mut first) && date.trim().eq_ignore_ascii_case("date") {
                continue;
            }
            stats.rows += 1;
            let parsed = parse_month(date).zip(entry.and_then(|e| e.trim().parse::<Prefix>().ok()));
            match parsed {
                None => stats.bad_rows += 1,
                Some((_, p)) if !p.is_v6() => stats.ipv4_ignored += 1,
                Some((month, p)) => {
                    list.insert(month, p);
                    stats.loaded += 1;
                }
            }
        }
        Ok((list, stats))
    }

    pub fn insert(&mut self, month: MonthBin, prefix: Prefix) {
        let m = self.months.entry(month).or_default();
        if prefix.len() >= 48 {
            m.slash48.insert(prefix.aligned_bits() & mask128(48));
        } else {
            m.wider.push(prefix);
        }
    }

    /// Whether the /48 with network bits `bits` appears in that month's list.
    pub fn matches(&self, month: MonthBin, bits: u128) -> bool {
        let Some(m) = self.months.get(&month) else {
            return false;
        };
        m.slash48.contains(&bits)
            || m.wider.iter().any(|p| bits & mask128(p.len()) == p.aligned_bits())
    }
}
