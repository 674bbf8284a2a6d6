use std::collections::{BTreeSet, HashMap, HashSet};
use std::net::IpAddr;

use chrono::{DateTime, Utc};

use super::{AnalyticsError, MonthBin, WeekBin};
use crate::ingest::{EditRecord, SiteId};
use crate::netaddr::prefix::{aligned_bits, mask128};
use crate::ribstore::{AttributedRecord, OriginAs};

/// Prefix lengths whose first-seen weeks are tracked for the cumulative
/// table; /48, /56 and /64 are always tracked since the per-/48 ratios
/// need them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateConfig {
    pub prefix_lengths: BTreeSet<u8>,
    /// Whether records carry origins (needed for the per-AS table).
    pub attributed: bool,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        AggregateConfig { prefix_lengths: [48, 56, 64, 128].into(), attributed: false }
    }
}

impl AggregateConfig {
    pub fn attributed() -> AggregateConfig {
        AggregateConfig { attributed: true, ..AggregateConfig::default() }
    }

    pub(crate) fn tracked_lengths(&self) -> BTreeSet<u8> {
        let mut l = self.prefix_lengths.clone();
        l.extend([48, 56, 64]);
        l.retain(|&n| n <= 128);
        l
    }
}

/// First and last observation of one address, across all sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifetimeStat {
    pub ip: IpAddr,
    pub first_seen: DateTime<Utc>,
    pub last_seen: DateTime<Utc>,
    pub lifetime_days: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAggregate {
    pub(crate) config: AggregateConfig,
    tracked: Vec<u8>,
    pub(crate) week_ips: HashSet<(WeekBin, IpAddr)>,
    pub(crate) site_ips: HashSet<(SiteId, IpAddr)>,
    /// Earliest week each truncated v6 prefix was seen, keyed by (length, bits).
    pub(crate) prefix_first_week: HashMap<(u8, u128), WeekBin>,
    pub(crate) span: HashMap<IpAddr, (DateTime<Utc>, DateTime<Utc>)>,
    pub(crate) week_origin_ips: HashSet<(WeekBin, OriginAs, IpAddr)>,
    pub(crate) month_48s: HashSet<(MonthBin, u128)>,
}

impl PartialAggregate {
    pub fn new(config: AggregateConfig) -> PartialAggregate {
        let tracked = config.tracked_lengths().into_iter().collect();
        PartialAggregate {
            config,
            tracked,
            week_ips: HashSet::new(),
            site_ips: HashSet::new(),
            prefix_first_week: HashMap::new(),
            span: HashMap::new(),
            week_origin_ips: HashSet::new(),
            month_48s: HashSet::new(),
        }
    }

    pub fn config(&self) -> &AggregateConfig {
        &self.config
    }

    pub fn is_empty(&self) -> bool {
        self.span.is_empty()
    }

    pub fn add(&mut self, rec: &EditRecord) {
        let week = WeekBin::of(&rec.timestamp);
        let ip = rec.ip;
        self.week_ips.insert((week, ip));
        self.site_ips.insert((rec.site.clone(), ip));
        self.span
            .entry(ip)
            .and_modify(|(first, last)| {
                *first = (*first).min(rec.timestamp);
                *last = (*last).max(rec.timestamp);
            })
            .or_insert((rec.timestamp, rec.timestamp));
        if ip.is_ipv6() {
            let bits = aligned_bits(&ip);
            for &len in &self.tracked {
                self.prefix_first_week
                    .entry((len, bits & mask128(len)))
                    .and_modify(|w| *w = (*w).min(week))
                    .or_insert(week);
            }
            self.month_48s.insert((MonthBin::of(&rec.timestamp), bits & mask128(48)));
        }
    }

    /// Adds the record and, for v6 on an attributed aggregate, its origin.
    pub fn add_attributed(&mut self, rec: &AttributedRecord) {
        self.add(&rec.record);
        if self.config.attributed && rec.record.ip.is_ipv6() {
            let week = WeekBin::of(&rec.record.timestamp);
            self.week_origin_ips.insert((week, rec.origin.clone(), rec.record.ip));
        }
    }

    pub fn from_records<'a, I: IntoIterator<Item = &'a EditRecord>>(
        config: AggregateConfig,
        records: I,
    ) -> PartialAggregate {
        let mut agg = PartialAggregate::new(config);
        for r in records {
            agg.add(r);
        }
        agg
    }

    /// Combines two partials built with the same configuration.
    pub fn merge(mut self, other: PartialAggregate) -> Result<PartialAggregate, AnalyticsError> {
        if self.config != other.config {
            return Err(AnalyticsError::ConfigMismatch);
        }
        self.week_ips.extend(other.week_ips);
        self.site_ips.extend(other.site_ips);
        for (k, w) in other.prefix_first_week {
            self.prefix_first_week.entry(k).and_modify(|x| *x = (*x).min(w)).or_insert(w);
        }
        for (ip, (f, l)) in other.span {
            self.span
                .entry(ip)
                .and_modify(|(first, last)| {
                    *first = (*first).min(f);
                    *last = (*last).max(l);
                })
                .or_insert((f, l));
        }
        self.week_origin_ips.extend(other.week_origin_ips);
        self.month_48s.extend(other.month_48s);
        Ok(self)
    }

    /// Per-address lifetimes, sorted by address.
    pub fn lifetime_stats(&self) -> Vec<LifetimeStat> {
        let mut out: Vec<_> = self
            .span
            .iter()
            .map(|(&ip, &(first_seen, last_seen))| LifetimeStat {
                ip,
                first_seen,
                last_seen,
                lifetime_days: (last_seen - first_seen).num_days() as u64,
            })
            .collect();
        out.sort_by_key(|s| s.ip);
        out
    }
}
