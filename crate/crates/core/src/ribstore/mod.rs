//! Historical BGP origin lookup.
//!
//! RIB snapshots come from MRT `TABLE_DUMP_V2` files or from a plain
//! prefix-table TSV. Each snapshot is reduced to one origin per prefix by
//! plurality over peers, indexed for longest-prefix match, and placed on a
//! timeline so every edit can be looked up in the snapshot closest in time.

mod attribute;
mod lpm;
mod mrt;
mod table;
mod timeline;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};

use crate::ingest::IngestError;
use crate::netaddr::Prefix;

pub use attribute::{
    attribute, read_attributed, write_attributed, AttributedReader, AttributedRecord,
    AttributedWriter, Attribution, DeltaSummary, ATTRIBUTED_HEADER,
};
pub use lpm::LpmIndex;
pub use mrt::{mrt_first_timestamp, parse_mrt_rib, MrtStats};
pub use table::{load_prefix_table, write_prefix_table, TableStats};
pub use timeline::{nearest_snapshot, RibFormat, RibTimeline, SnapshotLoad, SnapshotSource};

#[derive(Debug, thiserror::Error)]
pub enum RibError {
    #[error("MRT record at byte {offset} is truncated")]
    TruncatedRecord { offset: u64 },
    #[error("RIB record at byte {offset} precedes any PEER_INDEX_TABLE")]
    MissingPeerIndex { offset: u64 },
    #[error("MRT record at byte {offset} is malformed: {reason}")]
    MalformedRecord { offset: u64, reason: String },
    #[error("RIB source contains no records")]
    EmptyInput,
    #[error("prefix table lacks a `# captured_at=<ISO-8601>` header")]
    MissingCapturedAt,
    #[error("timeline has no snapshots")]
    EmptyTimeline,
    #[error("two snapshots captured at {0}")]
    DuplicateSnapshot(DateTime<Utc>),
    #[error("records are not sorted by timestamp ({current} follows {previous}); sort the record file first")]
    UnsortedInput { previous: DateTime<Utc>, current: DateTime<Utc> },
    #[error("attributed file line {line}: {message}")]
    BadRow { line: u64, message: String },
    #[error(transparent)]
    Records(#[from] IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<std::convert::Infallible> for RibError {
    fn from(e: std::convert::Infallible) -> Self {
        match e {}
    }
}

/// Origin of a prefix in one snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OriginAs {
    Asn(u32),
    /// The winning path ended in an AS_SET; ASNs sorted and deduplicated.
    SetAmbiguous(Vec<u32>),
    Unrouted,
}

impl OriginAs {
    /// Smallest ASN the origin names; used to break vote ties.
    fn lowest_asn(&self) -> u32 {
        match self {
            OriginAs::Asn(a) => *a,
            OriginAs::SetAmbiguous(set) => set.first().copied().unwrap_or(u32::MAX),
            OriginAs::Unrouted => u32::MAX,
        }
    }

    /// Normalizes an AS_SET: sorted, deduplicated, and a single member
    /// collapses to a plain ASN.
    pub fn from_set(mut asns: Vec<u32>) -> Option<OriginAs> {
        asns.sort_unstable();
        asns.dedup();
        match asns.len() {
            0 => None,
            1 => Some(OriginAs::Asn(asns[0])),
            _ => Some(OriginAs::SetAmbiguous(asns)),
        }
    }
}

impl fmt::Display for OriginAs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OriginAs::Asn(a) => write!(f, "{a}"),
            OriginAs::SetAmbiguous(set) => {
                f.write_str("set:")?;
                for (i, a) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
            OriginAs::Unrouted => f.write_str("unrouted"),
        }
    }
}

fn parse_asn(s: &str) -> Option<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|&a| a > 0)
}

impl FromStr for OriginAs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "unrouted" {
            return Ok(OriginAs::Unrouted);
        }
        if let Some(list) = s.strip_prefix("set:") {
            let asns = list
                .split(',')
                .map(|a| parse_asn(a).ok_or_else(|| format!("bad ASN {a:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            return OriginAs::from_set(asns).ok_or_else(|| format!("empty set {s:?}"));
        }
        parse_asn(s.strip_prefix("AS").unwrap_or(s))
            .map(OriginAs::Asn)
            .ok_or_else(|| format!("bad origin {s:?}"))
    }
}

/// Picks the origin with the most votes. Ties go to the candidate naming
/// the lowest ASN, a plain ASN before a set with the same lowest member.
pub fn plurality(votes: &BTreeMap<OriginAs, u32>) -> Option<OriginAs> {
    votes
        .iter()
        .max_by(|(a, na), (b, nb)| {
            na.cmp(nb)
                .then_with(|| b.lowest_asn().cmp(&a.lowest_asn()))
                .then_with(|| b.cmp(a))
        })
        .map(|(origin, _)| origin.clone())
}

/// One RIB snapshot: a single voted origin per prefix, sorted by prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibSnapshot {
    pub captured_at: DateTime<Utc>,
    pub entries: Vec<(Prefix, OriginAs)>,
}

/// Collects per-peer origin votes for each prefix.
#[derive(Debug, Default)]
pub struct SnapshotBuilder {
    votes: BTreeMap<Prefix, BTreeMap<OriginAs, u32>>,
}

impl SnapshotBuilder {
    pub fn vote(&mut self, prefix: Prefix, origin: OriginAs) {
        *self.votes.entry(prefix).or_default().entry(origin).or_default() += 1;
    }

    pub fn finish(self, captured_at: DateTime<Utc>) -> RibSnapshot {
        let entries = self
            .votes
            .into_iter()
            .filter_map(|(prefix, votes)| plurality(&votes).map(|o| (prefix, o)))
            .collect();
        RibSnapshot { captured_at, entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(v: &[(OriginAs, u32)]) -> BTreeMap<OriginAs, u32> {
        v.iter().cloned().collect()
    }

    #[test]
    fn plurality_rules() {
        use OriginAs::*;
        assert_eq!(plurality(&votes(&[(Asn(64501), 2), (Asn(64502), 1)])), Some(Asn(64501)));
        // tie → lowest ASN
        assert_eq!(plurality(&votes(&[(Asn(64502), 2), (Asn(64501), 2)])), Some(Asn(64501)));
        // set wins outright
        let set = SetAmbiguous(vec![64501, 64502]);
        assert_eq!(plurality(&votes(&[(set.clone(), 3), (Asn(64500), 1)])), Some(set.clone()));
        // tie between set and ASN: the set's lowest member is lower
        assert_eq!(plurality(&votes(&[(set.clone(), 1), (Asn(64503), 1)])), Some(set.clone()));
        // same lowest member: plain ASN first
        assert_eq!(plurality(&votes(&[(set, 1), (Asn(64501), 1)])), Some(Asn(64501)));
        // single voter
        assert_eq!(plurality(&votes(&[(Asn(7922), 1)])), Some(Asn(7922)));
        assert_eq!(plurality(&BTreeMap::new()), None);
    }

    #[test]
    fn origin_text() {
        for text in ["64501", "set:64501,64502", "unrouted", "4200000000"] {
            assert_eq!(text.parse::<OriginAs>().unwrap().to_string(), text);
        }
        assert_eq!("AS7922".parse::<OriginAs>().unwrap(), OriginAs::Asn(7922));
        assert_eq!("set:64502,64501,64502".parse::<OriginAs>().unwrap().to_string(), "set:64501,64502");
        assert_eq!("set:7".parse::<OriginAs>().unwrap(), OriginAs::Asn(7));
        for bad in ["0", "-1", "", "set:", "set:1,x", "4294967296", "+5"] {
            assert!(bad.parse::<OriginAs>().is_err(), "{bad:?}");
        }
    }
}
