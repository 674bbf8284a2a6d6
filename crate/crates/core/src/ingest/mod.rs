//! Anonymous-edit extraction from MediaWiki `pages-meta-history` XML.
//!
//! The parser streams decompressed XML and yields one [`EditRecord`] per
//! `<revision>` whose contributor is an `<ip>`. Memory use is bounded by the
//! largest single revision, not by the dump size.

mod contributor;
mod parser;
mod site;
pub(crate) mod tsv;

use std::net::IpAddr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use contributor::{classify_contributor, ContributorKind};
pub use parser::{parse_dump_stream, DumpParser, ParseOptions};
pub use site::{Family, SiteId};
pub use tsv::{
    format_timestamp, parse_timestamp, read_records, write_records, RecordReader, RecordWriter,
    RECORD_HEADER,
};

/// One anonymous edit.
///
/// Ordering is `(timestamp, site, ip)`, the sort order of merged record files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EditRecord {
    pub timestamp: DateTime<Utc>,
    pub site: SiteId,
    pub ip: IpAddr,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed XML at byte {position}: {message}")]
    StreamMalformed { position: u64, message: String },
    #[error("invalid site id {0:?}")]
    BadSiteId(String),
    #[error("writing records: {0}")]
    SinkFailure(#[source] std::io::Error),
    #[error("record file line {line}: {message}")]
    BadRow { line: u64, message: String },
    #[error("record file is missing the `timestamp\\tsite\\tip` header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-file revision accounting.
///
/// `revisions` always equals the sum of `anonymous`, `registered`,
/// `deleted`, `malformed_ip`, `missing_timestamp`, `bad_timestamp` and
/// `namespace_filtered`. `siteinfo_mismatch` is a warning, not a revision
/// outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub pages: u64,
    pub revisions: u64,
    pub anonymous: u64,
    pub registered: u64,
    pub deleted: u64,
    pub malformed_ip: u64,
    pub missing_timestamp: u64,
    pub bad_timestamp: u64,
    pub namespace_filtered: u64,
    pub siteinfo_mismatch: u64,
}

impl IngestStats {
    pub fn skipped(&self) -> u64 {
        self.registered
            + self.deleted
            + self.malformed_ip
            + self.missing_timestamp
            + self.bad_timestamp
            + self.namespace_filtered
    }

    pub fn is_conserved(&self) -> bool {
        self.anonymous + self.skipped() == self.revisions
    }

    pub fn merge(&mut self, other: &IngestStats) {
        self.pages += other.pages;
        self.revisions += other.revisions;
        self.anonymous += other.anonymous;
        self.registered += other.registered;
        self.deleted += other.deleted;
        self.malformed_ip += other.malformed_ip;
        self.missing_timestamp += other.missing_timestamp;
        self.bad_timestamp += other.bad_timestamp;
        self.namespace_filtered += other.namespace_filtered;
        self.siteinfo_mismatch += other.siteinfo_mismatch;
    }
}
