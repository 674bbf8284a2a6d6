//! Prefix-table TSV: `# captured_at=<ISO-8601>` then `prefix<TAB>origin` rows.

use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::{OriginAs, RibError, RibSnapshot, SnapshotBuilder};
use crate::ingest::{format_timestamp, parse_timestamp};
use crate::netaddr::Prefix;

const CAPTURED_AT: &str = "captured_at=";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TableStats {
    pub rows: u64,
    pub bad_rows: u64,
    /// Rows repeating an earlier prefix; resolved by plurality.
    pub duplicates: u64,
}

fn header_value(line: &str) -> Option<&str> {
    line.strip_prefix('#')?.trim().strip_prefix(CAPTURED_AT).map(str::trim)
}

/// Reads only the `captured_at` header, stopping at the first data row.
pub(crate) fn table_captured_at<R: BufRead>(input: R) -> Result<DateTime<Utc>, RibError> {
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if let Some(v) = header_value(line) {
            return parse_timestamp(v).ok_or(RibError::MissingCapturedAt);
        }
        if !line.is_empty() && !line.starts_with('#') {
            break;
        }
    }
    Err(RibError::MissingCapturedAt)
}

/// Loads a prefix table. Unparseable rows are skipped and counted; the
/// `captured_at` header is mandatory and may appear among any leading
/// comment lines.
pub fn load_prefix_table<R: BufRead>(input: R) -> Result<(RibSnapshot, TableStats), RibError> {
    let mut stats = TableStats::default();
    let mut builder = SnapshotBuilder::default();
    let mut captured_at = None;
    let mut seen = std::collections::HashSet::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(v) = header_value(line) {
                if captured_at.is_none() {
                    captured_at = Some(parse_timestamp(v).ok_or(RibError::MissingCapturedAt)?);
                }
            }
            continue;
        }
        stats.rows += 1;
        let mut fields = line.split('\t');
        let parsed = match (fields.next(), fields.next()) {
            (Some(p), Some(o)) => p.trim().parse::<Prefix>().ok().zip(o.trim().parse::<OriginAs>().ok()),
            _ => None,
        };
        match parsed {
            Some((_, OriginAs::Unrouted)) | None => stats.bad_rows += 1,
            Some((prefix, origin)) => {
                if !seen.insert(prefix) {
                    stats.duplicates += 1;
                }
                builder.vote(prefix, origin);
            }
        }
    }
    let captured_at = captured_at.ok_or(RibError::MissingCapturedAt)?;
    Ok((builder.finish(captured_at), stats))
}

/// Writes a snapshot as a prefix table, rows sorted by prefix.
pub fn write_prefix_table<W: Write>(snapshot: &RibSnapshot, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "# {CAPTURED_AT}{}", format_timestamp(&snapshot.captured_at))?;
    let mut rows: Vec<_> = snapshot.entries.iter().collect();
    rows.sort();
    for (prefix, origin) in rows {
        writeln!(sink, "{prefix}\t{origin}")?;
    }
    sink.flush()
}
