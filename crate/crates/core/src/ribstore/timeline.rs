//! Ordered RIB snapshots with lazily built indexes.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::mrt::{mrt_first_timestamp, parse_mrt_rib, MrtStats};
use super::table::{load_prefix_table, table_captured_at, TableStats};
use super::{LpmIndex, RibError, RibSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RibFormat {
    Mrt,
    PrefixTable,
}

impl RibFormat {
    /// Prefix tables start with a `#` header; anything else is taken as MRT.
    pub fn sniff(path: &Path) -> Result<RibFormat, RibError> {
        let mut first = [0u8; 1];
        let n = File::open(path)?.read(&mut first)?;
        if n == 0 {
            return Err(RibError::EmptyInput);
        }
        Ok(if first[0] == b'#' { RibFormat::PrefixTable } else { RibFormat::Mrt })
    }
}

#[derive(Debug, Clone)]
pub enum SnapshotSource {
    Memory(Arc<RibSnapshot>),
    File { path: PathBuf, format: RibFormat },
}

/// What loading one snapshot produced.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotLoad {
    pub source: Option<PathBuf>,
    pub captured_at: DateTime<Utc>,
    pub prefixes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mrt: Option<MrtStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<TableStats>,
}

/// Snapshots in strictly increasing `captured_at` order. Only the most
/// recently used index is kept resident.
#[derive(Debug)]
pub struct RibTimeline {
    entries: Vec<(DateTime<Utc>, SnapshotSource)>,
    times: Vec<DateTime<Utc>>,
    resident: Option<(usize, Arc<LpmIndex>)>,
    loads: Vec<SnapshotLoad>,
}

impl RibTimeline {
    /// Sorts the sources by capture time and rejects duplicates.
    pub fn new(mut entries: Vec<(DateTime<Utc>, SnapshotSource)>) -> Result<RibTimeline, RibError> {
        if entries.is_empty() {
            return Err(RibError::EmptyTimeline);
        }
        entries.sort_by_key(|(t, _)| *t);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(RibError::DuplicateSnapshot(w[0].0));
        }
        let times = entries.iter().map(|(t, _)| *t).collect();
        Ok(RibTimeline { entries, times, resident: None, loads: Vec::new() })
    }

    pub fn from_snapshots(snapshots: Vec<RibSnapshot>) -> Result<RibTimeline, RibError> {
        RibTimeline::new(
            snapshots
                .into_iter()
                .map(|s| (s.captured_at, SnapshotSource::Memory(Arc::new(s))))
                .collect(),
        )
    }

    /// Builds a timeline from RIB files, reading only each file's capture
    /// time up front.
    pub fn from_files<P: AsRef<Path>>(paths: &[P]) -> Result<RibTimeline, RibError> {
        let mut entries = Vec::with_capacity(paths.len());
        for path in paths {
            let path = path.as_ref();
            let format = RibFormat::sniff(path)?;
            let file = BufReader::new(File::open(path)?);
            let at = match format {
                RibFormat::Mrt => mrt_first_timestamp(file)?,
                RibFormat::PrefixTable => table_captured_at(file)?,
            };
            entries.push((at, SnapshotSource::File { path: path.to_path_buf(), format }));
        }
        RibTimeline::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn times(&self) -> &[DateTime<Utc>] {
        &self.times
    }

    /// Snapshots loaded so far, in load order.
    pub fn loads(&self) -> &[SnapshotLoad] {
        &self.loads
    }

    /// Position of the snapshot closest to `t`.
    pub fn nearest(&self, t: DateTime<Utc>) -> usize {
        nearest_snapshot(&self.times, t).expect("timeline is never empty")
    }

    /// Index for snapshot `i`, building it if it is not resident.
    pub fn index(&mut self, i: usize) -> Result<Arc<LpmIndex>, RibError> {
        if let Some((j, idx)) = &self.resident {
            if *j == i {
                return Ok(Arc::clone(idx));
            }
        }
        self.resident = None;
        let (snapshot, load) = match &self.entries[i].1 {
            SnapshotSource::Memory(s) => {
                let load = SnapshotLoad {
                    source: None,
                    captured_at: s.captured_at,
                    prefixes: s.entries.len(),
                    mrt: None,
                    table: None,
                };
                (Arc::clone(s), load)
            }
            SnapshotSource::File { path, format } => {
                let file = BufReader::new(File::open(path)?);
                let (s, mrt, table) = match format {
                    RibFormat::Mrt => {
                        let (s, st) = parse_mrt_rib(file)?;
                        (s, Some(st), None)
                    }
                    RibFormat::PrefixTable => {
                        let (s, st) = load_prefix_table(file)?;
                        (s, None, Some(st))
                    }
                };
                let load = SnapshotLoad {
                    source: Some(path.clone()),
                    captured_at: s.captured_at,
                    prefixes: s.entries.len(),
                    mrt,
                    table,
                };
                (Arc::new(s), load)
            }
        };
        self.loads.push(load);
        let idx = Arc::new(LpmIndex::from_snapshot(&snapshot));
        self.resident = Some((i, Arc::clone(&idx)));
        Ok(idx)
    }
}

/// Index of the time closest to `t` in a sorted slice; ties go to the
/// earlier time. `None` only for an empty slice.
pub fn nearest_snapshot(times: &[DateTime<Utc>], t: DateTime<Utc>) -> Option<usize> {
    if times.is_empty() {
        return None;
    }
    let after = times.partition_point(|&c| c < t);
    if after == 0 {
        return Some(0);
    }
    if after == times.len() {
        return Some(times.len() - 1);
    }
    let before = after - 1;
    if t - times[before] <= times[after] - t {
        Some(before)
    } else {
        Some(after)
    }
}
