//! Origin attribution of sorted edit records.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, TimeDelta, Utc};
use serde::Serialize;

use super::{OriginAs, RibError, RibTimeline};
use crate::ingest::{format_timestamp, read_records, EditRecord, RecordReader};

pub const ATTRIBUTED_HEADER: &str = "timestamp\tsite\tip\torigin\tdelta_s";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedRecord {
    pub record: EditRecord,
    pub origin: OriginAs,
    /// Edit time minus the chosen snapshot's capture time, in seconds.
    pub delta_s: i64,
}

impl AttributedRecord {
    pub fn snapshot_at(&self) -> DateTime<Utc> {
        self.record.timestamp - TimeDelta::seconds(self.delta_s)
    }
}

/// Distribution of |delta_s| and unrouted share over an attribution run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeltaSummary {
    pub records: u64,
    pub unrouted: u64,
    pub set_ambiguous: u64,
    abs_delta: BTreeMap<u64, u64>,
}

#[derive(Serialize)]
struct SummaryReport {
    records: u64,
    unrouted: u64,
    set_ambiguous: u64,
    unrouted_fraction: f64,
    abs_delta_s_min: Option<u64>,
    abs_delta_s_median: Option<u64>,
    abs_delta_s_max: Option<u64>,
}

impl DeltaSummary {
    pub fn add(&mut self, rec: &AttributedRecord) {
        self.records += 1;
        match rec.origin {
            OriginAs::Unrouted => self.unrouted += 1,
            OriginAs::SetAmbiguous(_) => self.set_ambiguous += 1,
            OriginAs::Asn(_) => {}
        }
        *self.abs_delta.entry(rec.delta_s.unsigned_abs()).or_default() += 1;
    }

    pub fn min_abs_delta(&self) -> Option<u64> {
        self.abs_delta.keys().next().copied()
    }

    pub fn max_abs_delta(&self) -> Option<u64> {
        self.abs_delta.keys().next_back().copied()
    }

    /// Lower median of |delta_s|.
    pub fn median_abs_delta(&self) -> Option<u64> {
        if self.records == 0 {
            return None;
        }
        let rank = (self.records - 1) / 2;
        let mut seen = 0;
        for (&d, &n) in &self.abs_delta {
            seen += n;
            if seen > rank {
                return Some(d);
            }
        }
        None
    }

    pub fn unrouted_fraction(&self) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.unrouted as f64 / self.records as f64
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SummaryReport {
            records: self.records,
            unrouted: self.unrouted,
            set_ambiguous: self.set_ambiguous,
            unrouted_fraction: self.unrouted_fraction(),
            abs_delta_s_min: self.min_abs_delta(),
            abs_delta_s_median: self.median_abs_delta(),
            abs_delta_s_max: self.max_abs_delta(),
        })
        .expect("plain struct serializes")
    }
}

/// Streaming attribution over records sorted by timestamp.
pub struct Attribution<'t, I> {
    timeline: &'t mut RibTimeline,
    records: I,
    previous: Option<DateTime<Utc>>,
    summary: DeltaSummary,
    failed: bool,
}

pub fn attribute<I, E>(timeline: &mut RibTimeline, records: I) -> Attribution<'_, I::IntoIter>
where
    I: IntoIterator<Item = Result<EditRecord, E>>,
    E: Into<RibError>,
{
    Attribution {
        timeline,
        records: records.into_iter(),
        previous: None,
        summary: DeltaSummary::default(),
        failed: false,
    }
}

impl<I> Attribution<'_, I> {
    pub fn summary(&self) -> &DeltaSummary {
        &self.summary
    }
}

impl<I, E> Attribution<'_, I>
where
    I: Iterator<Item = Result<EditRecord, E>>,
    E: Into<RibError>,
{
    fn attribute_one(&mut self, record: EditRecord) -> Result<AttributedRecord, RibError> {
        if let Some(previous) = self.previous {
            if record.timestamp < previous {
                return Err(RibError::UnsortedInput { previous, current: record.timestamp });
            }
        }
        self.previous = Some(record.timestamp);
        let i = self.timeline.nearest(record.timestamp);
        let index = self.timeline.index(i)?;
        let origin = index.lookup(&record.ip);
        let delta_s = (record.timestamp - self.timeline.times()[i]).num_seconds();
        let out = AttributedRecord { record, origin, delta_s };
        self.summary.add(&out);
        Ok(out)
    }
}

impl<I, E> Iterator for Attribution<'_, I>
where
    I: Iterator<Item = Result<EditRecord, E>>,
    E: Into<RibError>,
{
    type Item = Result<AttributedRecord, RibError>;

    /// Stops after the first error.
    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let out = match self.records.next()? {
            Ok(record) => self.attribute_one(record),
            Err(e) => Err(e.into()),
        };
        self.failed = out.is_err();
        Some(out)
    }
}

pub struct AttributedWriter<W: Write> {
    sink: W,
    rows: u64,
}

impl<W: Write> AttributedWriter<W> {
    pub fn new(mut sink: W) -> std::io::Result<AttributedWriter<W>> {
        writeln!(sink, "{ATTRIBUTED_HEADER}")?;
        Ok(AttributedWriter { sink, rows: 0 })
    }

    pub fn write(&mut self, rec: &AttributedRecord) -> std::io::Result<()> {
        let r = &rec.record;
        writeln!(
            self.sink,
            "{}\t{}\t{}\t{}\t{}",
            format_timestamp(&r.timestamp),
            r.site,
            crate::netaddr::canonical_text(&r.ip),
            rec.origin,
            rec.delta_s
        )?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<u64> {
        self.sink.flush()?;
        Ok(self.rows)
    }
}

pub fn write_attributed<W, I>(records: I, sink: W) -> std::io::Result<u64>
where
    W: Write,
    I: IntoIterator<Item = AttributedRecord>,
{
    let mut w = AttributedWriter::new(sink)?;
    for rec in records {
        w.write(&rec)?;
    }
    w.finish()
}

pub struct AttributedReader<R: BufRead> {
    inner: RecordReader<R>,
}

/// Reads an attributed TSV. The header must carry the attributed columns.
pub fn read_attributed<R: BufRead>(input: R) -> AttributedReader<R> {
    AttributedReader { inner: read_records(input) }
}

impl<R: BufRead> Iterator for AttributedReader<R> {
    type Item = Result<AttributedRecord, RibError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (row, line) = match self.inner.next_line()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e.into())),
        };
        let bad = |message: String| RibError::BadRow { line, message };
        let (record, mut rest) = match crate::ingest::tsv::parse_record_fields(row, line) {
            Ok(v) => v,
            Err(e) => return Some(Err(e.into())),
        };
        let (Some(origin), Some(delta)) = (rest.next(), rest.next()) else {
            return Some(Err(bad(format!("expected origin and delta_s columns: {row:?}"))));
        };
        let origin = match origin.parse::<OriginAs>() {
            Ok(o) => o,
            Err(e) => return Some(Err(bad(e))),
        };
        let delta_s = match delta.parse::<i64>() {
            Ok(d) => d,
            Err(_) => return Some(Err(bad(format!("bad delta_s {delta:?}")))),
        };
        Some(Ok(AttributedRecord { record, origin, delta_s }))
    }
}
