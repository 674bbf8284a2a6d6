use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDateTime, Utc};

use super::{EditRecord, IngestError, SiteId};
use crate::netaddr::{canonical_text, parse_ip};

pub const RECORD_HEADER: &str = "timestamp\tsite\tip";

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

/// Parses ISO-8601 UTC timestamps as found in dumps; sub-second precision is
/// dropped.
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let t = match NaiveDateTime::parse_from_str(text, TIMESTAMP_FORMAT) {
        Ok(naive) => naive.and_utc(),
        Err(_) => DateTime::parse_from_rfc3339(text).ok()?.with_timezone(&Utc),
    };
    Some(DateTime::from_timestamp(t.timestamp(), 0).expect("in range"))
}

/// Incremental writer for the record TSV interchange format.
pub struct RecordWriter<W: Write> {
    sink: W,
    rows: u64,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut sink: W) -> Result<RecordWriter<W>, IngestError> {
        writeln!(sink, "{RECORD_HEADER}").map_err(IngestError::SinkFailure)?;
        Ok(RecordWriter { sink, rows: 0 })
    }

    pub fn write(&mut self, rec: &EditRecord) -> Result<(), IngestError> {
        writeln!(
            self.sink,
            "{}\t{}\t{}",
            format_timestamp(&rec.timestamp),
            rec.site,
            canonical_text(&rec.ip)
        )
        .map_err(IngestError::SinkFailure)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(mut self) -> Result<u64, IngestError> {
        self.sink.flush().map_err(IngestError::SinkFailure)?;
        Ok(self.rows)
    }
}

/// Writes the header and one row per record; returns the row count.
pub fn write_records<W, I>(records: I, sink: W) -> Result<u64, IngestError>
where
    W: Write,
    I: IntoIterator<Item = EditRecord>,
{
    let mut w = RecordWriter::new(sink)?;
    for rec in records {
        w.write(&rec)?;
    }
    w.finish()
}

/// Reads a record TSV. Extra trailing columns (as in attributed files) are
/// ignored, so the same reader serves both.
pub struct RecordReader<R: BufRead> {
    input: R,
    line: String,
    line_no: u64,
    header_checked: bool,
}

pub fn read_records<R: BufRead>(input: R) -> RecordReader<R> {
    RecordReader { input, line: String::new(), line_no: 0, header_checked: false }
}

/// Splits one record row into its fields, leaving any extra columns.
pub(crate) fn parse_record_fields<'a>(
    row: &'a str,
    line: u64,
) -> Result<(EditRecord, std::str::Split<'a, char>), IngestError> {
    let bad = |message: String| IngestError::BadRow { line, message };
    let mut fields = row.split('\t');
    let (Some(ts), Some(site), Some(ip)) = (fields.next(), fields.next(), fields.next()) else {
        return Err(bad(format!("expected at least 3 columns: {row:?}")));
    };
    let timestamp = parse_timestamp(ts).ok_or_else(|| bad(format!("bad timestamp {ts:?}")))?;
    let site = SiteId::new(site).map_err(|e| bad(e.to_string()))?;
    let ip = parse_ip(ip).map_err(|e| bad(e.to_string()))?;
    Ok((EditRecord { timestamp, site, ip }, fields))
}

impl<R: BufRead> RecordReader<R> {
    /// Next non-empty data line, with its 1-based line number.
    pub(crate) fn next_line(&mut self) -> Option<Result<(&str, u64), IngestError>> {
        loop {
            self.line.clear();
            match self.input.read_line(&mut self.line) {
                Ok(0) => {
                    if !self.header_checked {
                        self.header_checked = true;
                        return Some(Err(IngestError::MissingHeader));
                    }
                    return None;
                }
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let len = self.line.trim_end_matches(['\n', '\r']).len();
            if !self.header_checked {
                self.header_checked = true;
                if !self.line[..len].starts_with(RECORD_HEADER) {
                    return Some(Err(IngestError::MissingHeader));
                }
                continue;
            }
            if len == 0 {
                continue;
            }
            let row = &self.line[..len];
            return Some(Ok((row, self.line_no)));
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<EditRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (row, line) = match self.next_line()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(parse_record_fields(row, line).map(|(rec, _)| rec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::net::{IpAddr, Ipv6Addr};

    fn rec(ts: &str, site: &str, ip: &str) -> EditRecord {
        EditRecord {
            timestamp: parse_timestamp(ts).unwrap(),
            site: SiteId::new(site).unwrap(),
            ip: parse_ip(ip).unwrap(),
        }
    }

    #[test]
    fn empty_stream_writes_header_only() {
        let mut out = Vec::new();
        assert_eq!(write_records(Vec::new(), &mut out).unwrap(), 0);
        assert_eq!(out, b"timestamp\tsite\tip\n");
    }

    #[test]
    fn rows_in_input_order() {
        let recs = vec![
            rec("2015-06-01T12:00:00Z", "enwiki", "2001:DB8::1"),
            rec("2003-01-01T00:00:00Z", "dewiki", "192.0.2.7"),
            rec("2010-02-03T04:05:06Z", "hiwiki", "2001:db8:0:0:0:0:0:2"),
        ];
        let mut out = Vec::new();
        assert_eq!(write_records(recs.clone(), &mut out).unwrap(), 3);
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "timestamp\tsite\tip\n\
             2015-06-01T12:00:00Z\tenwiki\t2001:db8::1\n\
             2003-01-01T00:00:00Z\tdewiki\t192.0.2.7\n\
             2010-02-03T04:05:06Z\thiwiki\t2001:db8::2\n"
        );
        let back: Vec<_> = read_records(&out[..]).collect::<Result<_, _>>().unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn timestamps() {
        let t = parse_timestamp("2015-06-01T12:00:00Z").unwrap();
        assert_eq!(format_timestamp(&t), "2015-06-01T12:00:00Z");
        let t = parse_timestamp("2015-06-01T12:00:00.750+00:00").unwrap();
        assert_eq!(format_timestamp(&t), "2015-06-01T12:00:00Z");
        assert!(parse_timestamp("2015-06-01").is_none());
        assert!(parse_timestamp("").is_none());
    }

    #[test]
    fn reader_errors() {
        assert!(matches!(
            read_records(&b""[..]).next(),
            Some(Err(IngestError::MissingHeader))
        ));
        assert!(matches!(
            read_records(&b"ts\tsite\tip\n"[..]).next(),
            Some(Err(IngestError::MissingHeader))
        ));
        let bad = b"timestamp\tsite\tip\n2015-06-01T12:00:00Z\tenwiki\tnope\n";
        assert!(matches!(
            read_records(&bad[..]).next(),
            Some(Err(IngestError::BadRow { line: 2, .. }))
        ));
        let ok = b"timestamp\tsite\tip\torigin\tdelta_s\n\n2015-06-01T12:00:00Z\tenwiki\t::1\t64501\t-3\n";
        let recs: Vec<_> = read_records(&ok[..]).collect::<Result<_, _>>().unwrap();
        assert_eq!(recs.len(), 1);
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in prop::collection::vec((978_307_200i64..1_900_000_000, 0usize..3, any::<u128>()), 0..50)
        ) {
            let sites = ["enwiki", "dewiki", "aswikiquote"];
            let recs: Vec<EditRecord> = rows
                .into_iter()
                .map(|(secs, s, raw)| EditRecord {
                    timestamp: DateTime::from_timestamp(secs, 0).unwrap(),
                    site: SiteId::new(sites[s]).unwrap(),
                    ip: if raw % 3 == 0 {
                        IpAddr::V4((raw as u32).into())
                    } else {
                        IpAddr::V6(Ipv6Addr::from(raw))
                    },
                })
                .collect();
            let mut out = Vec::new();
            write_records(recs.clone(), &mut out).unwrap();
            let back: Vec<_> = read_records(&out[..]).collect::<Result<_, _>>().unwrap();
            prop_assert_eq!(back, recs);
        }
    }
}
