use std::collections::BTreeSet;
use std::io::BufRead;

use chrono::{DateTime, TimeZone, Utc};
use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesRef, BytesStart, Event};
use quick_xml::Reader;

use super::contributor::{ContributorBuilder, ContributorKind};
use super::{EditRecord, IngestError, IngestStats, SiteId};
use crate::netaddr::parse_ip;

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Keep only revisions of pages in these namespaces; `None` keeps all.
    pub namespaces: Option<BTreeSet<i64>>,
    /// Timestamps after this instant are rejected as implausible.
    pub not_after: DateTime<Utc>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { namespaces: None, not_after: Utc::now() }
    }
}

/// Wikipedia went live in January 2001; nothing earlier is a real edit.
pub(crate) fn earliest_edit() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2001, 1, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Root,
    SiteInfo,
    DbName,
    Page,
    Ns,
    Revision,
    Timestamp,
    Contributor,
    Ip,
    Username,
    Other,
}

impl Tag {
    fn child(parent: Option<Tag>, name: &str) -> Tag {
        match (parent, name) {
            (None, _) => Tag::Root,
            (Some(Tag::Root), "siteinfo") => Tag::SiteInfo,
            (Some(Tag::Root), "page") => Tag::Page,
            (Some(Tag::SiteInfo), "dbname") => Tag::DbName,
            (Some(Tag::Page), "ns") => Tag::Ns,
            (Some(Tag::Page), "revision") => Tag::Revision,
            (Some(Tag::Revision), "timestamp") => Tag::Timestamp,
            (Some(Tag::Revision), "contributor") => Tag::Contributor,
            (Some(Tag::Contributor), "ip") => Tag::Ip,
            (Some(Tag::Contributor), "username") => Tag::Username,
            _ => Tag::Other,
        }
    }

    fn captures_text(self) -> bool {
        matches!(
            self,
            Tag::DbName | Tag::Ns | Tag::Timestamp | Tag::Ip | Tag::Username
        )
    }
}

#[derive(Debug, Default)]
struct RevisionState {
    timestamp: Option<String>,
    contributor: Option<ContributorKind>,
    building: Option<ContributorBuilder>,
}

/// Streaming iterator over the anonymous edits of one dump.
///
/// Only the element path, the current revision's small fields and one
/// event buffer are held; revision text is never retained.
pub struct DumpParser<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    site: SiteId,
    options: ParseOptions,
    stack: Vec<Tag>,
    text: String,
    page_ns: i64,
    revision: Option<RevisionState>,
    stats: IngestStats,
    done: bool,
}

/// Starts parsing `xml` (already decompressed) as a dump of `site`.
pub fn parse_dump_stream<R: BufRead>(xml: R, site: SiteId, options: ParseOptions) -> DumpParser<R> {
    DumpParser {
        reader: Reader::from_reader(xml),
        buf: Vec::with_capacity(64 * 1024),
        site,
        options,
        stack: Vec::with_capacity(8),
        text: String::new(),
        page_ns: 0,
        revision: None,
        stats: IngestStats::default(),
        done: false,
    }
}

pub(crate) fn push_entity(out: &mut String, entity: &BytesRef<'_>) {
    match entity.resolve_char_ref() {
        Ok(Some(c)) => out.push(c),
        _ => match resolve_predefined_entity(entity) {
            Some(s) => out.push_str(s),
            None => {
                out.push('&');
                out.push_str(entity);
                out.push(';');
            }
        },
    }
}

impl<R: BufRead> DumpParser<R> {
    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    pub fn site(&self) -> &SiteId {
        &self.site
    }

    fn open(&mut self, e: &BytesStart<'_>) -> Tag {
        let tag = Tag::child(self.stack.last().copied(), e.name().0);
        match tag {
            Tag::Page => {
                self.stats.pages += 1;
                self.page_ns = 0;
            }
            Tag::Revision => self.revision = Some(RevisionState::default()),
            Tag::Contributor => {
                if let Some(rev) = self.revision.as_mut() {
                    rev.building = Some(ContributorBuilder::from_start(e));
                }
            }
            t if t.captures_text() => self.text.clear(),
            _ => {}
        }
        tag
    }

    fn close(&mut self, tag: Tag) -> Option<EditRecord> {
        let text = || self.text.trim().to_string();
        match tag {
            Tag::DbName => {
                if self.text.trim() != self.site.code() {
                    self.stats.siteinfo_mismatch += 1;
                }
            }
            Tag::Ns => self.page_ns = self.text.trim().parse().unwrap_or(0),
            Tag::Timestamp => {
                let value = text();
                if let Some(rev) = self.revision.as_mut() {
                    rev.timestamp = Some(value);
                }
            }
            Tag::Ip | Tag::Username => {
                let value = text();
                if let Some(b) = self.revision.as_mut().and_then(|r| r.building.as_mut()) {
                    if tag == Tag::Ip {
                        b.set_ip(value);
                    } else {
                        b.set_username(value);
                    }
                }
            }
            Tag::Contributor => {
                if let Some(rev) = self.revision.as_mut() {
                    if let Some(b) = rev.building.take() {
                        rev.contributor.get_or_insert(b.finish());
                    }
                }
            }
            Tag::Revision => {
                let rev = self.revision.take().unwrap_or_default();
                return self.finish_revision(rev);
            }
            _ => {}
        }
        None
    }

    fn finish_revision(&mut self, rev: RevisionState) -> Option<EditRecord> {
        let stats = &mut self.stats;
        stats.revisions += 1;
        if let Some(keep) = &self.options.namespaces {
            if !keep.contains(&self.page_ns) {
                stats.namespace_filtered += 1;
                return None;
            }
        }
        let raw_ip = match rev.contributor.unwrap_or(ContributorKind::Deleted) {
            ContributorKind::Registered(_) => {
                stats.registered += 1;
                return None;
            }
            ContributorKind::Deleted => {
                stats.deleted += 1;
                return None;
            }
            ContributorKind::AnonymousIp(text) => text,
        };
        let Ok(ip) = parse_ip(&raw_ip) else {
            stats.malformed_ip += 1;
            return None;
        };
        let timestamp = match rev.timestamp.as_deref() {
            None | Some("") => {
                stats.missing_timestamp += 1;
                return None;
            }
            Some(ts) => match super::parse_timestamp(ts) {
                Some(t) if t >= earliest_edit() && t <= self.options.not_after => t,
                _ => {
                    stats.bad_timestamp += 1;
                    return None;
                }
            },
        };
        stats.anonymous += 1;
        Some(EditRecord { timestamp, site: self.site.clone(), ip })
    }

    fn malformed(&mut self, position: u64, message: String) -> IngestError {
        self.done = true;
        IngestError::StreamMalformed { position, message }
    }

    fn step(&mut self) -> Result<Option<EditRecord>, IngestError> {
        let mut buf = std::mem::take(&mut self.buf);
        let result = self.step_with(&mut buf);
        self.buf = buf;
        result
    }

    fn step_with(&mut self, buf: &mut Vec<u8>) -> Result<Option<EditRecord>, IngestError> {
        loop {
            buf.clear();
            let event = match self.reader.read_event_into(buf) {
                Ok(ev) => ev,
                Err(e) => {
                    let pos = self.reader.error_position();
                    return Err(self.malformed(pos, e.to_string()));
                }
            };
            match event {
                Event::Start(e) => {
                    let tag = self.open(&e);
                    self.stack.push(tag);
                }
                Event::Empty(e) => {
                    let tag = self.open(&e);
                    if let Some(rec) = self.close(tag) {
                        return Ok(Some(rec));
                    }
                }
                Event::End(_) => {
                    // quick-xml has already checked that the name matches.
                    let tag = self.stack.pop().unwrap_or(Tag::Other);
                    if let Some(rec) = self.close(tag) {
                        return Ok(Some(rec));
                    }
                }
                Event::Text(t) => {
                    if self.stack.last().is_some_and(|t| t.captures_text()) {
                        self.text.push_str(&t);
                    }
                }
                Event::CData(t) => {
                    if self.stack.last().is_some_and(|t| t.captures_text()) {
                        self.text.push_str(&t);
                    }
                }
                Event::GeneralRef(r) => {
                    if self.stack.last().is_some_and(|t| t.captures_text()) {
                        push_entity(&mut self.text, &r);
                    }
                }
                Event::Eof => {
                    self.done = true;
                    if !self.stack.is_empty() {
                        let pos = self.reader.buffer_position();
                        return Err(self.malformed(pos, "unexpected end of stream".into()));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }
}

impl<R: BufRead> Iterator for DumpParser<R> {
    type Item = Result<EditRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.step().transpose()
    }
}
