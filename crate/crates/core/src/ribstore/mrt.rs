//! MRT (RFC 6396) `TABLE_DUMP_V2` RIB reader.

use std::collections::BTreeMap;
use std::io::{self, Read};
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use chrono::{DateTime, Utc};
use serde::Serialize;

use super::{OriginAs, RibError, RibSnapshot, SnapshotBuilder};
use crate::netaddr::Prefix;

const HEADER_LEN: usize = 12;

const TABLE_DUMP_V2: u16 = 13;
const PEER_INDEX_TABLE: u16 = 1;
const RIB_IPV4_UNICAST: u16 = 2;
const RIB_IPV6_UNICAST: u16 = 4;

const ATTR_EXTENDED_LENGTH: u8 = 0x10;
const ATTR_AS_PATH: u8 = 2;
const ATTR_AS4_PATH: u8 = 17;

const AS_SET: u8 = 1;
const AS_SEQUENCE: u8 = 2;
const AS_CONFED_SEQUENCE: u8 = 3;
const AS_CONFED_SET: u8 = 4;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MrtStats {
    pub records: u64,
    pub peer_index_tables: u64,
    pub rib_records: u64,
    pub rib_entries: u64,
    /// Entries whose attributes could not be decoded; skipped.
    pub malformed_attributes: u64,
    /// Entries naming a peer outside the peer index; skipped.
    pub bad_peer_index: u64,
    /// Entries with no usable AS_PATH origin (absent or empty path).
    pub no_origin: u64,
    pub as4_path_skipped: u64,
    /// Records of other types, keyed `type/subtype`.
    pub skipped: BTreeMap<String, u64>,
}

/// Bounds-checked big-endian cursor over one record body.
struct Body<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Body<'a> {
    fn new(data: &'a [u8]) -> Self {
        Body { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.data.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn is_empty(&self) -> bool {
        self.pos >= self.data.len()
    }
}

/// Fills `buf`, returning how many bytes were available before EOF.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

struct RawRecord {
    offset: u64,
    timestamp: u32,
    kind: u16,
    subtype: u16,
    body: Vec<u8>,
}

fn next_record<R: Read>(r: &mut R, offset: u64) -> Result<Option<RawRecord>, RibError> {
    let mut header = [0u8; HEADER_LEN];
    match read_full(r, &mut header)? {
        0 => return Ok(None),
        HEADER_LEN => {}
        _ => return Err(RibError::TruncatedRecord { offset }),
    }
    let timestamp = u32::from_be_bytes([header[0], header[1], header[2], header[3]]);
    let kind = u16::from_be_bytes([header[4], header[5]]);
    let subtype = u16::from_be_bytes([header[6], header[7]]);
    let len = u32::from_be_bytes([header[8], header[9], header[10], header[11]]) as usize;
    let mut body = Vec::new();
    let got = r.take(len as u64).read_to_end(&mut body)?;
    if got < len {
        return Err(RibError::TruncatedRecord { offset });
    }
    Ok(Some(RawRecord { offset, timestamp, kind, subtype, body }))
}

/// Timestamp of the first MRT record, without reading further.
pub fn mrt_first_timestamp<R: Read>(mut r: R) -> Result<DateTime<Utc>, RibError> {
    let mut ts = [0u8; 4];
    match read_full(&mut r, &mut ts)? {
        0 => Err(RibError::EmptyInput),
        4 => Ok(DateTime::from_timestamp(i64::from(u32::from_be_bytes(ts)), 0).expect("u32 seconds")),
        _ => Err(RibError::TruncatedRecord { offset: 0 }),
    }
}

/// Returns the number of peers in a PEER_INDEX_TABLE body.
fn parse_peer_index(body: &[u8], offset: u64) -> Result<u16, RibError> {
    let bad = |reason: &str| RibError::MalformedRecord { offset, reason: reason.to_string() };
    let mut b = Body::new(body);
    b.u32().ok_or_else(|| bad("collector id"))?;
    let view_len = b.u16().ok_or_else(|| bad("view name length"))?;
    b.take(usize::from(view_len)).ok_or_else(|| bad("view name"))?;
    let count = b.u16().ok_or_else(|| bad("peer count"))?;
    for _ in 0..count {
        let peer_type = b.u8().ok_or_else(|| bad("peer type"))?;
        b.u32().ok_or_else(|| bad("peer BGP id"))?;
        let ip_len = if peer_type & 0x01 != 0 { 16 } else { 4 };
        b.take(ip_len).ok_or_else(|| bad("peer address"))?;
        let as_len = if peer_type & 0x02 != 0 { 4 } else { 2 };
        b.take(as_len).ok_or_else(|| bad("peer AS"))?;
    }
    Ok(count)
}

enum EntryOrigin {
    Origin(OriginAs),
    NoOrigin,
    Malformed,
}

/// Origin AS from an AS_PATH attribute value (4-byte ASNs): the last ASN of
/// the final AS_SEQUENCE, or the whole set if the path ends in an AS_SET.
/// Confederation segments are not origins and are passed over.
fn origin_from_as_path(value: &[u8]) -> EntryOrigin {
    let mut b = Body::new(value);
    let mut last: Option<OriginAs> = None;
    while !b.is_empty() {
        let (Some(seg_type), Some(count)) = (b.u8(), b.u8()) else {
            return EntryOrigin::Malformed;
        };
        let Some(raw) = b.take(usize::from(count) * 4) else {
            return EntryOrigin::Malformed;
        };
        let asns: Vec<u32> = raw
            .chunks_exact(4)
            .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        match seg_type {
            AS_SEQUENCE => {
                if let Some(&a) = asns.last() {
                    last = Some(OriginAs::Asn(a));
                }
            }
            AS_SET => {
                if let Some(set) = OriginAs::from_set(asns) {
                    last = Some(set);
                }
            }
            AS_CONFED_SEQUENCE | AS_CONFED_SET => {}
            _ => return EntryOrigin::Malformed,
        }
    }
    match last {
        Some(OriginAs::Asn(0)) => EntryOrigin::Malformed,
        Some(OriginAs::SetAmbiguous(ref s)) if s.contains(&0) => EntryOrigin::Malformed,
        Some(o) => EntryOrigin::Origin(o),
        None => EntryOrigin::NoOrigin,
    }
}

fn origin_from_attributes(attrs: &[u8], stats: &mut MrtStats) -> EntryOrigin {
    let mut b = Body::new(attrs);
    let mut found = None;
    while !b.is_empty() {
        let (Some(flags), Some(kind)) = (b.u8(), b.u8()) else {
            return EntryOrigin::Malformed;
        };
        let len = if flags & ATTR_EXTENDED_LENGTH != 0 {
            b.u16().map(usize::from)
        } else {
            b.u8().map(usize::from)
        };
        let Some(value) = len.and_then(|l| b.take(l)) else {
            return EntryOrigin::Malformed;
        };
        match kind {
            ATTR_AS_PATH if found.is_none() => found = Some(origin_from_as_path(value)),
            ATTR_AS4_PATH => stats.as4_path_skipped += 1,
            _ => {}
        }
    }
    found.unwrap_or(EntryOrigin::NoOrigin)
}

fn parse_rib(
    rec: &RawRecord,
    peers: u16,
    v6: bool,
    builder: &mut SnapshotBuilder,
    stats: &mut MrtStats,
) -> Result<(), RibError> {
    let offset = rec.offset;
    let bad = |reason: &str| RibError::MalformedRecord { offset, reason: reason.to_string() };
    let mut b = Body::new(&rec.body);
    b.u32().ok_or_else(|| bad("sequence number"))?;
    let plen = b.u8().ok_or_else(|| bad("prefix length"))?;
    let max = if v6 { 128 } else { 32 };
    if plen > max {
        return Err(bad("prefix length out of range"));
    }
    let raw = b.take(usize::from(plen).div_ceil(8)).ok_or_else(|| bad("prefix"))?;
    let addr = if v6 {
        let mut o = [0u8; 16];
        o[..raw.len()].copy_from_slice(raw);
        IpAddr::V6(Ipv6Addr::from(o))
    } else {
        let mut o = [0u8; 4];
        o[..raw.len()].copy_from_slice(raw);
        IpAddr::V4(Ipv4Addr::from(o))
    };
    let prefix = Prefix::new(addr, plen).map_err(|e| bad(&e.to_string()))?;
    let count = b.u16().ok_or_else(|| bad("entry count"))?;
    for _ in 0..count {
        let peer = b.u16().ok_or_else(|| bad("peer index"))?;
        b.u32().ok_or_else(|| bad("originated time"))?;
        let attr_len = b.u16().ok_or_else(|| bad("attribute length"))?;
        let attrs = b.take(usize::from(attr_len)).ok_or_else(|| bad("attributes"))?;
        stats.rib_entries += 1;
        if peer >= peers {
            stats.bad_peer_index += 1;
            continue;
        }
        match origin_from_attributes(attrs, stats) {
            EntryOrigin::Origin(o) => builder.vote(prefix, o),
            EntryOrigin::NoOrigin => stats.no_origin += 1,
            EntryOrigin::Malformed => stats.malformed_attributes += 1,
        }
    }
    Ok(())
}

/// Reads a whole MRT RIB dump into a voted snapshot.
///
/// `captured_at` is the first record's header timestamp. Record types other
/// than the TABLE_DUMP_V2 peer index and unicast RIBs are skipped and
/// counted. A truncated record aborts with the byte offset of its header.
pub fn parse_mrt_rib<R: Read>(mut input: R) -> Result<(RibSnapshot, MrtStats), RibError> {
    let mut stats = MrtStats::default();
    let mut builder = SnapshotBuilder::default();
    let mut peers: Option<u16> = None;
    let mut captured_at = None;
    let mut offset = 0u64;
    while let Some(rec) = next_record(&mut input, offset)? {
        offset += (HEADER_LEN + rec.body.len()) as u64;
        stats.records += 1;
        captured_at.get_or_insert(rec.timestamp);
        match (rec.kind, rec.subtype) {
            (TABLE_DUMP_V2, PEER_INDEX_TABLE) => {
                peers = Some(parse_peer_index(&rec.body, rec.offset)?);
                stats.peer_index_tables += 1;
            }
            (TABLE_DUMP_V2, RIB_IPV6_UNICAST | RIB_IPV4_UNICAST) => {
                let Some(peers) = peers else {
                    return Err(RibError::MissingPeerIndex { offset: rec.offset });
                };
                stats.rib_records += 1;
                let v6 = rec.subtype == RIB_IPV6_UNICAST;
                parse_rib(&rec, peers, v6, &mut builder, &mut stats)?;
            }
            (kind, subtype) => {
                *stats.skipped.entry(format!("{kind}/{subtype}")).or_default() += 1;
            }
        }
    }
    let ts = captured_at.ok_or(RibError::EmptyInput)?;
    let captured_at = DateTime::from_timestamp(i64::from(ts), 0).expect("u32 seconds");
    Ok((builder.finish(captured_at), stats))
}
