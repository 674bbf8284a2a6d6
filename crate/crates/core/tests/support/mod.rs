//! Synthetic corpora and a naive group-by implementation of every report
//! table, sharing nothing with the library beyond its data and table types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use chrono::{DateTime, TimeDelta, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wikiaddr_core::analytics::{format_fraction, format_percent, Cell, ReportTable};
use wikiaddr_core::ingest::{EditRecord, SiteId};
use wikiaddr_core::netaddr::{Oui, OuiDatabase};
use wikiaddr_core::ribstore::{AttributedRecord, OriginAs};

pub type Row = (EditRecord, OriginAs);

// ---- calendar arithmetic, independent of chrono's ISO week support ----

fn civil_from_days(z: i64) -> (i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m)
}

fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = if m > 2 { m - 3 } else { m + 9 };
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

pub fn iso_week(t: &DateTime<Utc>) -> String {
    let d = t.timestamp().div_euclid(86_400);
    let monday_based = (d + 3).rem_euclid(7);
    let thursday = d - monday_based + 3;
    let (y, _) = civil_from_days(thursday);
    let week = (thursday - days_from_civil(y, 1, 1)) / 7 + 1;
    format!("{y:04}-W{week:02}")
}

pub fn month(t: &DateTime<Utc>) -> String {
    let (y, m) = civil_from_days(t.timestamp().div_euclid(86_400));
    format!("{y:04}-{m:02}")
}

// ---- address arithmetic ----

fn bits(ip: &IpAddr) -> u128 {
    match ip {
        IpAddr::V6(a) => u128::from_be_bytes(a.octets()),
        IpAddr::V4(a) => u128::from(u32::from_be_bytes(a.octets())) << 96,
    }
}

fn top_bits(x: u128, len: u32) -> u128 {
    if len == 0 {
        0
    } else {
        x >> (128 - len)
    }
}

fn version(ip: &IpAddr) -> &'static str {
    if ip.is_ipv4() {
        "v4"
    } else {
        "v6"
    }
}

/// MAC inside a modified-EUI-64 interface identifier, if any.
fn naive_mac(ip: &IpAddr) -> Option<[u8; 6]> {
    let IpAddr::V6(a) = ip else { return None };
    let o = a.octets();
    (o[11] == 0xff && o[12] == 0xfe).then(|| [o[8] ^ 0x02, o[9], o[10], o[13], o[14], o[15]])
}

fn frac(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

// ---- synthetic inputs ----

pub const VENDOR_OUIS: [([u8; 3], &str); 5] = [
    ([0x00, 0x1b, 0x63], "Apple, Inc."),
    ([0x00, 0x1a, 0x11], "Google, Inc."),
    ([0x00, 0x0d, 0x93], "Apple, Inc."),
    ([0x3c, 0x5a, 0xb4], "Google, Inc."),
    ([0x00, 0x24, 0xd7], "Intel Corporate"),
];

/// OUIs used in the corpus but absent from the database.
pub const UNKNOWN_OUIS: [[u8; 3]; 2] = [[0xfc, 0xfc, 0x48], [0x02, 0x00, 0x5e]];

pub fn oui_database() -> OuiDatabase {
    let mut db = OuiDatabase::empty();
    for (oui, name) in VENDOR_OUIS {
        db.insert(Oui(oui), name);
    }
    db
}

const SITES: [&str; 6] = ["enwiki", "dewiki", "hiwiki", "srwiki", "jawiktionary", "zh_yuewiki"];

pub fn base_time() -> DateTime<Utc> {
    DateTime::from_timestamp(1_446_336_000, 0).unwrap() // 2015-11-01
}

/// A corpus of `n` attributed records spanning about 15 months, with
/// repeated addresses, shared /48s and /64s, EUI-64 identifiers from known
/// and unknown OUIs, and AS, set and unrouted origins.
pub fn corpus(seed: u64, n: usize) -> Vec<Row> {
    let mut rng = StdRng::seed_from_u64(seed);
    let pool_size = (n / 3).max(8);
    let slash32s = [0x2001_0db8u128, 0x2a02_0100, 0x2600_1700, 0x2405_0200];
    let mut macs: Vec<[u8; 6]> = Vec::new();
    for i in 0..(pool_size / 10).max(4) {
        let oui = if i % 5 == 4 {
            UNKNOWN_OUIS[i % 2]
        } else {
            VENDOR_OUIS[rng.random_range(0..VENDOR_OUIS.len())].0
        };
        macs.push([oui[0], oui[1], oui[2], rng.random(), rng.random(), rng.random()]);
    }
    let pool: Vec<IpAddr> = (0..pool_size)
        .map(|_| {
            if rng.random_bool(0.3) {
                return IpAddr::V4(Ipv4Addr::from(rng.random_range(0xC000_0200u32..0xC000_0400)));
            }
            let net = slash32s[rng.random_range(0..slash32s.len())] << 96;
            let site48 = u128::from(rng.random_range(0u16..64)) << 80;
            let sub56 = u128::from(rng.random_range(0u8..4)) << 72;
            let sub64 = u128::from(rng.random_range(0u8..4)) << 64;
            let iid: u64 = if rng.random_bool(0.25) {
                let m = macs[rng.random_range(0..macs.len())];
                u64::from_be_bytes([m[0] ^ 0x02, m[1], m[2], 0xff, 0xfe, m[3], m[4], m[5]])
            } else {
                rng.random_range(1..0x1_0000)
            };
            IpAddr::V6(Ipv6Addr::from(net | site48 | sub56 | sub64 | u128::from(iid)))
        })
        .collect();
    let origins: Vec<OriginAs> = vec![
        OriginAs::Asn(3320),
        OriginAs::Asn(7922),
        OriginAs::Asn(6939),
        OriginAs::Asn(20940),
        OriginAs::Asn(55836),
        OriginAs::Asn(174),
        OriginAs::Asn(9808),
        OriginAs::SetAmbiguous(vec![64501, 64502]),
        OriginAs::Unrouted,
    ];
    let span = 460 * 86_400;
    (0..n)
        .map(|_| {
            let ip = pool[rng.random_range(0..pool.len())];
            let record = EditRecord {
                timestamp: base_time() + TimeDelta::seconds(rng.random_range(0..span)),
                site: SiteId::new(SITES[rng.random_range(0..SITES.len())]).unwrap(),
                ip,
            };
            // origin follows the /32 mostly, so AS rankings are skewed
            let k = if rng.random_bool(0.8) { (bits(&ip) >> 96) as usize % 7 } else { rng.random_range(0..origins.len()) };
            (record, origins[k].clone())
        })
        .collect()
}

pub fn attributed(rows: &[Row]) -> Vec<AttributedRecord> {
    rows.iter()
        .map(|(r, o)| AttributedRecord { record: r.clone(), origin: o.clone(), delta_s: 0 })
        .collect()
}

/// Hitlist entries `(month, prefix bits, length)` derived from the corpus.
pub fn hitlist_text(rows: &[Row], seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::from("date\taddress\n");
    for (r, _) in rows.iter().filter(|(r, _)| r.ip.is_ipv6()).take(rows.len() / 5) {
        let shift = TimeDelta::days(if rng.random_bool(0.3) { 40 } else { 0 });
        let d = (r.timestamp + shift).format("%Y-%m-%d");
        if rng.random_bool(0.1) {
            out.push_str(&format!("{d}\t{}/32\n", Ipv6Addr::from(bits(&r.ip) & !(u128::MAX >> 32))));
        } else {
            out.push_str(&format!("{d}\t{}\n", r.ip));
        }
    }
    out.push_str("2016-01-01\t2001:db8:ffff::1\nbad\trow\n");
    out
}

struct HitEntry {
    month: String,
    net: u128,
    len: u32,
}

fn parse_hitlist(text: &str) -> Vec<HitEntry> {
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let (d, a) = l.split_once('\t')?;
            if d.len() < 7 || !d.as_bytes()[0].is_ascii_digit() {
                return None;
            }
            let (addr, len) = match a.split_once('/') {
                Some((x, n)) => (x.parse::<IpAddr>().ok()?, n.parse().ok()?),
                None => (a.parse::<IpAddr>().ok()?, 128),
            };
            addr.is_ipv6().then(|| HitEntry { month: d[..7].to_string(), net: bits(&addr), len })
        })
        .collect()
}

// ---- naive tables ----

pub struct OracleOptions<'a> {
    pub top_k: usize,
    pub top_vendors: usize,
    pub oui: &'a OuiDatabase,
    pub hitlist: &'a str,
}

fn table(name: &str, columns: Vec<&'static str>, rows: Vec<Vec<Cell>>) -> ReportTable {
    ReportTable { name: name.to_string(), columns, rows }
}

pub fn weekly_by_version(rows: &[Row]) -> ReportTable {
    let mut sets: BTreeMap<(String, &str), HashSet<IpAddr>> = BTreeMap::new();
    for (r, _) in rows {
        sets.entry((iso_week(&r.timestamp), version(&r.ip))).or_default().insert(r.ip);
    }
    let out = sets.into_iter().map(|((w, v), s)| vec![w.into(), v.into(), (s.len() as u64).into()]).collect();
    table("weekly_by_version", vec!["week", "version", "distinct_ips"], out)
}

pub fn site_fraction(rows: &[Row]) -> ReportTable {
    let mut sets: BTreeMap<String, (HashSet<IpAddr>, HashSet<IpAddr>)> = BTreeMap::new();
    for (r, _) in rows {
        let e = sets.entry(r.site.code().to_string()).or_default();
        if r.ip.is_ipv4() { e.0.insert(r.ip) } else { e.1.insert(r.ip) };
    }
    let out = sets
        .into_iter()
        .map(|(s, (a, b))| {
            let (v4, v6) = (a.len() as u64, b.len() as u64);
            let f = frac(v6, v4 + v6);
            vec![s.into(), v4.into(), v6.into(), format_fraction(f).into(), f.into()]
        })
        .collect();
    table("site_fraction", vec!["site", "n_v4", "n_v6", "frac_v6", "frac_v6_raw"], out)
}

/// Running sets of truncated prefixes, swept in week order.
fn running_counts(rows: &[Row], lengths: &[u32]) -> BTreeMap<String, BTreeMap<u32, u64>> {
    let mut by_week: BTreeMap<String, Vec<u128>> = BTreeMap::new();
    for (r, _) in rows.iter().filter(|(r, _)| r.ip.is_ipv6()) {
        by_week.entry(iso_week(&r.timestamp)).or_default().push(bits(&r.ip));
    }
    let mut seen: BTreeMap<u32, HashSet<u128>> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (week, addrs) in by_week {
        for a in addrs {
            for &l in lengths {
                seen.entry(l).or_default().insert(top_bits(a, l));
            }
        }
        out.insert(week, lengths.iter().map(|&l| (l, seen.get(&l).map_or(0, |s| s.len() as u64))).collect());
    }
    out
}

pub fn cumulative_prefixes(rows: &[Row]) -> ReportTable {
    let mut out = Vec::new();
    for (week, counts) in running_counts(rows, &[48, 56, 64, 128]) {
        for (l, n) in counts {
            out.push(vec![week.clone().into(), u64::from(l).into(), n.into()]);
        }
    }
    table("cumulative_prefixes", vec!["week", "length", "cumulative_distinct"], out)
}

pub fn ratio_per_48(rows: &[Row]) -> ReportTable {
    let out = running_counts(rows, &[48, 56, 64])
        .into_iter()
        .map(|(week, c)| {
            vec![week.into(), frac(c[&56], c[&48]).into(), frac(c[&64], c[&48]).into()]
        })
        .collect();
    table("ratio_per_48", vec!["week", "ratio_56", "ratio_64"], out)
}

pub fn lifetime_days(rows: &[Row]) -> BTreeMap<IpAddr, u64> {
    let mut obs: HashMap<IpAddr, Vec<i64>> = HashMap::new();
    for (r, _) in rows {
        obs.entry(r.ip).or_default().push(r.timestamp.timestamp());
    }
    obs.into_iter()
        .map(|(ip, ts)| {
            let span = ts.iter().max().unwrap() - ts.iter().min().unwrap();
            (ip, (span / 86_400) as u64)
        })
        .collect()
}

pub fn lifetimes(rows: &[Row]) -> ReportTable {
    let mut hist: BTreeMap<(&str, u64), u64> = BTreeMap::new();
    for (ip, d) in lifetime_days(rows) {
        *hist.entry((version(&ip), d)).or_default() += 1;
    }
    let out = hist.into_iter().map(|((v, d), n)| vec![v.into(), d.into(), n.into()]).collect();
    table("lifetimes", vec!["version", "lifetime_days", "count"], out)
}

pub fn weekly_by_as(rows: &[Row], top_k: usize) -> ReportTable {
    let v6: Vec<&Row> = rows.iter().filter(|(r, _)| r.ip.is_ipv6()).collect();
    let mut totals: BTreeMap<u32, HashSet<IpAddr>> = BTreeMap::new();
    for (r, o) in &v6 {
        if let OriginAs::Asn(a) = o {
            totals.entry(*a).or_default().insert(r.ip);
        }
    }
    let mut ranked: Vec<(usize, u32)> = totals.iter().map(|(a, s)| (s.len(), *a)).collect();
    ranked.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let keep: BTreeSet<u32> = ranked.into_iter().take(top_k).map(|(_, a)| a).collect();
    let mut sets: BTreeMap<(String, (u8, u32)), HashSet<IpAddr>> = BTreeMap::new();
    for (r, o) in &v6 {
        let key = match o {
            OriginAs::Asn(a) if keep.contains(a) => (0, *a),
            OriginAs::Asn(_) => continue,
            OriginAs::SetAmbiguous(_) => (1, 0),
            OriginAs::Unrouted => (2, 0),
        };
        sets.entry((iso_week(&r.timestamp), key)).or_default().insert(r.ip);
    }
    let out = sets
        .into_iter()
        .map(|((w, (kind, a)), s)| {
            let label = match kind {
                0 => a.to_string(),
                1 => "set".to_string(),
                _ => "unrouted".to_string(),
            };
            vec![w.into(), label.into(), (s.len() as u64).into()]
        })
        .collect();
    table("weekly_by_as", vec!["week", "asn", "distinct_v6"], out)
}

fn vendor_of(mac: &[u8; 6], db: &OuiDatabase) -> String {
    db.get(&Oui([mac[0], mac[1], mac[2]])).unwrap_or("Unlisted").to_string()
}

pub fn eui64_weekly(rows: &[Row], db: &OuiDatabase, top_vendors: usize) -> ReportTable {
    let mut addrs_by_vendor: BTreeMap<String, HashSet<IpAddr>> = BTreeMap::new();
    for (r, _) in rows {
        if let Some(mac) = naive_mac(&r.ip) {
            addrs_by_vendor.entry(vendor_of(&mac, db)).or_default().insert(r.ip);
        }
    }
    let mut ranked: Vec<(usize, String)> = addrs_by_vendor
        .iter()
        .filter(|(v, _)| v.as_str() != "Unlisted")
        .map(|(v, s)| (s.len(), v.clone()))
        .collect();
    ranked.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let keep: BTreeSet<String> = ranked.into_iter().take(top_vendors).map(|(_, v)| v).collect();
    let mut sets: BTreeMap<(String, String), HashSet<IpAddr>> = BTreeMap::new();
    for (r, _) in rows {
        if let Some(mac) = naive_mac(&r.ip) {
            let v = vendor_of(&mac, db);
            let series = if v == "Unlisted" || keep.contains(&v) { v } else { "other".to_string() };
            sets.entry((iso_week(&r.timestamp), series)).or_default().insert(r.ip);
        }
    }
    let out = sets.into_iter().map(|((w, v), s)| vec![w.into(), v.into(), (s.len() as u64).into()]).collect();
    table("eui64_weekly", vec!["week", "vendor", "distinct_v6"], out)
}

pub fn eui64_fraction(rows: &[Row]) -> ReportTable {
    let mut sets: BTreeMap<String, (HashSet<IpAddr>, HashSet<IpAddr>)> = BTreeMap::new();
    for (r, _) in rows.iter().filter(|(r, _)| r.ip.is_ipv6()) {
        let e = sets.entry(iso_week(&r.timestamp)).or_default();
        e.1.insert(r.ip);
        if naive_mac(&r.ip).is_some() {
            e.0.insert(r.ip);
        }
    }
    let out = sets
        .into_iter()
        .map(|(w, (e, t))| {
            let (e, t) = (e.len() as u64, t.len() as u64);
            let f = frac(e, t);
            vec![w.into(), e.into(), t.into(), format_fraction(f).into(), f.into()]
        })
        .collect();
    table("eui64_fraction", vec!["week", "eui64_v6", "total_v6", "fraction", "fraction_raw"], out)
}

pub fn vendor_counts(rows: &[Row], db: &OuiDatabase) -> ReportTable {
    let mut per: BTreeMap<String, (HashSet<[u8; 6]>, HashSet<IpAddr>)> = BTreeMap::new();
    for (r, _) in rows {
        if let Some(mac) = naive_mac(&r.ip) {
            let e = per.entry(vendor_of(&mac, db)).or_default();
            e.0.insert(mac);
            e.1.insert(r.ip);
        }
    }
    let total_macs: u64 = per.values().map(|(m, _)| m.len() as u64).sum();
    let total_addrs: u64 = per.values().map(|(_, a)| a.len() as u64).sum();
    let mut list: Vec<(String, u64, u64)> =
        per.into_iter().map(|(v, (m, a))| (v, m.len() as u64, a.len() as u64)).collect();
    list.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    list.push(("(total)".to_string(), total_macs, total_addrs));
    let out = list
        .into_iter()
        .map(|(v, m, a)| {
            let pct = 100.0 * frac(m, total_macs);
            vec![v.into(), m.into(), a.into(), format_percent(pct).into(), pct.into()]
        })
        .collect();
    table(
        "vendor_counts",
        vec!["vendor", "distinct_macs", "eui64_addresses", "share_pct", "share_pct_raw"],
        out,
    )
}

pub fn hitlist_overlap(rows: &[Row], hitlist: &str) -> ReportTable {
    let entries = parse_hitlist(hitlist);
    let mut per: BTreeMap<String, HashSet<u128>> = BTreeMap::new();
    for (r, _) in rows.iter().filter(|(r, _)| r.ip.is_ipv6()) {
        per.entry(month(&r.timestamp)).or_default().insert(top_bits(bits(&r.ip), 48));
    }
    let out = per
        .into_iter()
        .map(|(m, s48)| {
            let hit = s48
                .iter()
                .filter(|&&p| {
                    entries.iter().any(|e| {
                        e.month == m
                            && if e.len >= 48 {
                                top_bits(e.net, 48) == p
                            } else {
                                top_bits(e.net, e.len) == p >> (48 - e.len)
                            }
                    })
                })
                .count() as u64;
            let n = s48.len() as u64;
            let f = frac(hit, n);
            vec![m.into(), n.into(), hit.into(), format_fraction(f).into(), f.into()]
        })
        .collect();
    table(
        "hitlist_overlap",
        vec!["month", "wikimedia_48s", "overlap_48s", "overlap_fraction", "overlap_fraction_raw"],
        out,
    )
}

/// All ten tables in catalog order.
pub fn all_tables(rows: &[Row], opts: &OracleOptions<'_>) -> Vec<ReportTable> {
    vec![
        weekly_by_version(rows),
        site_fraction(rows),
        cumulative_prefixes(rows),
        ratio_per_48(rows),
        lifetimes(rows),
        weekly_by_as(rows, opts.top_k),
        eui64_weekly(rows, opts.oui, opts.top_vendors),
        eui64_fraction(rows),
        vendor_counts(rows, opts.oui),
        hitlist_overlap(rows, opts.hitlist),
    ]
}
