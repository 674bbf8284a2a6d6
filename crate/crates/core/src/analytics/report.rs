use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::net::IpAddr;
use std::str::FromStr;

use super::{
    format_fraction, format_percent, ratio, AnalyticsError, Cell, Hitlist, MonthBin,
    PartialAggregate, ReportTable, WeekBin,
};
use crate::netaddr::{extract_mac, is_eui64, resolve_vendor, version_label, Mac48, OuiDatabase, UNLISTED};
use crate::ribstore::OriginAs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableName {
    WeeklyByVersion,
    SiteFraction,
    CumulativePrefixes,
    RatioPer48,
    Lifetimes,
    WeeklyByAs,
    Eui64Weekly,
    Eui64Fraction,
    VendorCounts,
    HitlistOverlap,
}

impl TableName {
    pub const ALL: [TableName; 10] = [
        TableName::WeeklyByVersion,
        TableName::SiteFraction,
        TableName::CumulativePrefixes,
        TableName::RatioPer48,
        TableName::Lifetimes,
        TableName::WeeklyByAs,
        TableName::Eui64Weekly,
        TableName::Eui64Fraction,
        TableName::VendorCounts,
        TableName::HitlistOverlap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TableName::WeeklyByVersion => "weekly_by_version",
            TableName::SiteFraction => "site_fraction",
            TableName::CumulativePrefixes => "cumulative_prefixes",
            TableName::RatioPer48 => "ratio_per_48",
            TableName::Lifetimes => "lifetimes",
            TableName::WeeklyByAs => "weekly_by_as",
            TableName::Eui64Weekly => "eui64_weekly",
            TableName::Eui64Fraction => "eui64_fraction",
            TableName::VendorCounts => "vendor_counts",
            TableName::HitlistOverlap => "hitlist_overlap",
        }
    }
}

impl std::fmt::Display for TableName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableName {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TableName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| AnalyticsError::UnknownTable { name: s.to_string() })
    }
}

/// Inputs applied only when tables are produced, so partials stay
/// independent of them.
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions<'a> {
    pub top_k: usize,
    pub top_vendors: usize,
    /// Without a database every EUI-64 vendor is `Unlisted`.
    pub oui: Option<&'a OuiDatabase>,
    pub hitlist: Option<&'a Hitlist>,
}

impl Default for ReportOptions<'_> {
    fn default() -> Self {
        ReportOptions { top_k: 5, top_vendors: 8, oui: None, hitlist: None }
    }
}

/// Series key in the per-AS table: ranked ASNs, then the two buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum AsSeries {
    Asn(u32),
    Set,
    Unrouted,
}

impl AsSeries {
    fn label(self) -> String {
        match self {
            AsSeries::Asn(a) => a.to_string(),
            AsSeries::Set => "set".to_string(),
            AsSeries::Unrouted => "unrouted".to_string(),
        }
    }
}

const OTHER_VENDOR: &str = "other";
const TOTAL_ROW: &str = "(total)";

impl PartialAggregate {
    pub fn report(&self, name: TableName, opts: &ReportOptions<'_>) -> Result<ReportTable, AnalyticsError> {
        Ok(match name {
            TableName::WeeklyByVersion => self.weekly_by_version(),
            TableName::SiteFraction => self.site_fraction(),
            TableName::CumulativePrefixes => self.cumulative_prefixes(),
            TableName::RatioPer48 => self.ratio_per_48(),
            TableName::Lifetimes => self.lifetimes(),
            TableName::WeeklyByAs => self.weekly_by_as(opts.top_k)?,
            TableName::Eui64Weekly => self.eui64_weekly(opts.oui, opts.top_vendors),
            TableName::Eui64Fraction => self.eui64_fraction(),
            TableName::VendorCounts => self.vendor_counts(opts.oui),
            TableName::HitlistOverlap => self.hitlist_overlap(opts.hitlist.ok_or(
                AnalyticsError::MissingInput { table: "hitlist_overlap", needs: "a hitlist" },
            )?),
        })
    }

    pub fn weekly_by_version(&self) -> ReportTable {
        let mut counts: BTreeMap<(WeekBin, &str), u64> = BTreeMap::new();
        for (week, ip) in &self.week_ips {
            *counts.entry((*week, version_label(ip))).or_default() += 1;
        }
        let mut t = ReportTable::new("weekly_by_version", vec!["week", "version", "distinct_ips"]);
        for ((week, version), n) in counts {
            t.push(vec![week.to_string().into(), version.into(), n.into()]);
        }
        t
    }

    pub fn site_fraction(&self) -> ReportTable {
        let mut counts: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for (site, ip) in &self.site_ips {
            let c = counts.entry(site.code()).or_default();
            if ip.is_ipv6() {
                c.1 += 1;
            } else {
                c.0 += 1;
            }
        }
        let mut t = ReportTable::new("site_fraction", vec!["site", "n_v4", "n_v6", "frac_v6", "frac_v6_raw"]);
        for (site, (v4, v6)) in counts {
            let frac = ratio(v6, v4 + v6);
            t.push(vec![site.into(), v4.into(), v6.into(), format_fraction(frac).into(), frac.into()]);
        }
        t
    }

    fn v6_weeks(&self) -> BTreeSet<WeekBin> {
        self.week_ips.iter().filter(|(_, ip)| ip.is_ipv6()).map(|(w, _)| *w).collect()
    }

    /// Cumulative distinct prefix counts per (week, length) over `weeks`.
    fn cumulative(&self, weeks: &BTreeSet<WeekBin>) -> BTreeMap<(WeekBin, u8), u64> {
        let mut firsts: BTreeMap<u8, Vec<WeekBin>> = BTreeMap::new();
        for ((len, _), w) in &self.prefix_first_week {
            firsts.entry(*len).or_default().push(*w);
        }
        let mut out = BTreeMap::new();
        for (len, mut ws) in firsts {
            ws.sort_unstable();
            for &week in weeks {
                out.insert((week, len), ws.partition_point(|w| *w <= week) as u64);
            }
        }
        out
    }

    pub fn cumulative_prefixes(&self) -> ReportTable {
        let weeks = self.v6_weeks();
        let cum = self.cumulative(&weeks);
        let mut t = ReportTable::new("cumulative_prefixes", vec!["week", "length", "cumulative_distinct"]);
        for ((week, len), n) in cum {
            if self.config.prefix_lengths.contains(&len) {
                t.push(vec![week.to_string().into(), u64::from(len).into(), n.into()]);
            }
        }
        t
    }

    pub fn ratio_per_48(&self) -> ReportTable {
        let weeks = self.v6_weeks();
        let cum = self.cumulative(&weeks);
        let mut t = ReportTable::new("ratio_per_48", vec!["week", "ratio_56", "ratio_64"]);
        for week in weeks {
            let at = |len| cum.get(&(week, len)).copied().unwrap_or(0);
            let c48 = at(48);
            if c48 == 0 {
                continue;
            }
            t.push(vec![week.to_string().into(), ratio(at(56), c48).into(), ratio(at(64), c48).into()]);
        }
        t
    }

    pub fn lifetimes(&self) -> ReportTable {
        let mut hist: BTreeMap<(&str, u64), u64> = BTreeMap::new();
        for s in self.lifetime_stats() {
            *hist.entry((version_label(&s.ip), s.lifetime_days)).or_default() += 1;
        }
        let mut t = ReportTable::new("lifetimes", vec!["version", "lifetime_days", "count"]);
        for ((version, days), n) in hist {
            t.push(vec![version.into(), days.into(), n.into()]);
        }
        t
    }

    /// Distinct v6 addresses per week for the `top_k` ASNs (ranked by
    /// all-time distinct addresses, ties to the lower ASN), plus `set` and
    /// `unrouted` buckets. Unranked ASNs are not emitted.
    pub fn weekly_by_as(&self, top_k: usize) -> Result<ReportTable, AnalyticsError> {
        if !self.config.attributed {
            return Err(AnalyticsError::MissingInput { table: "weekly_by_as", needs: "attributed records" });
        }
        let mut all_time: HashMap<u32, HashSet<IpAddr>> = HashMap::new();
        for (_, origin, ip) in &self.week_origin_ips {
            if let OriginAs::Asn(a) = origin {
                all_time.entry(*a).or_default().insert(*ip);
            }
        }
        let mut ranked: Vec<(u32, usize)> = all_time.iter().map(|(a, s)| (*a, s.len())).collect();
        ranked.sort_unstable_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        let top: HashSet<u32> = ranked.iter().take(top_k).map(|(a, _)| *a).collect();

        let mut series: BTreeMap<(WeekBin, AsSeries), HashSet<IpAddr>> = BTreeMap::new();
        for (week, origin, ip) in &self.week_origin_ips {
            let key = match origin {
                OriginAs::Asn(a) if top.contains(a) => AsSeries::Asn(*a),
                OriginAs::Asn(_) => continue,
                OriginAs::SetAmbiguous(_) => AsSeries::Set,
                OriginAs::Unrouted => AsSeries::Unrouted,
            };
            series.entry((*week, key)).or_default().insert(*ip);
        }
        let mut t = ReportTable::new("weekly_by_as", vec!["week", "asn", "distinct_v6"]);
        for ((week, key), ips) in series {
            t.push(vec![week.to_string().into(), key.label().into(), (ips.len() as u64).into()]);
        }
        Ok(t)
    }

    /// Vendor of every EUI-64 v6 address ever seen.
    fn eui64_vendors(&self, oui: Option<&OuiDatabase>) -> HashMap<IpAddr, (Mac48, String)> {
        let empty = OuiDatabase::empty();
        let db = oui.unwrap_or(&empty);
        self.span
            .keys()
            .filter(|ip| is_eui64(ip))
            .filter_map(|ip| {
                let mac = extract_mac(ip).ok()?;
                Some((*ip, (mac, resolve_vendor(&mac, db).to_string())))
            })
            .collect()
    }

    /// Distinct EUI-64 v6 addresses per week by vendor. The `top_vendors`
    /// resolved vendors by all-time address count keep their own series
    /// (ties by name), the rest become `other`; `Unlisted` is always kept.
    pub fn eui64_weekly(&self, oui: Option<&OuiDatabase>, top_vendors: usize) -> ReportTable {
        let vendors = self.eui64_vendors(oui);
        let mut all_time: HashMap<&str, u64> = HashMap::new();
        for (_, v) in vendors.values() {
            *all_time.entry(v.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, u64)> = all_time.into_iter().filter(|(v, _)| *v != UNLISTED).collect();
        ranked.sort_unstable_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(y.0)));
        let top: HashSet<&str> = ranked.iter().take(top_vendors).map(|(v, _)| *v).collect();

        let mut counts: BTreeMap<(WeekBin, &str), u64> = BTreeMap::new();
        for (week, ip) in &self.week_ips {
            let Some((_, v)) = vendors.get(ip) else { continue };
            let series = if v == UNLISTED || top.contains(v.as_str()) { v.as_str() } else { OTHER_VENDOR };
            *counts.entry((*week, series)).or_default() += 1;
        }
        let mut t = ReportTable::new("eui64_weekly", vec!["week", "vendor", "distinct_v6"]);
        for ((week, vendor), n) in counts {
            t.push(vec![week.to_string().into(), vendor.into(), n.into()]);
        }
        t
    }

    pub fn eui64_fraction(&self) -> ReportTable {
        let mut counts: BTreeMap<WeekBin, (u64, u64)> = BTreeMap::new();
        for (week, ip) in &self.week_ips {
            if ip.is_ipv6() {
                let c = counts.entry(*week).or_default();
                c.1 += 1;
                if is_eui64(ip) {
                    c.0 += 1;
                }
            }
        }
        let mut t = ReportTable::new(
            "eui64_fraction",
            vec!["week", "eui64_v6", "total_v6", "fraction", "fraction_raw"],
        );
        for (week, (eui, total)) in counts {
            let f = ratio(eui, total);
            t.push(vec![week.to_string().into(), eui.into(), total.into(), format_fraction(f).into(), f.into()]);
        }
        t
    }

    /// Distinct MACs and EUI-64 addresses per vendor over all time, largest
    /// first, then a `(total)` row.
    pub fn vendor_counts(&self, oui: Option<&OuiDatabase>) -> ReportTable {
        let mut per: BTreeMap<String, (HashSet<Mac48>, u64)> = BTreeMap::new();
        for (mac, vendor) in self.eui64_vendors(oui).into_values() {
            let e = per.entry(vendor).or_default();
            e.0.insert(mac);
            e.1 += 1;
        }
        let total_macs: u64 = per.values().map(|(m, _)| m.len() as u64).sum();
        let total_addrs: u64 = per.values().map(|(_, n)| *n).sum();
        let mut rows: Vec<(String, u64, u64)> =
            per.into_iter().map(|(v, (m, n))| (v, m.len() as u64, n)).collect();
        rows.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        let mut t = ReportTable::new(
            "vendor_counts",
            vec!["vendor", "distinct_macs", "eui64_addresses", "share_pct", "share_pct_raw"],
        );
        let mut push = |vendor: String, macs: u64, addrs: u64| {
            let pct = 100.0 * ratio(macs, total_macs);
            t.push(vec![vendor.into(), macs.into(), addrs.into(), format_percent(pct).into(), Cell::Float(pct)]);
        };
        for (vendor, macs, addrs) in rows {
            push(vendor, macs, addrs);
        }
        push(TOTAL_ROW.to_string(), total_macs, total_addrs);
        t
    }

    /// Distinct corpus /48s per month and how many of them the same month's
    /// hitlist contains.
    pub fn hitlist_overlap(&self, hitlist: &Hitlist) -> ReportTable {
        let mut counts: BTreeMap<MonthBin, (u64, u64)> = BTreeMap::new();
        for (month, bits) in &self.month_48s {
            let c = counts.entry(*month).or_default();
            c.0 += 1;
            if hitlist.matches(*month, *bits) {
                c.1 += 1;
            }
        }
        let mut t = ReportTable::new(
            "hitlist_overlap",
            vec!["month", "wikimedia_48s", "overlap_48s", "overlap_fraction", "overlap_fraction_raw"],
        );
        for (month, (n, hit)) in counts {
            let f = ratio(hit, n);
            t.push(vec![month.to_string().into(), n.into(), hit.into(), format_fraction(f).into(), f.into()]);
        }
        t
    }
}
