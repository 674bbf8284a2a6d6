use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use wikiaddr_core::analytics::{AggregateConfig, Hitlist, HitlistStats, PartialAggregate, ReportOptions, TableName};
use wikiaddr_core::ingest::read_records;
use wikiaddr_core::netaddr::{OuiDatabase, OuiLoadStats};
use wikiaddr_core::ribstore::read_attributed;

use crate::manifest::{digest_file, write_manifest};
use crate::{base_config, CliError, ReportInputs};

#[derive(Serialize, Default)]
struct ReportStats {
    records: u64,
    tables: Vec<String>,
    skipped: Vec<String>,
    oui: Option<OuiLoadStats>,
    hitlist: Option<HitlistStats>,
}

fn parse_tables(names: &[String]) -> Result<(BTreeSet<TableName>, bool), CliError> {
    let mut set = BTreeSet::new();
    let mut all = false;
    for n in names {
        if n == "all" {
            all = true;
            set.extend(TableName::ALL);
        } else {
            set.insert(n.parse::<TableName>().map_err(|e| CliError::Usage(e.to_string()))?);
        }
    }
    Ok((set, all))
}

/// Aggregates one input file into a partial.
fn aggregate_file(path: &PathBuf, attributed: bool) -> Result<(PartialAggregate, u64), CliError> {
    let reader = BufReader::new(File::open(path)?);
    let mut n = 0;
    let agg = if attributed {
        let mut agg = PartialAggregate::new(AggregateConfig::attributed());
        for rec in read_attributed(reader) {
            agg.add_attributed(&rec?);
            n += 1;
        }
        agg
    } else {
        let mut agg = PartialAggregate::new(AggregateConfig::default());
        for rec in read_records(reader) {
            agg.add(&rec?);
            n += 1;
        }
        agg
    };
    Ok((agg, n))
}

pub fn run(names: &[String], args: ReportInputs) -> Result<(), CliError> {
    let (tables, all) = parse_tables(names)?;
    let mut cfg = base_config(&args.common)?;
    cfg.records.extend(args.records);
    cfg.attributed.extend(args.attributed);
    if args.oui.is_some() {
        cfg.oui = args.oui;
    }
    if args.hitlist.is_some() {
        cfg.hitlist = args.hitlist;
    }
    cfg.top_k = args.top_k.unwrap_or(cfg.top_k);
    cfg.top_vendors = args.top_vendors.unwrap_or(cfg.top_vendors);
    cfg.format = args.format.unwrap_or(cfg.format);
    let (inputs, attributed) = match (cfg.records.is_empty(), cfg.attributed.is_empty()) {
        (true, true) => return Err(CliError::Usage("no inputs: pass --records or --attributed".to_string())),
        (false, false) => {
            return Err(CliError::Usage("pass either --records or --attributed, not both".to_string()))
        }
        (false, true) => (cfg.records.clone(), false),
        (true, false) => (cfg.attributed.clone(), true),
    };
    cfg.validate()?;

    // Tables asked for by name must have their inputs; `all` skips those
    // that cannot be built.
    let mut stats = ReportStats::default();
    let mut wanted = Vec::new();
    for t in tables {
        let missing = match t {
            TableName::WeeklyByAs if !attributed => Some("attributed records (--attributed)"),
            TableName::HitlistOverlap if cfg.hitlist.is_none() => Some("a hitlist (--hitlist)"),
            _ => None,
        };
        match missing {
            Some(needs) if all => {
                eprintln!("wikiaddr: skipping {t}: needs {needs}");
                stats.skipped.push(t.to_string());
            }
            Some(needs) => return Err(CliError::Usage(format!("table {t} needs {needs}"))),
            None => wanted.push(t),
        }
    }

    let oui = match &cfg.oui {
        Some(p) => {
            let db = OuiDatabase::load(BufReader::new(File::open(p)?))?;
            stats.oui = Some(db.stats());
            Some(db)
        }
        None => None,
    };
    let hitlist = match &cfg.hitlist {
        Some(p) => {
            let (h, s) = Hitlist::load(BufReader::new(File::open(p)?))?;
            stats.hitlist = Some(s);
            Some(h)
        }
        None => None,
    };

    let partials: Vec<(PartialAggregate, u64)> =
        inputs.par_iter().map(|p| aggregate_file(p, attributed)).collect::<Result<_, _>>()?;
    let mut merged: Option<PartialAggregate> = None;
    for (p, n) in partials {
        stats.records += n;
        merged = Some(match merged {
            None => p,
            Some(m) => m.merge(p)?,
        });
    }
    let agg = merged.expect("at least one input");

    fs::create_dir_all(&cfg.out)?;
    let opts = ReportOptions { top_k: cfg.top_k, top_vendors: cfg.top_vendors, oui: oui.as_ref(), hitlist: hitlist.as_ref() };
    let mut outputs = Vec::new();
    for t in wanted {
        let table = agg.report(t, &opts)?;
        if cfg.format.csv() {
            let name = format!("{t}.csv");
            table.write_csv(BufWriter::new(File::create(cfg.out.join(&name))?))?;
            outputs.push(name);
        }
        if cfg.format.json() {
            let name = format!("{t}.json");
            table.write_json(BufWriter::new(File::create(cfg.out.join(&name))?))?;
            outputs.push(name);
        }
        stats.tables.push(t.to_string());
    }

    let stats_path = args.common.stats.clone().unwrap_or_else(|| cfg.out.join("report_stats.json"));
    let mut f = BufWriter::new(File::create(&stats_path)?);
    serde_json::to_writer_pretty(&mut f, &stats)?;
    f.write_all(b"\n")?;
    f.flush()?;
    if let Ok(rel) = stats_path.strip_prefix(&cfg.out) {
        outputs.push(rel.to_string_lossy().into_owned());
    }

    let mut digests = Vec::new();
    for p in inputs.iter().chain(&cfg.oui).chain(&cfg.hitlist) {
        digests.push(digest_file(p)?);
    }
    write_manifest(&cfg.out, "report", &cfg, digests, outputs)?;
    eprintln!("wikiaddr: wrote {} table(s) from {} records", stats.tables.len(), stats.records);
    Ok(())
}
