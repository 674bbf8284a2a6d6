use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};

use serde::Serialize;
use wikiaddr_core::ingest::read_records;
use wikiaddr_core::ribstore::{attribute, AttributedWriter, RibError, RibTimeline, SnapshotLoad};

use crate::manifest::{digest_file, write_manifest};
use crate::{base_config, AttributeArgs, CliError};

#[derive(Serialize)]
struct AttributeReport<'a> {
    summary: serde_json::Value,
    snapshots: usize,
    loads: &'a [SnapshotLoad],
}

pub fn run(args: AttributeArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    if let Some(r) = args.records {
        cfg.records = vec![r];
    }
    cfg.ribs.extend(args.ribs);
    let records = match cfg.records.as_slice() {
        [] => return Err(CliError::Usage("no inputs: pass --records".to_string())),
        [one] => one.clone(),
        _ => return Err(CliError::Usage("attribute takes exactly one record file".to_string())),
    };
    if cfg.ribs.is_empty() {
        return Err(CliError::Usage("no RIB sources: pass --rib".to_string()));
    }
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;

    let mut timeline = RibTimeline::from_files(&cfg.ribs)?;
    let input = read_records(BufReader::new(File::open(&records)?));
    let partial = cfg.out.join("attributed.tsv.partial");
    let mut writer = AttributedWriter::new(BufWriter::new(File::create(&partial)?))?;
    let mut run = attribute(&mut timeline, input);
    for rec in run.by_ref() {
        match rec {
            Ok(rec) => writer.write(&rec)?,
            Err(e @ RibError::UnsortedInput { .. }) => {
                let _ = fs::remove_file(&partial);
                return Err(CliError::Runtime(format!(
                    "{e} (the merged records.tsv written by `extract` is sorted)"
                )));
            }
            Err(e) => {
                let _ = fs::remove_file(&partial);
                return Err(e.into());
            }
        }
    }
    let summary = run.summary().clone();
    writer.finish()?;
    fs::rename(&partial, cfg.out.join("attributed.tsv"))?;

    let report = AttributeReport { summary: summary.to_json(), snapshots: timeline.len(), loads: timeline.loads() };
    let stats_path = args.common.stats.clone().unwrap_or_else(|| cfg.out.join("attribution_summary.json"));
    let mut f = BufWriter::new(File::create(&stats_path)?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    f.write_all(b"\n")?;
    f.flush()?;

    let mut inputs = vec![digest_file(&records)?];
    for rib in &cfg.ribs {
        inputs.push(digest_file(rib)?);
    }
    let mut outputs = vec!["attributed.tsv".to_string()];
    if let Ok(rel) = stats_path.strip_prefix(&cfg.out) {
        outputs.push(rel.to_string_lossy().into_owned());
    }
    write_manifest(&cfg.out, "attribute", &cfg, inputs, outputs)?;
    eprintln!(
        "wikiaddr: attributed {} records against {} snapshots; {:.1}% unrouted; median |delta| {} s",
        summary.records,
        timeline.len(),
        100.0 * summary.unrouted_fraction(),
        summary.median_abs_delta().map_or("-".to_string(), |d| d.to_string())
    );
    Ok(())
}
