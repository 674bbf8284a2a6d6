use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use wikiaddr_core::extsort::{sort_records, SortOptions};
use wikiaddr_core::ingest::{parse_dump_stream, read_records, IngestStats, ParseOptions, RecordWriter, SiteId};

use crate::manifest::{write_manifest, HashingReader, InputDigest};
use crate::{base_config, CliError, ExtractArgs};

#[derive(Debug, Serialize)]
struct FileReport {
    input: String,
    site: String,
    output: Option<String>,
    records: u64,
    stats: IngestStats,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExtractReport {
    files: Vec<FileReport>,
    totals: IngestStats,
    merged_records: u64,
    sort_runs: usize,
}

struct Outcome {
    report: FileReport,
    digest: Option<InputDigest>,
    tsv: Option<PathBuf>,
}

fn open_input(path: &Path) -> io::Result<Box<dyn Read + Send>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        Ok(Box::new(File::open(path)?))
    }
}

fn output_name(input: &Path) -> String {
    if input.as_os_str() == "-" {
        "stdin.tsv".to_string()
    } else {
        format!("{}.tsv", input.file_name().map_or_else(|| "input".into(), |n| n.to_string_lossy()))
    }
}

fn extract_one(input: &Path, site: SiteId, options: &ParseOptions, tsv: &Path) -> Outcome {
    let name = input.to_string_lossy().into_owned();
    let mut report = FileReport {
        input: name.clone(),
        site: site.to_string(),
        output: None,
        records: 0,
        stats: IngestStats::default(),
        error: None,
    };
    let partial = tsv.with_extension("tsv.partial");
    let result = (|| -> Result<InputDigest, CliError> {
        let mut reader = HashingReader::new(open_input(input)?);
        let records = {
            let buffered = BufReader::with_capacity(1 << 20, &mut reader);
            let mut parser = parse_dump_stream(buffered, site, options.clone());
            let mut writer = RecordWriter::new(BufWriter::new(File::create(&partial)?))?;
            let outcome = parser.by_ref().try_for_each(|rec| writer.write(&rec?));
            report.stats = *parser.stats();
            outcome?;
            writer.finish()?
        };
        report.records = records;
        fs::rename(&partial, tsv)?;
        Ok(reader.finish(&name))
    })();
    match result {
        Ok(digest) => {
            report.output = Some(tsv.to_string_lossy().into_owned());
            Outcome { report, digest: Some(digest), tsv: Some(tsv.to_path_buf()) }
        }
        Err(e) => {
            let _ = fs::remove_file(&partial);
            report.error = Some(e.to_string());
            Outcome { report, digest: None, tsv: None }
        }
    }
}

pub fn run(args: ExtractArgs) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    cfg.dumps.extend(args.dumps);
    if args.namespaces.is_some() {
        cfg.namespaces = args.namespaces;
    }
    cfg.keep_going |= args.keep_going;
    if let Some(n) = args.sort_run_len {
        cfg.sort_run_len = n.max(1);
    }
    for s in &args.sites {
        let (file, code) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--site expects FILE=CODE, got {s:?}")))?;
        cfg.sites.insert(file.to_string(), code.to_string());
    }
    if cfg.dumps.is_empty() {
        return Err(CliError::Usage("no inputs".to_string()));
    }
    cfg.validate()?;

    let mut jobs = Vec::new();
    let mut names = BTreeSet::new();
    for dump in &cfg.dumps {
        let site = match cfg.site_for(dump) {
            Some(code) => SiteId::new(code),
            None if dump.as_os_str() == "-" => {
                return Err(CliError::Usage("standard input needs a site: --site -=CODE".to_string()))
            }
            None => SiteId::from_dump_filename(dump),
        }
        .map_err(|e| CliError::Usage(format!("{}: {e}", dump.display())))?;
        let name = output_name(dump);
        if !names.insert(name.clone()) {
            return Err(CliError::Usage(format!("two inputs share the file name {name:?}")));
        }
        jobs.push((dump.clone(), site, name));
    }

    let records_dir = cfg.out.join("records");
    fs::create_dir_all(&records_dir)?;
    let options = ParseOptions { namespaces: cfg.namespaces.clone(), ..ParseOptions::default() };
    let outcomes: Vec<Outcome> = jobs
        .into_par_iter()
        .map(|(dump, site, name)| extract_one(&dump, site, &options, &records_dir.join(name)))
        .collect();

    let failed: Vec<&FileReport> = outcomes.iter().filter(|o| o.report.error.is_some()).map(|o| &o.report).collect();
    for f in &failed {
        eprintln!("wikiaddr: {}: {}", f.input, f.error.as_deref().unwrap_or(""));
    }
    let failed_count = failed.len();
    let mut totals = IngestStats::default();
    for o in &outcomes {
        totals.merge(&o.report.stats);
    }

    let mut report = ExtractReport { files: Vec::new(), totals, merged_records: 0, sort_runs: 0 };
    let mut outputs = Vec::new();
    let tsvs: Vec<PathBuf> = outcomes.iter().filter_map(|o| o.tsv.clone()).collect();
    if failed_count == 0 || cfg.keep_going {
        let merged = cfg.out.join("records.tsv");
        let partial = cfg.out.join("records.tsv.partial");
        let mut readers = Vec::new();
        for t in &tsvs {
            readers.push(read_records(BufReader::new(File::open(t)?)));
        }
        let sort = SortOptions { run_len: cfg.sort_run_len, temp_dir: Some(cfg.out.clone()) };
        let stats = sort_records(readers.into_iter().flatten(), BufWriter::new(File::create(&partial)?), &sort)?;
        fs::rename(&partial, &merged)?;
        report.merged_records = stats.records;
        report.sort_runs = stats.runs;
        outputs.push("records.tsv".to_string());
    }
    for t in &tsvs {
        outputs.push(format!("records/{}", t.file_name().unwrap_or_default().to_string_lossy()));
    }
    let digests: Vec<InputDigest> = outcomes.iter().filter_map(|o| o.digest.clone()).collect();
    report.files = outcomes.into_iter().map(|o| o.report).collect();

    let stats_path = args.common.stats.clone().unwrap_or_else(|| cfg.out.join("extract_stats.json"));
    let mut f = BufWriter::new(File::create(&stats_path)?);
    serde_json::to_writer_pretty(&mut f, &report)?;
    io::Write::write_all(&mut f, b"\n")?;
    if stats_path.starts_with(&cfg.out) {
        outputs.push(stats_path.strip_prefix(&cfg.out).unwrap_or(&stats_path).to_string_lossy().into_owned());
    }
    write_manifest(&cfg.out, "extract", &cfg, digests, outputs)?;

    eprintln!(
        "wikiaddr: {} revisions, {} anonymous edits from {} of {} inputs",
        report.totals.revisions,
        report.totals.anonymous,
        report.files.len() - failed_count,
        report.files.len()
    );
    if failed_count > 0 {
        return Err(CliError::Runtime(format!("{failed_count} input(s) failed to parse")));
    }
    Ok(())
}
