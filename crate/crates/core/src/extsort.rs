//! External merge sort of edit records by `(timestamp, site, ip)`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use crate::ingest::{read_records, EditRecord, IngestError, RecordReader, RecordWriter};

#[derive(Debug, Clone)]
pub struct SortOptions {
    /// Records held in memory per sorted run.
    pub run_len: usize,
    /// Parent directory for run files; the system temp dir when `None`.
    pub temp_dir: Option<PathBuf>,
}

impl Default for SortOptions {
    fn default() -> Self {
        SortOptions { run_len: 1_000_000, temp_dir: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    pub records: u64,
    pub runs: usize,
}

fn spill(run: &mut Vec<EditRecord>, dir: &tempfile::TempDir, n: usize) -> Result<PathBuf, IngestError> {
    run.sort_unstable();
    let path = dir.path().join(format!("run-{n:05}.tsv"));
    let mut w = RecordWriter::new(BufWriter::new(File::create(&path)?))?;
    for r in run.drain(..) {
        w.write(&r)?;
    }
    w.finish()?;
    Ok(path)
}

/// Sorts `records` into `sink` as a record TSV, spilling sorted runs of
/// `run_len` records to disk and merging them. Duplicates are kept.
pub fn sort_records<I, W>(records: I, sink: W, opts: &SortOptions) -> Result<SortStats, IngestError>
where
    I: IntoIterator<Item = Result<EditRecord, IngestError>>,
    W: Write,
{
    let run_len = opts.run_len.max(1);
    let mut run = Vec::new();
    let mut dir = None;
    let mut runs = Vec::new();
    for rec in records {
        run.push(rec?);
        if run.len() >= run_len {
            let d = match &dir {
                Some(d) => d,
                None => dir.insert(match &opts.temp_dir {
                    Some(p) => tempfile::Builder::new().prefix("wikiaddr-sort").tempdir_in(p)?,
                    None => tempfile::Builder::new().prefix("wikiaddr-sort").tempdir()?,
                }),
            };
            runs.push(spill(&mut run, d, runs.len())?);
        }
    }
    let mut out = RecordWriter::new(sink)?;
    if runs.is_empty() {
        run.sort_unstable();
        for r in &run {
            out.write(r)?;
        }
        let records = out.finish()?;
        return Ok(SortStats { records, runs: usize::from(records > 0) });
    }
    run.sort_unstable();
    let mut readers: Vec<RecordReader<BufReader<File>>> = Vec::with_capacity(runs.len());
    for path in &runs {
        readers.push(read_records(BufReader::new(File::open(path)?)));
    }
    let mut heap = BinaryHeap::new();
    for (i, r) in readers.iter_mut().enumerate() {
        if let Some(rec) = r.next() {
            heap.push(Reverse((rec?, i)));
        }
    }
    // the in-memory tail acts as one more run
    let tail = readers.len();
    let mut tail_iter = run.into_iter();
    if let Some(rec) = tail_iter.next() {
        heap.push(Reverse((rec, tail)));
    }
    while let Some(Reverse((rec, i))) = heap.pop() {
        out.write(&rec)?;
        let next = if i == tail { tail_iter.next().map(Ok) } else { readers[i].next() };
        if let Some(n) = next {
            heap.push(Reverse((n?, i)));
        }
    }
    let records = out.finish()?;
    Ok(SortStats { records, runs: runs.len() + 1 })
}
