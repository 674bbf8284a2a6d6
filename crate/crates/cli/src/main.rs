//! `wikiaddr`: extract anonymous-edit addresses from MediaWiki history
//! dumps, attribute them to origin ASes and build report tables.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod attribute;
mod config;
mod extract;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{OutputFormat, PipelineConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    std::io::Error,
    serde_json::Error,
    wikiaddr_core::ingest::IngestError,
    wikiaddr_core::ribstore::RibError,
    wikiaddr_core::analytics::AnalyticsError,
    wikiaddr_core::netaddr::OuiError
);

#[derive(Debug, Parser)]
#[command(name = "wikiaddr", version, about = "Anonymous-edit IP extraction, origin attribution and IPv6 reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the run's statistics JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    common: Common,
    /// Decompressed pages-meta-history XML dumps; `-` reads standard input.
    dumps: Vec<PathBuf>,
    /// Keep only these namespaces (comma-separated).
    #[arg(long, value_parser = config::parse_namespaces)]
    namespaces: Option<std::collections::BTreeSet<i64>>,
    /// Continue past dumps that fail to parse (the run still exits 1).
    #[arg(long)]
    keep_going: bool,
    /// Site for an input, overriding the file-name rule: `FILE=CODE`.
    #[arg(long = "site", value_name = "FILE=CODE", allow_hyphen_values = true)]
    sites: Vec<String>,
    /// Records per in-memory sorted run when merging.
    #[arg(long)]
    sort_run_len: Option<usize>,
}

#[derive(Debug, Args)]
struct AttributeArgs {
    #[command(flatten)]
    common: Common,
    /// Sorted record TSV (as written by `extract`).
    #[arg(long)]
    records: Option<PathBuf>,
    /// MRT RIB dumps or prefix tables; repeatable.
    #[arg(long = "rib", num_args = 1..)]
    ribs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportInputs {
    #[command(flatten)]
    common: Common,
    /// Record TSVs; repeatable, each aggregated separately and merged.
    #[arg(long)]
    records: Vec<PathBuf>,
    /// Attributed TSVs (needed for weekly_by_as); used instead of --records.
    #[arg(long)]
    attributed: Vec<PathBuf>,
    /// IEEE MA-L OUI CSV for vendor names.
    #[arg(long)]
    oui: Option<PathBuf>,
    /// IPv6 hitlist TSV: `date<TAB>address-or-prefix`.
    #[arg(long)]
    hitlist: Option<PathBuf>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    top_vendors: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Table names, or `all`.
    #[arg(required = true)]
    tables: Vec<String>,
    #[command(flatten)]
    inputs: ReportInputs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse dumps into per-dump record TSVs and one merged, sorted TSV.
    Extract(ExtractArgs),
    /// Annotate sorted records with the origin AS from the nearest RIB snapshot.
    Attribute(AttributeArgs),
    /// Write report tables.
    Report(ReportArgs),
    /// Same as `report hitlist_overlap`.
    CompareHitlist(ReportInputs),
}

/// Loads the config file, if any, and applies the shared flags.
fn base_config(common: &Common) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Extract(args) => extract::run(args),
        Command::Attribute(args) => attribute::run(args),
        Command::Report(args) => report::run(&args.tables, args.inputs),
        Command::CompareHitlist(inputs) => report::run(&["hitlist_overlap".to_string()], inputs),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wikiaddr: {e}");
            ExitCode::from(e.code())
        }
    }
}
