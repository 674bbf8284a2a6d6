//! Pipeline configuration: a flat `key = value` file, overridden by flags.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub dumps: Vec<PathBuf>,
    pub oui: Option<PathBuf>,
    pub ribs: Vec<PathBuf>,
    pub hitlist: Option<PathBuf>,
    pub records: Vec<PathBuf>,
    pub attributed: Vec<PathBuf>,
    pub out: PathBuf,
    pub top_k: usize,
    pub top_vendors: usize,
    /// `None` keeps every namespace.
    pub namespaces: Option<BTreeSet<i64>>,
    /// Site overrides keyed by input path or file name.
    pub sites: BTreeMap<String, String>,
    pub format: OutputFormat,
    pub keep_going: bool,
    pub sort_run_len: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dumps: Vec::new(),
            oui: None,
            ribs: Vec::new(),
            hitlist: None,
            records: Vec::new(),
            attributed: Vec::new(),
            out: PathBuf::from("out"),
            top_k: 5,
            top_vendors: 8,
            namespaces: None,
            sites: BTreeMap::new(),
            format: OutputFormat::Csv,
            keep_going: false,
            sort_run_len: 500_000,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty())
}

pub fn parse_namespaces(value: &str) -> Result<BTreeSet<i64>, String> {
    list(value)
        .map(|n| n.parse::<i64>().map_err(|_| format!("bad namespace {n:?}")))
        .collect()
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl PipelineConfig {
    /// Parses config text. Relative paths resolve against `base`. List keys
    /// take comma-separated values and may repeat.
    pub fn parse(text: &str, base: &Path) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let path = |v: &str| base.join(v);
            let number = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("{key} must be a non-negative integer")));
            match key {
                "dumps" | "dump" => cfg.dumps.extend(list(value).map(path)),
                "rib" | "ribs" => cfg.ribs.extend(list(value).map(path)),
                "records" => cfg.records.extend(list(value).map(path)),
                "attributed" => cfg.attributed.extend(list(value).map(path)),
                "oui" => cfg.oui = Some(path(value)),
                "hitlist" => cfg.hitlist = Some(path(value)),
                "out" => cfg.out = path(value),
                "top_k" => cfg.top_k = number(value)?,
                "top_vendors" => cfg.top_vendors = number(value)?,
                "sort_run_len" => cfg.sort_run_len = number(value)?.max(1),
                "namespaces" => {
                    cfg.namespaces = if value == "all" { None } else { Some(parse_namespaces(value).map_err(bad)?) }
                }
                "format" => {
                    cfg.format = clap::ValueEnum::from_str(value, true)
                        .map_err(|_| bad(format!("format must be csv, json or both, got {value:?}")))?
                }
                "keep_going" => cfg.keep_going = parse_bool(value).ok_or_else(|| bad(format!("bad boolean {value:?}")))?,
                _ => match key.strip_prefix("site.") {
                    Some(file) if !file.is_empty() => {
                        cfg.sites.insert(file.to_string(), value.to_string());
                    }
                    _ => return Err(bad(format!("unknown key {key:?}"))),
                },
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading config {}: {e}", path.display())))?;
        PipelineConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Every referenced input path must exist (`-` is standard input).
    pub fn validate(&self) -> Result<(), CliError> {
        let inputs = self
            .dumps
            .iter()
            .chain(&self.ribs)
            .chain(&self.records)
            .chain(&self.attributed)
            .chain(&self.oui)
            .chain(&self.hitlist);
        for p in inputs {
            if p.as_os_str() != "-" && !p.exists() {
                return Err(CliError::Usage(format!("input not found: {}", p.display())));
            }
        }
        Ok(())
    }

    /// Site override for an input, by full path or by file name.
    pub fn site_for(&self, input: &Path) -> Option<&str> {
        let by_path = self.sites.get(&input.to_string_lossy().into_owned());
        let by_name = input.file_name().and_then(|n| self.sites.get(&n.to_string_lossy().into_owned()));
        by_path.or(by_name).map(String::as_str)
    }
}
