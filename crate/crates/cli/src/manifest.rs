//! Run manifests: config, input digests and tool version per command.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

#[derive(Debug, Clone, Serialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reader that hashes everything passing through it.
pub struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
    bytes: u64,
}

impl<R: Read> HashingReader<R> {
    pub fn new(inner: R) -> Self {
        HashingReader { inner, hasher: Sha256::new(), bytes: 0 }
    }

    pub fn finish(self, path: &str) -> InputDigest {
        InputDigest { path: path.to_string(), sha256: hex(&self.hasher.finalize()), bytes: self.bytes }
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }
}

pub fn digest_file(path: &Path) -> io::Result<InputDigest> {
    let mut r = HashingReader::new(File::open(path)?);
    io::copy(&mut r, &mut io::sink())?;
    Ok(r.finish(&path.to_string_lossy()))
}

/// Stores this command's entry in `out/manifest.json`, keeping entries
/// written by other commands into the same directory.
pub fn write_manifest(
    out: &Path,
    command: &str,
    config: &PipelineConfig,
    mut inputs: Vec<InputDigest>,
    mut outputs: Vec<String>,
) -> io::Result<()> {
    let path = out.join("manifest.json");
    let mut doc = std::fs::read(&path)
        .ok()
        .and_then(|b| serde_json::from_slice::<serde_json::Map<String, serde_json::Value>>(&b).ok())
        .unwrap_or_default();
    inputs.sort();
    outputs.sort();
    let entry = serde_json::json!({
        "tool": "wikiaddr",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
    });
    doc.insert(command.to_string(), entry);
    let mut f = File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")
}
