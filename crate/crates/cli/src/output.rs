//! CSV and manifest writing.
//!
//! CSV files start with `#` comment lines naming the tool version, the
//! command, the seed, the replication count and the config hash, followed
//! by a header row. Nothing in a file depends on the wall clock or on the
//! number of worker threads.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the run that produced a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub replications: u64,
    pub config_hash: String,
}

/// Six significant digits, plain notation for moderate magnitudes.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn full(x: f64) -> String {
    format!("{x:?}")
}

/// Rows of string cells under a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, prov: &Provenance) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for line in [
            format!("# accbias {VERSION}"),
            format!("# command {}", prov.command),
            format!("# seed {}", prov.seed),
            format!("# replications {}", prov.replications),
            format!("# config_sha256 {}", prov.config_hash),
        ] {
            buf.extend_from_slice(line.as_bytes());
            buf.push(b'\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(buf);
        let io = |e: csv::Error| CliError::Runtime(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Runtime(format!("csv: {e}")))
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_table(
    dir: &Path,
    name: &str,
    table: &Table,
    prov: &Provenance,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write_file(&path, &table.render(prov)?)?;
    Ok(path)
}

/// Reads a file written by [`write_table`], skipping the `#` prelude.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let header = r.headers().map_err(io)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(io)?.iter().map(String::from).collect());
    }
    Ok(Table { header, rows })
}

impl Table {
    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell of `row` in column `name`.
    pub fn cell(&self, row: usize, name: &str) -> Option<&str> {
        self.column(name)
            .and_then(|c| self.rows.get(row).map(|r| r[c].as_str()))
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    accbias_version: &'a str,
    core_version: &'a str,
    seed: u64,
    replications: u64,
    config_sha256: &'a str,
    outputs: Vec<String>,
    config: &'a crate::config::RunConfig,
}

/// Writes `<command>.manifest.toml` next to the outputs.
pub fn write_manifest(
    dir: &Path,
    prov: &Provenance,
    config: &crate::config::RunConfig,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let manifest = Manifest {
        command: &prov.command,
        accbias_version: VERSION,
        core_version: accbias_core::VERSION,
        seed: prov.seed,
        replications: prov.replications,
        config_sha256: &prov.config_hash,
        outputs: outputs
            .iter()
            .filter_map(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect(),
        config,
    };
    let text =
        toml::to_string(&manifest).map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
    let path = dir.join(format!("{}.manifest.toml", prov.command));
    write_file(&path, text.as_bytes())?;
    Ok(path)
}
