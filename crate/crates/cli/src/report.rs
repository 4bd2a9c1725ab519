//! Writing reports.
//!
//! CSV files hold data only, so two runs of one config compare byte for
//! byte. The config echo, seed, version and wall-clock time go in a metadata
//! block: inline for JSON, a `<file>.meta.json` sidecar for CSV on disk.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{Format, OutputSpec};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub generated_unix_secs: u64,
}

impl<'a, C: Serialize> Metadata<'a, C> {
    pub fn new(command: &'a str, seed: u64, config: &'a C) -> Self {
        let generated_unix_secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { command, version: VERSION, seed, config, generated_unix_secs }
    }
}

#[derive(Serialize)]
struct JsonReport<'a, C: Serialize, D: Serialize> {
    metadata: &'a Metadata<'a, C>,
    data: &'a D,
}

/// Something that can be rendered as a CSV table.
pub trait CsvTable {
    fn write_csv(&self, out: &mut dyn Write) -> CliResult<()>;
}

/// Writes `data` to each output in its format.
pub fn emit<C, D>(outputs: &[OutputSpec], meta: &Metadata<'_, C>, data: &D) -> CliResult<()>
where
    C: Serialize,
    D: Serialize + CsvTable,
{
    for spec in outputs {
        let mut buf = Vec::new();
        match spec.format {
            Format::Csv => data.write_csv(&mut buf)?,
            Format::Json => {
                let report = JsonReport { metadata: meta, data };
                serde_json::to_writer_pretty(&mut buf, &report).map_err(dchoice::Error::from)?;
                buf.push(b'\n');
            }
        }
        match &spec.path {
            None => write_stdout(&buf)?,
            Some(path) => {
                write_file(path, &buf)?;
                if spec.format == Format::Csv {
                    let mut side = serde_json::to_vec_pretty(meta).map_err(dchoice::Error::from)?;
                    side.push(b'\n');
                    write_file(&sidecar_path(path), &side)?;
                }
            }
        }
    }
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
}

pub fn write_stdout(bytes: &[u8]) -> CliResult<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Output { path: "<stdout>".into(), source })
}
