//! Byte-stable CSV and JSON artifacts.
//!
//! Every float is written as `{:.16e}` (17 significant digits), lines end in
//! LF, and JSON keys keep struct declaration order. JSON has no literal for
//! non-finite numbers, so those become `null`; CSV cells keep `inf`/`NaN`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

/// Top-level JSON document; `config_echo` and `seed` are always present.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'static str,
    pub seed: u64,
    pub config_echo: &'a RunConfig,
    pub result: Option<T>,
    pub error: Option<ErrorReport>,
}

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a fixed header.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn floats(&mut self, cells: &[f64]) {
        let cells: Vec<String> = cells.iter().map(|&v| fmt_f(v)).collect();
        self.row(&cells);
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Resolve the output directory: flag, then config, then `CDI_OUT_DIR`, then `.`.
pub fn output_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.run.output_dir.clone())
        .or_else(|| std::env::var_os("CDI_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}
