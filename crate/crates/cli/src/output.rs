//! Report types and atomic writers for JSON, CSV and gnuplot data.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::config::Config;

/// How a measured value is compared with the expected one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`.
    Absolute,
    /// `|measured − expected| ≤ tolerance·|expected|`.
    Relative,
    /// `measured ≤ expected`; the tolerance is the bound itself.
    AtMost,
    /// `measured < expected`.
    Below,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn new(name: &str, measured: f64, expected: f64, comparison: Comparison, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::Absolute => (measured - expected).abs() <= tolerance,
            Comparison::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Comparison::AtMost => measured <= expected,
            Comparison::Below => measured < expected,
        };
        Verdict { name: name.to_string(), measured, expected, comparison, tolerance, pass }
    }
}

/// The deterministic part of a run; wall-clock times go to `timings.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: Config,
    pub outputs: Value,
    pub files: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<Stage>,
    pub total: f64,
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(std::io::Error::other)
}

/// Reads rows written by [`csv_string`].
pub fn parse_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

/// Gnuplot data: `#`-prefixed column names, whitespace-separated columns, blank lines between blocks.
pub fn dat_string(columns: &[&str], blocks: &[Vec<Vec<f64>>]) -> String {
    let mut s = format!("# {}\n", columns.join(" "));
    for (k, b) in blocks.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        for row in b {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
    }
    s
}

/// Collects the files an experiment writes into its output directory.
pub struct OutputDir {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Self {
        OutputDir { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> std::io::Result<()> {
        let text = csv_string(rows)?;
        self.write(name, &text)
    }
}
