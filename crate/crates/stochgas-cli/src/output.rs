//! Deterministic file emission: CSV with one header row, '.' decimal and
//! 17 significant digits; pretty JSON summaries carrying the config echo.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;

/// 17 significant digits, locale-independent.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvWriter {
    path: PathBuf,
    buf: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(dir: &Path, name: &str, header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter { path: dir.join(name), buf, columns: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns, "row width mismatch");
        let mut first = true;
        for v in values {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt17(*v));
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> std::io::Result<PathBuf> {
        fs::write(&self.path, self.buf.as_bytes())?;
        Ok(self.path)
    }
}

#[derive(Serialize)]
pub struct Summary<E: Serialize> {
    pub version: &'static str,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    #[serde(flatten)]
    pub extra: E,
}

pub fn write_summary<E: Serialize>(
    dir: &Path,
    name: &str,
    config: &RunConfig,
    outputs: &[&PathBuf],
    extra: E,
) -> std::io::Result<PathBuf> {
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        outputs: outputs
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
        extra,
    };
    let path = dir.join(name);
    let mut file = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut file, &summary)?;
    file.write_all(b"\n")?;
    Ok(path)
}
