//! Minimal CSV output with a provenance comment line.

use crate::config::Config;
use anyhow::{Context, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    width: usize,
}

impl CsvWriter {
    pub fn create(dir: &Path, name: &str, cfg: &Config, header: &[&str]) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# config_hash={} seed={} command={}", cfg.hash(), cfg.seed, cfg.command)?;
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            path,
            out,
            width: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        assert_eq!(fields.len(), self.width, "row width must match header");
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush()?;
        Ok(self.path)
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
