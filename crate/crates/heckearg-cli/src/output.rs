use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use heckearg::numeric::sig15;
use serde::Serialize;

use crate::config::RunConfig;

/// 15-significant-digit decimal.
pub fn num(x: f64) -> String {
    sig15(x)
}

/// Files written and asserted invariants that failed.
#[derive(Debug, Default, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.failures.push(message.into());
    }
}

/// The run-stamped output directory.
pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn create(config: &RunConfig) -> Result<Self> {
        let path = config.run_dir();
        std::fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        let recorded = RunConfig { threads: 0, ..config.clone() };
        std::fs::write(path.join("config.json"), recorded.to_json())?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>], outcome: &mut Outcome) -> Result<()> {
        let path = self.path.join(name);
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        outcome.files.push(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T, outcome: &mut Outcome) -> Result<()> {
        let path = self.path.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        outcome.files.push(path);
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str, outcome: &mut Outcome) -> Result<()> {
        let path = self.path.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        outcome.files.push(path);
        Ok(())
    }
}

/// Reads a CSV written by [`RunDir::write_csv`] into header-keyed rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("missing input {}", path.display()))?;
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}
