use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Output directory; all files go through this single writer.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Names of the files written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `rows` under a header line. Floats use the shortest
    /// representation that round-trips, so equal data give equal bytes.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = R>,
    ) -> CliResult<()> {
        let path = self.dir.join(name);
        let fail = |message: String| CliError::Output {
            path: path.display().to_string(),
            message,
        };
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(|e| fail(e.to_string()))?;
        w.write_record(header).map_err(|e| fail(e.to_string()))?;
        for row in rows {
            w.serialize(row).map_err(|e| fail(e.to_string()))?;
        }
        w.flush().map_err(|e| fail(e.to_string()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> CliResult<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.written.push(name.to_string());
        Ok(())
    }
}
