//! Output files and their provenance headers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header lines shared by every file a run writes.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub lines: Vec<String>,
}

impl Provenance {
    /// `effective_config` is the defaults-resolved TOML; its hash identifies
    /// the run. The timestamp line is left out when `reproducible`.
    pub fn new(command: &str, effective_config: &str, seed: u64, reproducible: bool) -> Self {
        let hash = Sha256::digest(effective_config.as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        let mut lines = vec![
            format!("ehdspray {VERSION}"),
            format!("command {command}"),
            format!("config_sha256 {hex}"),
            format!("seed {seed}"),
        ];
        if !reproducible {
            lines.push(format!("generated {}", chrono::Utc::now().to_rfc3339()));
        }
        Self { lines }
    }
}

/// Writes the files of one run into `dir`.
pub struct OutputDir {
    dir: PathBuf,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path, provenance: Provenance) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            provenance,
            written: Vec::new(),
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Runs `body` on a buffered writer for `name`, after the `# `-prefixed
    /// provenance header when `header` is set.
    pub fn write_with<F>(&mut self, name: &str, header: bool, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>, &Provenance) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let result = (|| {
            let mut w = BufWriter::new(File::create(&path)?);
            if header {
                for l in &self.provenance.lines {
                    writeln!(w, "# {l}")?;
                }
            }
            body(&mut w, &self.provenance)?;
            w.flush()
        })();
        result.map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// A CSV table with header row `columns`.
    pub fn write_csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        self.write_with(name, true, |w, _| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(columns)?;
            for row in rows {
                csv.write_record(&row)?;
            }
            csv.flush()
        })
    }

    /// A two-column `key,value` table.
    pub fn write_summary(&mut self, name: &str, rows: &[(&str, String)]) -> Result<(), CliError> {
        self.write_csv(
            name,
            &["key", "value"],
            rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]),
        )
    }
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_header_has_no_timestamp() {
        let a = Provenance::new("rate", "seed = 1\n", 1, true);
        let b = Provenance::new("rate", "seed = 1\n", 1, false);
        assert_eq!(a.lines.len() + 1, b.lines.len());
        assert!(a.lines.iter().all(|l| !l.starts_with("generated")));
        assert_ne!(
            Provenance::new("rate", "seed = 2\n", 1, true).lines,
            a.lines,
            "hash follows the config"
        );
    }

    #[test]
    fn num_round_trips() {
        for x in [0.0, 1.0 / 3.0, -2.5e-17, 9.2e9] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
