use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

use crate::config::Format;
use crate::CliError;

/// Output directory plus the provenance stamped into every file.
pub struct Outputs {
    dir: PathBuf,
    formats: Vec<Format>,
    hash: String,
}

impl Outputs {
    pub fn new(dir: PathBuf, formats: Vec<Format>, hash: String) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, formats, hash })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn csv<F>(&self, name: &str, extra: &[(&str, String)], body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>, &[(&str, String)]) -> io::Result<()>,
    {
        if !self.formats.contains(&Format::Csv) {
            return Ok(());
        }
        let mut meta = vec![("config_hash", self.hash.clone()), ("generator", format!("ringsqz {}", env!("CARGO_PKG_VERSION")))];
        meta.extend(extra.iter().cloned());
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w, &meta)?;
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        if !self.formats.contains(&Format::Json) {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        Ok(())
    }
}
