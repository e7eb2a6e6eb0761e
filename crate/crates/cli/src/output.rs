//! CSV emission and the run manifest.
//!
//! Each CSV starts with `#` lines holding the artifact version, the command
//! and the resolved configuration. The manifest lists every output with its
//! SHA-256 and is itself a valid config file: its `#` lines are comments and
//! the rest is the resolved configuration, so passing it back through
//! `--config` repeats the run.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::{echo, RunConfig};
use crate::{io_err, CliError};

pub const ARTIFACT: &str = concat!("fingerloc-cli ", env!("CARGO_PKG_VERSION"));
pub const MANIFEST_NAME: &str = "manifest.conf";

/// Empty for a missing value.
pub fn csv_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn metadata_header(command: &str, run: &RunConfig, extra: &[(String, String)]) -> String {
    let mut out = format!("# {ARTIFACT}\n# command = {command}\n");
    for line in echo(run).lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (k, v) in extra {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out
}

/// Files written by one command, plus their manifest.
pub struct Outputs<'a> {
    command: &'static str,
    run: &'a RunConfig,
    dir: Option<PathBuf>,
    manifest: PathBuf,
    written: Vec<(String, String)>,
}

impl<'a> Outputs<'a> {
    /// Outputs go into `dir`, created if needed.
    pub fn dir(dir: &Path, command: &'static str, run: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self {
            command,
            run,
            dir: Some(dir.to_path_buf()),
            manifest: dir.join(MANIFEST_NAME),
            written: Vec::new(),
        })
    }

    /// A single output file; the manifest sits next to it.
    pub fn file(path: &Path, command: &'static str, run: &'a RunConfig) -> Self {
        let mut name = path
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_default();
        name.push(".");
        name.push(MANIFEST_NAME);
        Self {
            command,
            run,
            dir: None,
            manifest: path.with_file_name(name),
            written: Vec::new(),
        }
    }

    /// Write `body` under the metadata header as `name` inside the output directory.
    pub fn add(
        &mut self,
        name: &str,
        extra: &[(String, String)],
        body: String,
    ) -> Result<(), CliError> {
        let dir = self.dir.clone().expect("directory output");
        self.add_at(&dir.join(name), extra, body)
    }

    /// Write `body` under the metadata header at `path`.
    pub fn add_at(
        &mut self,
        path: &Path,
        extra: &[(String, String)],
        body: String,
    ) -> Result<(), CliError> {
        let text = metadata_header(self.command, self.run, extra) + &body;
        self.add_raw(path, text)
    }

    /// Write `text` as is.
    pub fn add_raw(&mut self, path: &Path, text: String) -> Result<(), CliError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(path, &text).map_err(|e| io_err(path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.written.push((name, sha256_hex(text.as_bytes())));
        Ok(())
    }

    /// Write the manifest; returns the output file names.
    pub fn finish(self) -> Result<Vec<String>, CliError> {
        let mut text = format!(
            "# {ARTIFACT} run manifest\n# command = {}\n# seed = {}\n",
            self.command, self.run.experiment.master_seed
        );
        for (name, sum) in &self.written {
            text.push_str(&format!("# output {name} sha256={sum}\n"));
        }
        text.push_str(&echo(self.run));
        fs::write(&self.manifest, text).map_err(|e| io_err(&self.manifest, e))?;
        Ok(self.written.into_iter().map(|(n, _)| n).collect())
    }
}
