use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of one invocation: what was read, what was written, and how long it took.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub stdout_sha256: String,
    pub toolkit_version: String,
    pub exit_code: i32,
    pub wall_time_seconds: f64,
}

/// Shared state of a command run: output directory, captured stdout and the manifest.
pub struct Run {
    pub out_dir: PathBuf,
    manifest: RunManifest,
    stdout: String,
    start: Instant,
}

impl Run {
    pub fn new(command: &str, out_dir: PathBuf) -> Self {
        Run {
            out_dir,
            manifest: RunManifest {
                command: command.to_string(),
                arguments: std::env::args().skip(1).collect(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                stdout_sha256: String::new(),
                toolkit_version: rdq_core::TOOLKIT_VERSION.to_string(),
                exit_code: 0,
                wall_time_seconds: 0.0,
            },
            stdout: String::new(),
            start: Instant::now(),
        }
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        println!("{}", line.as_ref());
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }

    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn note_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.manifest.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn write_output(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.outputs.insert(path.display().to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    /// Writes the manifest next to the other outputs and returns the exit code.
    pub fn finish(mut self, exit_code: i32) -> Result<i32> {
        self.manifest.exit_code = exit_code;
        self.manifest.stdout_sha256 = sha256_hex(self.stdout.as_bytes());
        self.manifest.wall_time_seconds = self.start.elapsed().as_secs_f64();
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(format!("{}.manifest.json", self.manifest.command));
        fs::write(&path, serde_json::to_string_pretty(&self.manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(exit_code)
    }
}
