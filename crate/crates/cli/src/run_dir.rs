//! Output locations guarded by a lock file.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use crate::config::{resolved, RunConfig};
use crate::CliError;

/// Exclusive claim on an output location, released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(path: PathBuf) -> Result<Self, CliError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Locks a run directory and writes `config.json` into it.
pub fn open_dir(dir: &Path, command: &str, config: &RunConfig) -> Result<RunLock, CliError> {
    fs::create_dir_all(dir)?;
    let lock = RunLock::acquire(dir.join("run.lock"))?;
    write_config(&dir.join("config.json"), command, config)?;
    Ok(lock)
}

/// Locks a single output file and writes `<file>.config.json` beside it.
pub fn open_file(out: &Path, command: &str, config: &RunConfig) -> Result<RunLock, CliError> {
    let lock = RunLock::acquire(sidecar(out, "lock"))?;
    write_config(&sidecar(out, "config.json"), command, config)?;
    Ok(lock)
}

pub fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".{ext}"));
    out.with_file_name(name)
}

fn write_config(path: &Path, command: &str, config: &RunConfig) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(&resolved(command, config))?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}
