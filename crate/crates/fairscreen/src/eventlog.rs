//! On-disk scoring log: one header line, then one `ScoreEvent` per line.
//!
//! Appends are flushed with `sync_data` before they are acknowledged, and
//! the file is only ever opened for appending.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use fairscreen_core::session::{validate_log, ScoreEvent};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LOG_FORMAT: &str = "fairscreen-eventlog";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub format: String,
    pub version: u32,
}

impl Default for LogHeader {
    fn default() -> Self {
        LogHeader { format: LOG_FORMAT.into(), version: LOG_VERSION }
    }
}

/// Reads and validates a whole log file.
pub fn read_log(path: &Path) -> Result<Vec<ScoreEvent>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header =
        lines.next().ok_or_else(|| Error::format(path, "missing header line"))?.map_err(|e| Error::io(path, e))?;
    let header: LogHeader = serde_json::from_str(&header).map_err(|e| Error::format(path, format!("header: {e}")))?;
    if header != LogHeader::default() {
        return Err(Error::format(path, format!("unsupported log {} v{}", header.format, header.version)));
    }
    let mut events = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let event: ScoreEvent =
            serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
        events.push(event);
    }
    validate_log(&events)?;
    Ok(events)
}

fn encode(event: &ScoreEvent) -> String {
    let mut line = serde_json::to_string(event).expect("events serialize");
    line.push('\n');
    line
}

/// Writes a complete log in one go.
pub fn write_log(path: &Path, events: &[ScoreEvent]) -> Result<()> {
    validate_log(events)?;
    let mut text = serde_json::to_string(&LogHeader::default()).expect("header serializes");
    text.push('\n');
    for e in events {
        text.push_str(&encode(e));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// An open log accepting appends.
#[derive(Debug)]
pub struct EventLogFile {
    path: PathBuf,
    file: File,
}

impl EventLogFile {
    /// Opens `path`, creating it with a header if missing, and returns the
    /// events already stored.
    pub fn open_or_create(path: &Path) -> Result<(EventLogFile, Vec<ScoreEvent>)> {
        let events = if path.exists() {
            read_log(path)?
        } else {
            write_log(path, &[])?;
            Vec::new()
        };
        let file = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
        file.sync_all().map_err(|e| Error::io(path, e))?;
        Ok((EventLogFile { path: path.to_path_buf(), file }, events))
    }

    pub fn append(&mut self, event: &ScoreEvent) -> Result<()> {
        self.file.write_all(encode(event).as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
