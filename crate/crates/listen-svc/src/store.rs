use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::ScoreName;

/// One line of the append-only rating log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Session {
        sid: String,
        rater_id: String,
        affiliation: String,
        plan_digest: String,
    },
    Rating {
        sid: String,
        index: usize,
        scores: BTreeMap<ScoreName, u8>,
        played: bool,
    },
}

/// JSON-lines log, fsynced after every record.
#[derive(Debug)]
pub struct RatingLog {
    file: File,
}

/// What `RatingLog::open` found on disk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogRecovery {
    pub records: usize,
    /// Bytes of an incomplete trailing record (interrupted write) that were cut off.
    pub truncated_bytes: usize,
}

impl RatingLog {
    /// Opens or creates the log and returns its records. A final line without
    /// a newline is an interrupted append and is truncated; any other
    /// unparsable line is an error.
    pub fn open(path: &Path) -> Result<(Self, Vec<LogRecord>, LogRecovery), ServiceError> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)
            .map_err(|e| ServiceError::CorruptLog { line: 0, message: e.to_string() })?;
        let complete_len = text.rfind('\n').map_or(0, |i| i + 1);
        let mut records = Vec::new();
        for (i, line) in text[..complete_len].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec = serde_json::from_str(line).map_err(|e| ServiceError::CorruptLog {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(rec);
        }
        let truncated_bytes = text.len() - complete_len;
        if truncated_bytes > 0 {
            file.set_len(complete_len as u64)?;
            file.seek(SeekFrom::End(0))?;
            file.sync_all()?;
        }
        let recovery = LogRecovery {
            records: records.len(),
            truncated_bytes,
        };
        Ok((Self { file }, records, recovery))
    }

    pub fn append(&mut self, rec: &LogRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(rec).map_err(|e| ServiceError::Storage(e.into()))?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}
