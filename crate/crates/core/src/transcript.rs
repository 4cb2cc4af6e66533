//! Per-call audit log, replayable through the scripted backend.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::llm::ScriptEntry;

/// Hex SHA-256 of the request texts, system first, separated by a NUL.
pub fn prompt_hash(system_text: &str, user_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(system_text.as_bytes());
    h.update([0u8]);
    h.update(user_text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub item: String,
    pub seq: usize,
    pub agent: String,
    /// 1 for the first ask, 2 for the re-ask with a format reminder.
    pub attempt: u32,
    pub prompt_sha256: String,
    pub response: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// `ok` or `error: <reason>`.
    pub parse: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<CallRecord>,
}

impl Transcript {
    pub fn push(&mut self, mut record: CallRecord) {
        record.seq = self.records.len() + 1;
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Agent labels in call order.
    pub fn agents(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.agent.as_str()).collect()
    }

    /// Script that replays these responses with the recorded usage.
    pub fn to_script(&self) -> Vec<ScriptEntry> {
        self.records
            .iter()
            .map(|r| ScriptEntry::text(r.response.clone()).with_usage(r.input_tokens, r.output_tokens))
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut records = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?);
        }
        Ok(Transcript { records })
    }
}
