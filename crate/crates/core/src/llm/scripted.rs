//! Deterministic backend that replays an ordered list of canned responses.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{approx_tokens, Backend, CompletionRequest, CompletionResult, LlmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    Transport,
    RateLimited,
}

/// One scripted reply. Usage falls back to `ceil(chars / 4)` of the prompt
/// and response text when not given. A `fault` entry makes the call fail
/// instead, consuming the entry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_tokens: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl ScriptEntry {
    pub fn text(text: impl Into<String>) -> Self {
        ScriptEntry {
            text: text.into(),
            ..Default::default()
        }
    }

    pub fn with_usage(mut self, input_tokens: u64, output_tokens: u64) -> Self {
        self.input_tokens = Some(input_tokens);
        self.output_tokens = Some(output_tokens);
        self
    }

    pub fn fault(fault: Fault) -> Self {
        ScriptEntry {
            fault: Some(fault),
            ..Default::default()
        }
    }
}

impl From<&str> for ScriptEntry {
    fn from(s: &str) -> Self {
        ScriptEntry::text(s)
    }
}

impl From<String> for ScriptEntry {
    fn from(s: String) -> Self {
        ScriptEntry::text(s)
    }
}

struct State {
    queue: VecDeque<ScriptEntry>,
    served: usize,
}

/// Calls must arrive in script order, so one scripted backend serves one
/// sequential run.
pub struct ScriptedBackend {
    state: Mutex<State>,
}

impl ScriptedBackend {
    pub fn new<I, E>(entries: I) -> Self
    where
        I: IntoIterator<Item = E>,
        E: Into<ScriptEntry>,
    {
        ScriptedBackend {
            state: Mutex::new(State {
                queue: entries.into_iter().map(Into::into).collect(),
                served: 0,
            }),
        }
    }

    pub fn remaining(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).queue.len()
    }

    pub fn served(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).served
    }
}

impl Backend for ScriptedBackend {
    fn id(&self) -> String {
        "scripted".into()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let entry = state
            .queue
            .pop_front()
            .ok_or(LlmError::BackendExhausted { served: state.served })?;
        state.served += 1;
        match entry.fault {
            Some(Fault::Transport) => return Err(LlmError::Transport("scripted transport fault".into())),
            Some(Fault::RateLimited) => return Err(LlmError::RateLimited),
            None => {}
        }
        let input_tokens = entry
            .input_tokens
            .unwrap_or_else(|| approx_tokens(&request.system_text) + approx_tokens(&request.user_text));
        let output_tokens = entry.output_tokens.unwrap_or_else(|| approx_tokens(&entry.text));
        Ok(CompletionResult {
            text: entry.text,
            input_tokens,
            output_tokens,
            backend_id: self.id(),
        })
    }
}

/// Reads a script file: one JSON [`ScriptEntry`] per line.
pub fn read_script<R: BufRead>(reader: R) -> std::io::Result<Vec<ScriptEntry>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("script line {}: {e}", i + 1))
        })?;
        out.push(entry);
    }
    Ok(out)
}

pub fn write_script<'a, W: Write>(mut w: W, entries: impl IntoIterator<Item = &'a ScriptEntry>) -> std::io::Result<()> {
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
