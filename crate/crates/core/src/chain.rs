//! Step-wise reasoning chains: construction, truncation, prompt rendering,
//! and the `f_name(args)` function-call syntax.

use std::fmt;
use std::io::BufRead;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{apply_operation, render_prompt_table, OperationKind, SortOrder, Table, TableError, TableOperation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("step index {index} is out of range for a chain of {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("malformed arguments for `{function}`: {reason}")]
    MalformedArguments { function: String, reason: String },
    #[error("step {step}: {source}")]
    Operation {
        step: usize,
        #[source]
        source: TableError,
    },
    #[error("invalid chain: {0}")]
    Invalid(String),
}

/// One step of a chain. Steps with an operation transform the table; the
/// closing step has no operation and holds the answer derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningStep {
    pub index: usize,
    pub rationale: String,
    pub operation: Option<TableOperation>,
    pub resulting_table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReasoningChain {
    pub steps: Vec<ReasoningStep>,
    pub final_answer: Option<String>,
}

impl ReasoningChain {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Complete chains end with an operation-free step and carry an answer.
    pub fn is_complete(&self) -> bool {
        self.final_answer.is_some() && self.steps.last().is_some_and(|s| s.operation.is_none())
    }

    pub fn operations(&self) -> impl Iterator<Item = &TableOperation> {
        self.steps.iter().filter_map(|s| s.operation.as_ref())
    }

    /// Checks contiguous indices and that only the last step may lack an
    /// operation.
    pub fn validate(&self) -> Result<(), ChainError> {
        for (i, step) in self.steps.iter().enumerate() {
            if step.index != i + 1 {
                return Err(ChainError::Invalid(format!(
                    "step {} carries index {}",
                    i + 1,
                    step.index
                )));
            }
            if step.operation.is_none() && i + 1 != self.steps.len() {
                return Err(ChainError::Invalid(format!(
                    "step {} has no operation but is not the last step",
                    i + 1
                )));
            }
        }
        if self.final_answer.is_some() && !self.is_complete() {
            return Err(ChainError::Invalid("answer present without a closing step".into()));
        }
        Ok(())
    }

    /// Re-applies every operation from `original` and checks each stored
    /// snapshot against the recomputed table.
    pub fn replays_cleanly(&self, original: &Table) -> Result<bool, ChainError> {
        let mut current = original.clone();
        for step in &self.steps {
            if let Some(op) = &step.operation {
                current = apply_operation(&current, op).map_err(|source| ChainError::Operation {
                    step: step.index,
                    source,
                })?;
            }
            if let Some(snapshot) = &step.resulting_table {
                if *snapshot != current {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Table after the last operation-bearing step, or `original` when the
    /// chain has none.
    pub fn current_table(&self, original: &Table) -> Result<Table, ChainError> {
        if let Some(t) = self.steps.iter().rev().find_map(|s| s.resulting_table.as_ref()) {
            return Ok(t.clone());
        }
        let mut current = original.clone();
        for step in &self.steps {
            if let Some(op) = &step.operation {
                current = apply_operation(&current, op).map_err(|source| ChainError::Operation {
                    step: step.index,
                    source,
                })?;
            }
        }
        Ok(current)
    }
}

/// Keeps the first `keep` steps and clears the answer. `keep == 0` yields an
/// empty prefix.
pub fn truncate(chain: &ReasoningChain, keep: usize) -> Result<ReasoningChain, ChainError> {
    if keep > chain.steps.len() {
        return Err(ChainError::IndexOutOfRange {
            index: keep,
            len: chain.steps.len(),
        });
    }
    Ok(ReasoningChain {
        steps: chain.steps[..keep].to_vec(),
        final_answer: None,
    })
}

/// The prefix handed to the refiner: every step before `first_error`
/// (1-based). The erroneous step itself is regenerated.
pub fn prefix_before_error(chain: &ReasoningChain, first_error: usize) -> Result<ReasoningChain, ChainError> {
    if first_error == 0 || first_error > chain.steps.len() {
        return Err(ChainError::IndexOutOfRange {
            index: first_error,
            len: chain.steps.len(),
        });
    }
    let mut prefix = truncate(chain, first_error - 1)?;
    // a closing step can only be last, so it is never part of a strict prefix
    prefix.steps.retain(|s| s.operation.is_some());
    Ok(prefix)
}

/// Incrementally builds a chain, applying each operation as it is pushed so
/// snapshots are stored eagerly.
#[derive(Debug, Clone)]
pub struct ChainBuilder {
    steps: Vec<ReasoningStep>,
    current: Table,
}

impl ChainBuilder {
    pub fn new(original: &Table) -> Self {
        Self {
            steps: Vec::new(),
            current: original.clone(),
        }
    }

    /// Continues from the operation steps of `prefix`.
    pub fn resume(original: &Table, prefix: &ReasoningChain) -> Result<Self, ChainError> {
        let mut b = Self::new(original);
        for step in prefix.steps.iter().filter(|s| s.operation.is_some()) {
            b.push(step.rationale.clone(), step.operation.clone().unwrap())?;
        }
        Ok(b)
    }

    pub fn current_table(&self) -> &Table {
        &self.current
    }

    pub fn operation_count(&self) -> usize {
        self.steps.len()
    }

    pub fn push(&mut self, rationale: impl Into<String>, op: TableOperation) -> Result<&mut Self, ChainError> {
        let index = self.steps.len() + 1;
        let next = apply_operation(&self.current, &op).map_err(|source| ChainError::Operation { step: index, source })?;
        self.steps.push(ReasoningStep {
            index,
            rationale: rationale.into(),
            operation: Some(op),
            resulting_table: Some(next.clone()),
        });
        self.current = next;
        Ok(self)
    }

    pub fn partial(self) -> ReasoningChain {
        ReasoningChain {
            steps: self.steps,
            final_answer: None,
        }
    }

    pub fn finish(mut self, rationale: impl Into<String>, answer: impl Into<String>) -> ReasoningChain {
        let index = self.steps.len() + 1;
        self.steps.push(ReasoningStep {
            index,
            rationale: rationale.into(),
            operation: None,
            resulting_table: Some(self.current),
        });
        ReasoningChain {
            steps: self.steps,
            final_answer: Some(answer.into()),
        }
    }
}

pub fn step_title(kind: OperationKind) -> &'static str {
    match kind {
        OperationKind::AddColumn => "Add a new column.",
        OperationKind::SelectRow => "Select relevant rows.",
        OperationKind::SelectColumn => "Filter out useless columns.",
        OperationKind::GroupColumn => "Group rows by a column.",
        OperationKind::SortColumn => "Sort rows by a column.",
    }
}

/// Joins calls as "a", "a and b", "a, b and c".
fn join_calls(calls: &[String]) -> String {
    match calls {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Renders only the `Step k:` blocks and the `Prediction Answer:` trailer.
pub fn render_steps(chain: &ReasoningChain, original: &Table) -> String {
    let mut blocks: Vec<String> = Vec::with_capacity(chain.steps.len());
    let mut calls: Vec<String> = Vec::new();
    for step in &chain.steps {
        let mut block = String::new();
        match &step.operation {
            Some(op) => {
                block.push_str(&format!("Step {}: {}\n", step.index, step_title(op.kind())));
                if !step.rationale.is_empty() {
                    block.push_str(&step.rationale);
                    block.push('\n');
                }
                let call = op.to_string();
                block.push_str(&format!("So we use {call}."));
                calls.push(call);
            }
            None => {
                if calls.is_empty() {
                    block.push_str(&format!("Step {}: Using the original table, we obtain the sub table:\n", step.index));
                } else {
                    block.push_str(&format!(
                        "Step {}: After using {}, we obtain the sub table:\n",
                        step.index,
                        join_calls(&calls)
                    ));
                }
                let sub = match &step.resulting_table {
                    Some(t) => Some(t.clone()),
                    None => chain.current_table(original).ok(),
                };
                if let Some(sub) = sub {
                    block.push_str(&render_prompt_table(&sub));
                }
                if !step.rationale.is_empty() {
                    block.push('\n');
                    block.push_str(&step.rationale);
                }
            }
        }
        blocks.push(block);
    }
    let mut out = blocks.join("\n\n");
    if let Some(answer) = &chain.final_answer {
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        out.push_str("Prediction Answer:\n");
        out.push_str(answer);
    }
    out
}

/// Renders the full case block shown to the judge and critic: original
/// table, question, reasoning steps and (for complete chains) the answer.
pub fn render_chain(chain: &ReasoningChain, table: &Table, question: &str) -> String {
    let steps = render_steps(chain, table);
    let mut out = format!(
        "Original Table:\n{}\n\nQuestion:\n{}\n\nReasoning Steps:\n",
        render_prompt_table(table),
        question
    );
    out.push_str(&steps);
    out
}

/// Renders a list of operations as `f_a(..) -> f_b(..)`.
pub fn render_function_chain<'a>(ops: impl IntoIterator<Item = &'a TableOperation>) -> String {
    ops.into_iter().map(|op| op.to_string()).collect::<Vec<_>>().join(" -> ")
}

fn needs_quotes(arg: &str) -> bool {
    arg.is_empty() || arg.trim() != arg || arg.contains([',', '(', ')', '"', '\\', '\n'])
}

fn quote_arg(arg: &str) -> String {
    if !needs_quotes(arg) {
        return arg.to_string();
    }
    let mut out = String::with_capacity(arg.len() + 2);
    out.push('"');
    for c in arg.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

impl fmt::Display for TableOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = match self {
            TableOperation::AddColumn { name, values } => std::iter::once(name)
                .chain(values.iter())
                .map(|a| quote_arg(a))
                .collect(),
            TableOperation::SelectRow { rows } => rows.iter().map(|r| format!("row {r}")).collect(),
            TableOperation::SelectColumn { columns } => columns.iter().map(|c| quote_arg(c)).collect(),
            TableOperation::GroupColumn { column } => vec![quote_arg(column)],
            TableOperation::SortColumn { column, order } => {
                let mut v = vec![quote_arg(column)];
                if *order == SortOrder::Descending {
                    v.push("descending".into());
                }
                v
            }
        };
        write!(f, "{}({})", self.kind().function_name(), args.join(", "))
    }
}

fn call_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\bf_([A-Za-z0-9_]+)\s*\(").unwrap())
}

fn row_token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^row\s+(\d+)$").unwrap())
}

/// Splits the argument text of one call. Returns the arguments and the byte
/// offset just past the closing parenthesis.
fn split_args(text: &str, function: &str) -> Result<(Vec<String>, usize), ChainError> {
    let malformed = |reason: &str| ChainError::MalformedArguments {
        function: function.to_string(),
        reason: reason.to_string(),
    };
    let mut args = Vec::new();
    let mut current = String::new();
    let mut quoted_arg = false;
    let mut depth = 0usize;
    let mut chars = text.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' if !quoted_arg && !current.trim().is_empty() => current.push(c),
            '"' => {
                if quoted_arg {
                    return Err(malformed("text after a quoted argument"));
                }
                current.clear();
                loop {
                    match chars.next() {
                        Some((_, '\\')) => match chars.next() {
                            Some((_, e)) => current.push(e),
                            None => return Err(malformed("unterminated escape")),
                        },
                        Some((_, '"')) => break,
                        Some((_, ch)) => current.push(ch),
                        None => return Err(malformed("unterminated quoted argument")),
                    }
                }
                quoted_arg = true;
            }
            _ if quoted_arg && c != ',' && c != ')' && !c.is_whitespace() => {
                return Err(malformed("text after a quoted argument"));
            }
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' if depth > 0 => {
                depth -= 1;
                current.push(c);
            }
            ')' | ',' if depth == 0 => {
                let arg = if quoted_arg {
                    std::mem::take(&mut current)
                } else {
                    std::mem::take(&mut current).trim().to_string()
                };
                let empty_call = c == ')' && args.is_empty() && arg.is_empty() && !quoted_arg;
                if !empty_call {
                    if arg.is_empty() && !quoted_arg {
                        return Err(malformed("empty argument"));
                    }
                    args.push(arg);
                }
                quoted_arg = false;
                if c == ')' {
                    return Ok((args, i + 1));
                }
            }
            _ => {
                if !quoted_arg {
                    current.push(c);
                }
            }
        }
    }
    Err(malformed("missing closing parenthesis"))
}

fn build_operation(function: &str, kind: OperationKind, args: Vec<String>) -> Result<TableOperation, ChainError> {
    let malformed = |reason: String| ChainError::MalformedArguments {
        function: function.to_string(),
        reason,
    };
    match kind {
        OperationKind::SelectRow => {
            if args.is_empty() {
                return Err(malformed("expected at least one `row N`".into()));
            }
            let mut rows = Vec::with_capacity(args.len());
            for a in &args {
                let caps = row_token_re()
                    .captures(a)
                    .ok_or_else(|| malformed(format!("`{a}` is not a `row N` token")))?;
                let n: usize = caps[1].parse().map_err(|_| malformed(format!("bad row number in `{a}`")))?;
                if n == 0 {
                    return Err(malformed("row numbers start at 1".into()));
                }
                if rows.last().is_some_and(|&prev| prev >= n) {
                    return Err(malformed("row numbers must be strictly increasing".into()));
                }
                rows.push(n);
            }
            Ok(TableOperation::SelectRow { rows })
        }
        OperationKind::SelectColumn => {
            if args.is_empty() {
                return Err(malformed("expected at least one column".into()));
            }
            Ok(TableOperation::SelectColumn { columns: args })
        }
        OperationKind::GroupColumn => match <[String; 1]>::try_from(args) {
            Ok([column]) => Ok(TableOperation::GroupColumn { column }),
            Err(args) => Err(malformed(format!("expected 1 argument, found {}", args.len()))),
        },
        OperationKind::SortColumn => {
            let mut it = args.into_iter();
            let column = it.next().ok_or_else(|| malformed("expected a column".into()))?;
            let order = match it.next().as_deref().map(str::to_ascii_lowercase).as_deref() {
                None | Some("ascending") | Some("asc") => SortOrder::Ascending,
                Some("descending") | Some("desc") => SortOrder::Descending,
                Some(other) => return Err(malformed(format!("unknown sort order `{other}`"))),
            };
            if it.next().is_some() {
                return Err(malformed("too many arguments".into()));
            }
            Ok(TableOperation::SortColumn { column, order })
        }
        OperationKind::AddColumn => {
            let mut it = args.into_iter();
            let name = it.next().ok_or_else(|| malformed("expected a column name".into()))?;
            Ok(TableOperation::AddColumn {
                name,
                values: it.collect(),
            })
        }
    }
}

/// Extracts every `f_<name>(args)` call in `text`, in order. Text between
/// calls (arrows, `<END>`, prose) is ignored.
pub fn parse_function_chain(text: &str) -> Result<Vec<TableOperation>, ChainError> {
    let mut ops = Vec::new();
    let mut pos = 0;
    while let Some(caps) = call_re().captures_at(text, pos) {
        let whole = caps.get(0).unwrap();
        let function = format!("f_{}", &caps[1]);
        let kind = OperationKind::from_function_name(&function)
            .ok_or_else(|| ChainError::UnknownFunction(function.clone()))?;
        let (args, consumed) = split_args(&text[whole.end()..], &function)?;
        ops.push(build_operation(&function, kind, args)?);
        pos = whole.end() + consumed;
    }
    Ok(ops)
}

/// One line of a precomputed-chain file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub id: String,
    pub steps: Vec<StepRecord>,
    #[serde(default)]
    pub final_answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(default)]
    pub rationale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub call: Option<String>,
}

impl ChainRecord {
    pub fn from_chain(id: impl Into<String>, chain: &ReasoningChain) -> Self {
        ChainRecord {
            id: id.into(),
            steps: chain
                .steps
                .iter()
                .map(|s| StepRecord {
                    rationale: s.rationale.clone(),
                    call: s.operation.as_ref().map(|op| op.to_string()),
                })
                .collect(),
            final_answer: chain.final_answer.clone(),
        }
    }

    /// Rebuilds the chain against `table`, recomputing every snapshot.
    pub fn to_chain(&self, table: &Table) -> Result<ReasoningChain, ChainError> {
        let mut builder = ChainBuilder::new(table);
        let mut closing: Option<&str> = None;
        for (i, step) in self.steps.iter().enumerate() {
            match &step.call {
                Some(call) => {
                    if closing.is_some() {
                        return Err(ChainError::Invalid(format!("step {} follows the closing step", i + 1)));
                    }
                    let mut ops = parse_function_chain(call)?;
                    if ops.len() != 1 {
                        return Err(ChainError::Invalid(format!(
                            "step {} must hold exactly one call, found {}",
                            i + 1,
                            ops.len()
                        )));
                    }
                    builder.push(step.rationale.clone(), ops.remove(0))?;
                }
                None => {
                    if closing.is_some() {
                        return Err(ChainError::Invalid("more than one closing step".into()));
                    }
                    closing = Some(&step.rationale);
                }
            }
        }
        match (closing, &self.final_answer) {
            (Some(r), Some(a)) => Ok(builder.finish(r, a.clone())),
            (None, Some(a)) => Ok(builder.finish("", a.clone())),
            (Some(_), None) => Err(ChainError::Invalid("closing step without an answer".into())),
            (None, None) => Ok(builder.partial()),
        }
    }
}

pub fn read_chain_records<R: BufRead>(reader: R) -> Result<Vec<ChainRecord>, std::io::Error> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ChainRecord = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_chain_records<'a, W: std::io::Write>(
    mut writer: W,
    records: impl IntoIterator<Item = &'a ChainRecord>,
) -> std::io::Result<()> {
    for rec in records {
        serde_json::to_writer(&mut writer, rec)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
