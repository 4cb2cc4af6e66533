//! Benchmark items: the JSONL interchange format and converters from the
//! public WikiTQ and TabFact distributions.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{Table, TableError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Qa,
    FactVerification,
}

pub const ENTAILED: &str = "entailed";
pub const REFUTED: &str = "refuted";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkItem {
    pub id: String,
    pub table: Table,
    pub question: String,
    pub gold_answers: Vec<String>,
    pub task: Task,
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: String,
    #[serde(default = "default_task")]
    pub task: Task,
    pub question: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub answers: Vec<String>,
}

fn default_task() -> Task {
    Task::Qa
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("item {id}: {source}")]
    Table {
        id: String,
        #[source]
        source: TableError,
    },
    #[error("item {id}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("duplicate item id {0}")]
    DuplicateId(String),
}

/// Maps a fact-verification label to `entailed` / `refuted`.
pub fn fact_label(raw: &str) -> Option<&'static str> {
    match raw.trim().to_lowercase().as_str() {
        "1" | "true" | "yes" | ENTAILED => Some(ENTAILED),
        "0" | "false" | "no" | REFUTED => Some(REFUTED),
        _ => None,
    }
}

impl BenchmarkItem {
    /// Validates a record; cells are sanitized for the prompt format.
    pub fn from_record(r: ItemRecord) -> Result<Self, DatasetError> {
        let invalid = |reason: &str| DatasetError::Invalid {
            id: r.id.clone(),
            reason: reason.to_string(),
        };
        if r.id.trim().is_empty() {
            return Err(invalid("empty id"));
        }
        if r.answers.is_empty() {
            return Err(invalid("no gold answers"));
        }
        let gold_answers = match r.task {
            Task::Qa => r.answers.clone(),
            Task::FactVerification => {
                let [label] = r.answers.as_slice() else {
                    return Err(invalid("fact verification needs exactly one label"));
                };
                vec![fact_label(label).ok_or_else(|| invalid("label must be entailed/refuted or 1/0"))?.to_string()]
            }
        };
        let table = Table::sanitized(&r.columns, &r.rows).map_err(|source| DatasetError::Table {
            id: r.id.clone(),
            source,
        })?;
        Ok(BenchmarkItem {
            id: r.id,
            table,
            question: r.question.trim().to_string(),
            gold_answers,
            task: r.task,
        })
    }

    pub fn to_record(&self) -> ItemRecord {
        ItemRecord {
            id: self.id.clone(),
            task: self.task,
            question: self.question.clone(),
            columns: self.table.columns().to_vec(),
            rows: self.table.rows().to_vec(),
            answers: self.gold_answers.clone(),
        }
    }
}

pub fn read_items<R: BufRead>(reader: R) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let mut out: Vec<BenchmarkItem> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ItemRecord = serde_json::from_str(&line).map_err(|e| DatasetError::Record {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let item = BenchmarkItem::from_record(record)?;
        if !seen.insert(item.id.clone()) {
            return Err(DatasetError::DuplicateId(item.id));
        }
        out.push(item);
    }
    Ok(out)
}

pub fn load_items(path: impl AsRef<Path>) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let f = std::fs::File::open(path)?;
    read_items(std::io::BufReader::new(f))
}

pub fn write_items<'a, W: Write>(mut w: W, items: impl IntoIterator<Item = &'a BenchmarkItem>) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, &item.to_record())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a table file with the given delimiter. The first record is the
/// header; short rows are padded and long rows truncated to its width.
pub fn read_table_file(path: &Path, delimiter: u8) -> Result<(Vec<String>, Vec<Vec<String>>), DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err)?;
    let columns: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let mut row: Vec<String> = rec.iter().take(columns.len()).map(str::to_string).collect();
        row.resize(columns.len(), String::new());
        rows.push(row);
    }
    Ok((columns, rows))
}

/// Undoes the TSV escaping used in WikiTQ files (`\n`, `\p` for `|`, `\\`).
pub fn unescape_wikitq(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('p') => out.push('|'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Converts a WikiTQ split file (`id`, `utterance`, `context`,
/// `targetValue` columns, tab separated). `context` paths such as
/// `csv/204-csv/590.csv` are resolved against `root`; multiple target
/// values are separated by `|`.
pub fn convert_wikitq(tsv: &Path, root: &Path) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let csv_err = |source| DatasetError::Csv {
        path: tsv.display().to_string(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_path(tsv)
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| DatasetError::Record {
            line: 1,
            reason: format!("missing `{name}` column"),
        })
    };
    let (id_i, q_i, ctx_i, target_i) = (col("id")?, col("utterance")?, col("context")?, col("targetValue")?);
    let mut items = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| {
            rec.get(i).ok_or_else(|| DatasetError::Record {
                line: n + 2,
                reason: "short row".into(),
            })
        };
        let (columns, rows) = read_table_file(&root.join(field(ctx_i)?), b',')?;
        let answers = field(target_i)?.split('|').map(unescape_wikitq).collect();
        items.push(BenchmarkItem::from_record(ItemRecord {
            id: field(id_i)?.to_string(),
            task: Task::Qa,
            question: unescape_wikitq(field(q_i)?),
            columns,
            rows,
            answers,
        })?);
    }
    Ok(items)
}

/// Converts TabFact statements: a JSON object mapping table file names to
/// `[statements, labels, caption]`, with `#`-delimited tables in
/// `table_dir`. Item ids are `<table file>#<statement index>`.
pub fn convert_tabfact(json: &Path, table_dir: &Path) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let text = std::fs::read_to_string(json)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| DatasetError::Record {
        line: 1,
        reason: e.to_string(),
    })?;
    let map = value.as_object().ok_or_else(|| DatasetError::Record {
        line: 1,
        reason: "expected an object keyed by table file".into(),
    })?;
    let mut items = Vec::new();
    for (file, entry) in map {
        let bad = |reason: &str| DatasetError::Invalid {
            id: file.clone(),
            reason: reason.to_string(),
        };
        let statements = entry.get(0).and_then(|v| v.as_array()).ok_or_else(|| bad("missing statements"))?;
        let labels = entry.get(1).and_then(|v| v.as_array()).ok_or_else(|| bad("missing labels"))?;
        if statements.len() != labels.len() {
            return Err(bad("statement and label counts differ"));
        }
        let (columns, rows) = read_table_file(&table_dir.join(file), b'#')?;
        for (i, (s, l)) in statements.iter().zip(labels).enumerate() {
            let statement = s.as_str().ok_or_else(|| bad("statement is not a string"))?;
            let label = match l {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => return Err(bad("label must be 0/1")),
            };
            items.push(BenchmarkItem::from_record(ItemRecord {
                id: format!("{file}#{i}"),
                task: Task::FactVerification,
                question: statement.to_string(),
                columns: columns.clone(),
                rows: rows.clone(),
                answers: vec![label],
            })?);
        }
    }
    Ok(items)
}
