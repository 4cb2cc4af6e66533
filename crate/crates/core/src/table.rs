//! Tables and the five table transforms that reasoning chains are built from.
//!
//! Tables travel through prompts as a pipe-delimited block:
//!
//! ```text
//! /*
//! col   : res. | record
//! row 1 : loss | 10–3
//! */
//! ```
//!
//! Cells are stored verbatim (no dash or number normalization). A valid cell
//! has no surrounding whitespace, no line break and no `|`, which is what
//! makes the block format lossless.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("invalid table: {0}")]
    Invalid(String),
    #[error("malformed table block at line {line}: {reason}")]
    MalformedTable { line: usize, reason: String },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {index} is out of range (table has {rows} rows)")]
    RowIndexOutOfRange { index: usize, rows: usize },
    #[error("expected {expected} values, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

/// A header plus rows of cell strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TryFrom<RawTable> for Table {
    type Error = TableError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        Table::new(raw.columns, raw.rows)
    }
}

impl From<Table> for RawTable {
    fn from(t: Table) -> Self {
        RawTable {
            columns: t.columns,
            rows: t.rows,
        }
    }
}

fn check_cell(cell: &str) -> Result<(), String> {
    if cell.contains(['\n', '\r', '|']) {
        return Err(format!("cell {cell:?} contains a line break or `|`"));
    }
    if cell.trim() != cell {
        return Err(format!("cell {cell:?} has surrounding whitespace"));
    }
    Ok(())
}

/// Cleans a raw cell so it satisfies the cell rules: trims, folds line
/// breaks to spaces and replaces `|` with `/`.
pub fn sanitize_cell(raw: &str) -> String {
    raw.replace(['\n', '\r'], " ").replace('|', "/").trim().to_string()
}

impl Table {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self, TableError> {
        if columns.is_empty() {
            return Err(TableError::Invalid("a table needs at least one column".into()));
        }
        for (i, name) in columns.iter().enumerate() {
            if name.is_empty() {
                return Err(TableError::Invalid(format!("column {} has an empty name", i + 1)));
            }
            check_cell(name).map_err(TableError::Invalid)?;
            if columns[..i].contains(name) {
                return Err(TableError::DuplicateColumn(name.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(TableError::Invalid(format!(
                    "row {} has {} cells, header has {}",
                    i + 1,
                    row.len(),
                    columns.len()
                )));
            }
            for cell in row {
                check_cell(cell).map_err(TableError::Invalid)?;
            }
        }
        Ok(Table { columns, rows })
    }

    /// Builds a table from untrusted data (dataset files), sanitizing cells,
    /// naming blank headers `column <n>` and suffixing duplicate headers.
    pub fn sanitized<S: AsRef<str>>(columns: &[S], rows: &[Vec<S>]) -> Result<Self, TableError> {
        let mut names: Vec<String> = Vec::with_capacity(columns.len());
        for (i, raw) in columns.iter().enumerate() {
            let mut name = sanitize_cell(raw.as_ref());
            if name.is_empty() {
                name = format!("column {}", i + 1);
            }
            let base = name.clone();
            let mut n = 2;
            while names.contains(&name) {
                name = format!("{base}_{n}");
                n += 1;
            }
            names.push(name);
        }
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|c| sanitize_cell(c.as_ref())).collect())
            .collect();
        Table::new(names, rows)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn require_column(&self, name: &str) -> Result<usize, TableError> {
        self.column_index(name)
            .ok_or_else(|| TableError::UnknownColumn(name.to_string()))
    }

    pub fn column_values(&self, name: &str) -> Option<impl Iterator<Item = &str>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(move |r| r[idx].as_str()))
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_prompt_table(self))
    }
}

/// Renders the `/* col : … */` prompt block. Rows are numbered from 1 and
/// there is no trailing newline after `*/`.
pub fn render_prompt_table(table: &Table) -> String {
    let mut out = String::from("/*\ncol   : ");
    out.push_str(&table.columns.join(" | "));
    out.push('\n');
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str("row ");
        out.push_str(&(i + 1).to_string());
        out.push_str(" : ");
        out.push_str(&row.join(" | "));
        out.push('\n');
    }
    out.push_str("*/");
    out
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^col\s*:(.*)$").unwrap())
}

fn row_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^row\s+(\d+)\s*:(.*)$").unwrap())
}

fn split_cells(body: &str) -> Vec<String> {
    body.split('|').map(|c| c.trim().to_string()).collect()
}

/// Parses a prompt block back into a [`Table`]. Surrounding whitespace on
/// each line and alignment padding inside cells are ignored; blank lines
/// inside the block are skipped.
pub fn parse_prompt_table(text: &str) -> Result<Table, TableError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let malformed = |line: usize, reason: &str| TableError::MalformedTable {
        line,
        reason: reason.to_string(),
    };
    let Some(&(first_no, first)) = lines.first() else {
        return Err(malformed(1, "empty input"));
    };
    if first != "/*" {
        return Err(malformed(first_no, "block must open with `/*`"));
    }
    let &(last_no, last) = lines.last().unwrap();
    if last != "*/" || lines.len() < 2 {
        return Err(malformed(last_no, "block must close with `*/`"));
    }
    let body = &lines[1..lines.len() - 1];
    let Some(&(header_no, header)) = body.first() else {
        return Err(malformed(last_no, "missing `col :` header"));
    };
    let caps = header_re()
        .captures(header)
        .ok_or_else(|| malformed(header_no, "missing `col :` header"))?;
    let columns = split_cells(&caps[1]);

    let mut rows = Vec::with_capacity(body.len() - 1);
    for &(line_no, line) in &body[1..] {
        let caps = row_re()
            .captures(line)
            .ok_or_else(|| malformed(line_no, "expected `row <n> :` line"))?;
        let number: usize = caps[1]
            .parse()
            .map_err(|_| malformed(line_no, "row number does not fit"))?;
        if number != rows.len() + 1 {
            return Err(malformed(
                line_no,
                &format!("row numbering is not contiguous: expected {}, found {number}", rows.len() + 1),
            ));
        }
        let cells = split_cells(&caps[2]);
        if cells.len() != columns.len() {
            return Err(malformed(
                line_no,
                &format!("row has {} cells, header has {}", cells.len(), columns.len()),
            ));
        }
        rows.push(cells);
    }
    Table::new(columns, rows).map_err(|e| malformed(header_no, &e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    AddColumn,
    SelectRow,
    SelectColumn,
    GroupColumn,
    SortColumn,
}

impl OperationKind {
    pub const ALL: [OperationKind; 5] = [
        OperationKind::AddColumn,
        OperationKind::SelectRow,
        OperationKind::SelectColumn,
        OperationKind::GroupColumn,
        OperationKind::SortColumn,
    ];

    pub fn function_name(self) -> &'static str {
        match self {
            OperationKind::AddColumn => "f_add_column",
            OperationKind::SelectRow => "f_select_row",
            OperationKind::SelectColumn => "f_select_column",
            OperationKind::GroupColumn => "f_group_column",
            OperationKind::SortColumn => "f_sort_column",
        }
    }

    pub fn from_function_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.function_name() == name)
    }
}

/// One of the five transforms a reasoning step may apply.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableOperation {
    /// Appends a column; one value per existing row.
    AddColumn { name: String, values: Vec<String> },
    /// Keeps the listed rows (1-based, strictly increasing).
    SelectRow { rows: Vec<usize> },
    /// Keeps the listed columns in the listed order.
    SelectColumn { columns: Vec<String> },
    /// Replaces the table with `(value, count)` pairs.
    GroupColumn { column: String },
    SortColumn { column: String, order: SortOrder },
}

impl TableOperation {
    pub fn kind(&self) -> OperationKind {
        match self {
            TableOperation::AddColumn { .. } => OperationKind::AddColumn,
            TableOperation::SelectRow { .. } => OperationKind::SelectRow,
            TableOperation::SelectColumn { .. } => OperationKind::SelectColumn,
            TableOperation::GroupColumn { .. } => OperationKind::GroupColumn,
            TableOperation::SortColumn { .. } => OperationKind::SortColumn,
        }
    }
}

pub const GROUP_COUNT_COLUMN: &str = "count";

/// Applies `op` to `table`, returning a new table. The input is untouched.
pub fn apply_operation(table: &Table, op: &TableOperation) -> Result<Table, TableError> {
    match op {
        TableOperation::AddColumn { name, values } => add_column(table, name, values),
        TableOperation::SelectRow { rows } => select_rows(table, rows),
        TableOperation::SelectColumn { columns } => select_columns(table, columns),
        TableOperation::GroupColumn { column } => group_column(table, column),
        TableOperation::SortColumn { column, order } => sort_column(table, column, *order),
    }
}

fn add_column(table: &Table, name: &str, values: &[String]) -> Result<Table, TableError> {
    if table.column_index(name).is_some() {
        return Err(TableError::DuplicateColumn(name.to_string()));
    }
    if values.len() != table.rows.len() {
        return Err(TableError::ArityMismatch {
            expected: table.rows.len(),
            found: values.len(),
        });
    }
    let mut columns = table.columns.clone();
    columns.push(name.to_string());
    let rows = table
        .rows
        .iter()
        .zip(values)
        .map(|(row, v)| {
            let mut row = row.clone();
            row.push(v.clone());
            row
        })
        .collect();
    Table::new(columns, rows)
}

fn select_rows(table: &Table, indices: &[usize]) -> Result<Table, TableError> {
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TableError::InvalidArguments(
            "row indices must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(indices.len());
    for &i in indices {
        if i == 0 || i > table.rows.len() {
            return Err(TableError::RowIndexOutOfRange {
                index: i,
                rows: table.rows.len(),
            });
        }
        rows.push(table.rows[i - 1].clone());
    }
    Ok(Table {
        columns: table.columns.clone(),
        rows,
    })
}

fn select_columns(table: &Table, names: &[String]) -> Result<Table, TableError> {
    if names.is_empty() {
        return Err(TableError::InvalidArguments("no columns selected".into()));
    }
    let mut idx = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(TableError::DuplicateColumn(name.clone()));
        }
        idx.push(table.require_column(name)?);
    }
    let rows = table
        .rows
        .iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect();
    Ok(Table {
        columns: names.to_vec(),
        rows,
    })
}

fn group_column(table: &Table, column: &str) -> Result<Table, TableError> {
    let idx = table.require_column(column)?;
    if column == GROUP_COUNT_COLUMN {
        return Err(TableError::DuplicateColumn(column.to_string()));
    }
    // (value, count) in first-appearance order
    let mut groups: Vec<(&str, usize)> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for row in &table.rows {
        let v = row[idx].as_str();
        match slot.get(v) {
            Some(&s) => groups[s].1 += 1,
            None => {
                slot.insert(v, groups.len());
                groups.push((v, 1));
            }
        }
    }
    // stable sort keeps first appearance among equal counts
    groups.sort_by_key(|g| std::cmp::Reverse(g.1));
    let rows = groups
        .into_iter()
        .map(|(v, n)| vec![v.to_string(), n.to_string()])
        .collect();
    Ok(Table {
        columns: vec![column.to_string(), GROUP_COUNT_COLUMN.to_string()],
        rows,
    })
}

fn decimal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?(\d+(\.\d*)?|\.\d+)$").unwrap())
}

/// Numeric value of a cell for sorting: the whole trimmed cell, with commas
/// removed, must be a plain decimal number.
pub fn numeric_cell(cell: &str) -> Option<f64> {
    let s = cell.trim().replace(',', "");
    if decimal_re().is_match(&s) {
        s.parse().ok()
    } else {
        None
    }
}

fn sort_column(table: &Table, column: &str, order: SortOrder) -> Result<Table, TableError> {
    let idx = table.require_column(column)?;
    let numeric: Option<Vec<f64>> = table.rows.iter().map(|r| numeric_cell(&r[idx])).collect();
    let mut perm: Vec<usize> = (0..table.rows.len()).collect();
    let cmp = |a: &usize, b: &usize| -> Ordering {
        match &numeric {
            Some(nums) => nums[*a].partial_cmp(&nums[*b]).unwrap_or(Ordering::Equal),
            None => table.rows[*a][idx].cmp(&table.rows[*b][idx]),
        }
    };
    match order {
        SortOrder::Ascending => perm.sort_by(cmp),
        SortOrder::Descending => perm.sort_by(|a, b| cmp(b, a)),
    }
    Ok(Table {
        columns: table.columns.clone(),
        rows: perm.into_iter().map(|i| table.rows[i].clone()).collect(),
    })
}
