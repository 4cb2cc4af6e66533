//! Naive reimplementation of the table transforms over plain vectors, plus a
//! generator of random (table, operation) pairs.

use rand::Rng;
use tabref_core::table::{SortOrder, Table, TableOperation};

pub type Grid = (Vec<String>, Vec<Vec<String>>);

fn col(cols: &[String], name: &str) -> Option<usize> {
    (0..cols.len()).find(|&i| cols[i] == name)
}

/// Plain decimal after dropping commas: optional sign, digits with at most
/// one point, at least one digit.
fn number(cell: &str) -> Option<f64> {
    let s: String = cell.trim().chars().filter(|&c| c != ',').collect();
    let body = s.strip_prefix(['+', '-']).unwrap_or(&s);
    let digits = body.chars().filter(|c| c.is_ascii_digit()).count();
    let points = body.chars().filter(|&c| c == '.').count();
    let only = body.chars().all(|c| c.is_ascii_digit() || c == '.');
    if digits == 0 || points > 1 || !only {
        return None;
    }
    s.parse().ok()
}

/// `None` means the operation must be rejected.
pub fn apply(grid: &Grid, op: &TableOperation) -> Option<Grid> {
    let (cols, rows) = grid;
    match op {
        TableOperation::AddColumn { name, values } => {
            if col(cols, name).is_some() || values.len() != rows.len() {
                return None;
            }
            let mut c = cols.clone();
            c.push(name.clone());
            let mut r = rows.clone();
            for (i, row) in r.iter_mut().enumerate() {
                row.push(values[i].clone());
            }
            Some((c, r))
        }
        TableOperation::SelectRow { rows: picks } => {
            let mut out = Vec::new();
            let mut last = 0;
            for &p in picks {
                if p <= last || p > rows.len() {
                    return None;
                }
                last = p;
                out.push(rows[p - 1].clone());
            }
            Some((cols.clone(), out))
        }
        TableOperation::SelectColumn { columns } => {
            if columns.is_empty() {
                return None;
            }
            let mut idx = Vec::new();
            for (i, name) in columns.iter().enumerate() {
                if columns[..i].iter().any(|n| n == name) {
                    return None;
                }
                idx.push(col(cols, name)?);
            }
            let r = rows.iter().map(|row| idx.iter().map(|&i| row[i].clone()).collect()).collect();
            Some((columns.clone(), r))
        }
        TableOperation::GroupColumn { column } => {
            let i = col(cols, column)?;
            if column == "count" {
                return None;
            }
            let mut distinct: Vec<String> = Vec::new();
            for row in rows {
                if !distinct.contains(&row[i]) {
                    distinct.push(row[i].clone());
                }
            }
            let count = |v: &String| rows.iter().filter(|r| &r[i] == v).count();
            let mut out = Vec::new();
            for n in (1..=rows.len()).rev() {
                for v in &distinct {
                    if count(v) == n {
                        out.push(vec![v.clone(), n.to_string()]);
                    }
                }
            }
            Some((vec![column.clone(), "count".into()], out))
        }
        TableOperation::SortColumn { column, order } => {
            let i = col(cols, column)?;
            let nums: Option<Vec<f64>> = rows.iter().map(|r| number(&r[i])).collect();
            // true when a must come strictly before b
            let before = |a: usize, b: usize| -> bool {
                let less = |x: usize, y: usize| match &nums {
                    Some(n) => n[x] < n[y],
                    None => rows[x][i].as_bytes() < rows[y][i].as_bytes(),
                };
                match order {
                    SortOrder::Ascending => less(a, b),
                    SortOrder::Descending => less(b, a),
                }
            };
            // stable insertion sort
            let mut perm: Vec<usize> = Vec::new();
            for k in 0..rows.len() {
                let at = perm.iter().position(|&p| before(k, p)).unwrap_or(perm.len());
                perm.insert(at, k);
            }
            Some((cols.clone(), perm.into_iter().map(|k| rows[k].clone()).collect()))
        }
    }
}

pub fn grid(t: &Table) -> Grid {
    (t.columns().to_vec(), t.rows().to_vec())
}

const CELLS: &[&str] = &[
    "ants", "bees", "Bees", "wasps", "10–3", "9–2", "1,204", "1,237", "12", "3", "03", "-2.5", "+4", ".5", "5.", "7", "0", "",
    "x y", "1e3", "2,00",
];
const NAMES: &[&str] = &["team", "wins", "city", "count", "score", "rank"];

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

/// Random small table. Columns that hold only numbers are common so that
/// numeric sorting gets exercised.
pub fn random_table<R: Rng>(rng: &mut R) -> Table {
    let ncols = rng.random_range(1..=4);
    let mut names: Vec<String> = Vec::new();
    while names.len() < ncols {
        let n = pick(rng, NAMES).to_string();
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let nrows = rng.random_range(0..=7);
    let numeric: Vec<bool> = (0..ncols).map(|_| rng.random_bool(0.4)).collect();
    let rows = (0..nrows)
        .map(|_| {
            (0..ncols)
                .map(|c| {
                    if numeric[c] {
                        pick(rng, &["1,204", "12", "3", "03", "-2.5", "+4", ".5", "5.", "7", "0", "1,237"]).to_string()
                    } else {
                        pick(rng, CELLS).to_string()
                    }
                })
                .collect()
        })
        .collect();
    Table::new(names, rows).unwrap()
}

fn some_column<R: Rng>(rng: &mut R, t: &Table) -> String {
    if rng.random_bool(0.85) {
        t.columns()[rng.random_range(0..t.columns().len())].clone()
    } else {
        pick(rng, NAMES).to_string()
    }
}

/// Random operation for `t`, valid most of the time.
pub fn random_op<R: Rng>(rng: &mut R, t: &Table) -> TableOperation {
    let n = t.row_count();
    match rng.random_range(0..5) {
        0 => {
            let len = if rng.random_bool(0.85) { n } else { n + 1 };
            TableOperation::AddColumn {
                name: if rng.random_bool(0.8) { "extra".into() } else { some_column(rng, t) },
                values: (0..len).map(|_| pick(rng, CELLS).to_string()).collect(),
            }
        }
        1 => {
            let mut rows: Vec<usize> = (1..=n).filter(|_| rng.random_bool(0.5)).collect();
            match rng.random_range(0..10) {
                0 => rows.push(n + 1),
                1 if rows.len() >= 2 => rows.swap(0, 1),
                2 => rows.insert(0, 0),
                _ => {}
            }
            TableOperation::SelectRow { rows }
        }
        2 => {
            let k = rng.random_range(0..=t.columns().len());
            let mut columns: Vec<String> = (0..k).map(|_| some_column(rng, t)).collect();
            if rng.random_bool(0.6) {
                columns.dedup();
                let mut seen = Vec::new();
                columns.retain(|c| {
                    let fresh = !seen.contains(c);
                    seen.push(c.clone());
                    fresh
                });
            }
            TableOperation::SelectColumn { columns }
        }
        3 => TableOperation::GroupColumn { column: some_column(rng, t) },
        _ => TableOperation::SortColumn {
            column: some_column(rng, t),
            order: if rng.random_bool(0.5) { SortOrder::Ascending } else { SortOrder::Descending },
        },
    }
}
