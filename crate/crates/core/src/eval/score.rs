//! Answer normalization and matching.

use std::sync::OnceLock;

use regex::Regex;

use super::dataset::{fact_label, BenchmarkItem, Task};

const NUMERIC_TOLERANCE: f64 = 1e-6;

fn thousands_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$").unwrap())
}

fn is_dash(c: char) -> bool {
    matches!(c, '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{fe58}' | '\u{fe63}' | '\u{ff0d}')
}

fn is_wrapper(c: char) -> bool {
    matches!(c, '"' | '\'' | '.' | '\u{2018}' | '\u{2019}' | '\u{201c}' | '\u{201d}') || c.is_whitespace()
}

/// Lowercases, maps unicode dashes to `-`, collapses whitespace, strips
/// surrounding quotes and periods, and drops thousands separators from
/// numbers such as `1,237`.
pub fn normalize_answer(raw: &str) -> String {
    let dashed: String = raw.chars().map(|c| if is_dash(c) { '-' } else { c }).collect();
    let collapsed = dashed.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
    let stripped = collapsed.trim_matches(is_wrapper).to_string();
    if thousands_re().is_match(&stripped) {
        stripped.replace(',', "")
    } else {
        stripped
    }
}

fn as_number(s: &str) -> Option<f64> {
    if s.is_empty() || !s.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Whether two answers match after normalization: numerically within
/// 1e-6 when both parse as numbers, otherwise as exact strings.
pub fn answers_match(a: &str, b: &str) -> bool {
    let (a, b) = (normalize_answer(a), normalize_answer(b));
    if a.is_empty() || b.is_empty() {
        return false;
    }
    match (as_number(&a), as_number(&b)) {
        (Some(x), Some(y)) => (x - y).abs() <= NUMERIC_TOLERANCE,
        _ => a == b,
    }
}

/// Scores a prediction. Fact verification accepts yes/true/entailed and
/// no/false/refuted.
pub fn score_answer(predicted: &str, item: &BenchmarkItem) -> bool {
    match item.task {
        Task::Qa => item.gold_answers.iter().any(|g| answers_match(predicted, g)),
        Task::FactVerification => {
            let p = normalize_answer(predicted);
            match fact_label(&p) {
                Some(label) => item.gold_answers.iter().any(|g| g == label),
                None => false,
            }
        }
    }
}
