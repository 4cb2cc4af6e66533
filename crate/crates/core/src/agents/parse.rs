//! Strict parsers for agent replies.
//!
//! Labels may be wrapped in markdown bold (`**Conclusion:**`), but the value
//! grammar is exact: a conclusion with a trailing period, a missing bracket
//! or a second conclusion line is rejected.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::chain::{parse_function_chain, ChainError};
use crate::table::TableOperation;
use crate::tree::{normalize_name, RoutePath, Terminal};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no `{0}` line found")]
    Missing(&'static str),
    #[error("more than one `{0}` line")]
    Duplicate(&'static str),
    #[error("malformed `{label}` line: {line}")]
    Malformed { label: &'static str, line: String },
    #[error("critic named step {index} but the chain has {len} steps")]
    StepOutOfRange { index: usize, len: usize },
    #[error("function chain: {0}")]
    Chain(#[from] ChainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Correct,
    Incorrect,
}

/// Judge output: explanation `E`, status `P` and route `R`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub explanation: String,
    pub status: VerdictStatus,
    /// Present exactly when the status is `Incorrect`.
    pub route: Option<RoutePath>,
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        self.status == VerdictStatus::Correct
    }
}

/// Critic output: step-wise critique ending in its conclusion line, and the
/// 1-based index of the first erroneous step.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Critique {
    pub text: String,
    pub first_error_index: usize,
}

/// The value after `label:` when `line` starts with that label, allowing
/// `**label:**`, `**label**:` and a fully bold `**label: value**`.
pub(crate) fn label_value<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let t = line.trim();
    let inner = t
        .strip_prefix("**")
        .and_then(|s| s.strip_suffix("**"))
        .filter(|s| !s.contains("**"));
    if let Some(rest) = inner.and_then(|s| s.strip_prefix(label)).and_then(|s| s.strip_prefix(':')) {
        return Some(rest.trim());
    }
    for (open, close) in [("", ":"), ("**", ":**"), ("**", "**:")] {
        if let Some(rest) = t.strip_prefix(open).and_then(|s| s.strip_prefix(label)).and_then(|s| s.strip_prefix(close)) {
            return Some(rest.trim());
        }
    }
    None
}

/// The single line labelled `label`: (line index, value).
fn unique_label<'a>(lines: &[&'a str], label: &'static str) -> Result<(usize, &'a str), ParseError> {
    let mut found = lines
        .iter()
        .enumerate()
        .filter_map(|(i, l)| label_value(l, label).map(|v| (i, v)));
    let first = found.next().ok_or(ParseError::Missing(label))?;
    if found.next().is_some() {
        return Err(ParseError::Duplicate(label));
    }
    Ok(first)
}

fn bracket_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\[(Correct|Incorrect)\](.*)$").unwrap())
}

fn critic_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\[Incorrect\] Step ([1-9][0-9]{0,5})$").unwrap())
}

fn list_name_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^<([^<>]+)>$").unwrap())
}

const CONCLUSION: &str = "Conclusion";

/// Parses `Conclusion: [Correct]`, `Conclusion: [Incorrect] (a -> b -> <END>)`
/// or `Conclusion: [Incorrect] (random)`.
pub fn parse_verdict(text: &str) -> Result<Verdict, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let (at, value) = unique_label(&lines, CONCLUSION)?;
    let malformed = || ParseError::Malformed {
        label: CONCLUSION,
        line: lines[at].trim().to_string(),
    };
    let caps = bracket_re().captures(value).ok_or_else(malformed)?;
    let rest = caps[2].trim();
    let (status, route) = match &caps[1] {
        "Correct" if rest.is_empty() => (VerdictStatus::Correct, None),
        "Incorrect" if caps[2].starts_with(' ') => {
            let route = RoutePath::parse(rest).map_err(|_| malformed())?;
            (VerdictStatus::Incorrect, Some(route))
        }
        _ => return Err(malformed()),
    };
    Ok(Verdict {
        explanation: lines[..at].join("\n").trim().to_string(),
        status,
        route,
    })
}

/// Parses the critic's `Conclusion: [Incorrect] Step <NUM>` line, checking
/// `1 <= NUM <= chain_len`. The stored text ends at the conclusion line.
pub fn parse_critique(text: &str, chain_len: usize) -> Result<Critique, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let (at, value) = unique_label(&lines, CONCLUSION)?;
    let caps = critic_re().captures(value).ok_or_else(|| ParseError::Malformed {
        label: CONCLUSION,
        line: lines[at].trim().to_string(),
    })?;
    let index: usize = caps[1].parse().expect("regex admits only small integers");
    if index > chain_len {
        return Err(ParseError::StepOutOfRange { index, len: chain_len });
    }
    let body = lines[..at].join("\n").trim().to_string();
    let conclusion = format!("Conclusion: [Incorrect] Step {index}");
    let text = if body.is_empty() { conclusion } else { format!("{body}\n{conclusion}") };
    Ok(Critique {
        text,
        first_error_index: index,
    })
}

/// `Determination:` followed by `List 1: <name>` and `List 2: <name>`.
/// Returns the two normalized names.
pub fn parse_determination(text: &str) -> Result<(String, String), ParseError> {
    const DET: &str = "Determination";
    let lines: Vec<&str> = text.lines().collect();
    let (at, value) = unique_label(&lines, DET)?;
    if !value.is_empty() {
        return Err(ParseError::Malformed {
            label: DET,
            line: lines[at].trim().to_string(),
        });
    }
    let mut rest = lines[at + 1..].iter().filter(|l| !l.trim().is_empty());
    let mut name = |label: &'static str| -> Result<String, ParseError> {
        let line = rest.next().ok_or(ParseError::Missing(label))?;
        let malformed = || ParseError::Malformed {
            label,
            line: line.trim().to_string(),
        };
        let value = label_value(line, label).ok_or_else(malformed)?;
        let caps = list_name_re().captures(value).ok_or_else(malformed)?;
        let n = normalize_name(&caps[1]);
        if n.is_empty() {
            return Err(malformed());
        }
        Ok(n)
    };
    let first = name("List 1")?;
    let second = name("List 2")?;
    Ok((first, second))
}

/// `Addition: (name -> ... -> <END>)`.
pub fn parse_addition(text: &str) -> Result<RoutePath, ParseError> {
    const ADD: &str = "Addition";
    let lines: Vec<&str> = text.lines().collect();
    let (at, value) = unique_label(&lines, ADD)?;
    match RoutePath::parse(value) {
        Ok(r) if r.terminal == Terminal::End => Ok(r),
        _ => Err(ParseError::Malformed {
            label: ADD,
            line: lines[at].trim().to_string(),
        }),
    }
}

/// `Answer: <text>` with a nonempty value. Returns (text before the line,
/// answer).
pub fn parse_answer(text: &str) -> Result<(String, String), ParseError> {
    const ANSWER: &str = "Answer";
    let lines: Vec<&str> = text.lines().collect();
    let (at, value) = unique_label(&lines, ANSWER)?;
    if value.is_empty() {
        return Err(ParseError::Malformed {
            label: ANSWER,
            line: lines[at].trim().to_string(),
        });
    }
    Ok((lines[..at].join("\n").trim().to_string(), value.to_string()))
}

/// Calls in `text`. When no call is present the text must be empty apart
/// from `->` and `<END>` markers.
fn calls_or_end(text: &str) -> Result<Vec<TableOperation>, ParseError> {
    let ops = parse_function_chain(text)?;
    if ops.is_empty() {
        let leftover = text.replace("<END>", "").replace("->", "");
        if !leftover.trim().is_empty() {
            return Err(ParseError::Missing("f_<operation>(...)"));
        }
    }
    Ok(ops)
}

/// Refiner continuation: the calls after the last `Function Chain:` label,
/// or in the whole reply when there is no label.
pub fn parse_continuation(text: &str) -> Result<Vec<TableOperation>, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().rposition(|l| label_value(l, "Function Chain").is_some());
    let body = match start {
        Some(i) => {
            let mut parts = vec![label_value(lines[i], "Function Chain").unwrap()];
            parts.extend(&lines[i + 1..]);
            parts.join("\n")
        }
        None => text.to_string(),
    };
    calls_or_end(&body)
}

/// Initial-chain reply: `Function Chain:` (possibly continued on following
/// lines), optional `Explanation:`, and `Answer:`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedChain {
    pub operations: Vec<TableOperation>,
    pub explanation: String,
    pub answer: String,
}

pub fn parse_planned_chain(text: &str) -> Result<PlannedChain, ParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let (fc_at, fc_value) = unique_label(&lines, "Function Chain")?;
    let (answer_at, answer) = unique_label(&lines, "Answer")?;
    let explanation_at = lines.iter().position(|l| label_value(l, "Explanation").is_some());
    let end = [explanation_at, Some(answer_at)]
        .into_iter()
        .flatten()
        .filter(|&i| i > fc_at)
        .min()
        .unwrap_or(lines.len());
    let mut chain_text = vec![fc_value];
    chain_text.extend(&lines[fc_at + 1..end]);
    let operations = calls_or_end(&chain_text.join("\n"))?;
    if answer.is_empty() {
        return Err(ParseError::Malformed {
            label: "Answer",
            line: lines[answer_at].trim().to_string(),
        });
    }
    let explanation = match explanation_at {
        Some(i) if i < answer_at => {
            let mut parts = vec![label_value(lines[i], "Explanation").unwrap()];
            parts.extend(&lines[i + 1..answer_at]);
            parts.join("\n").trim().to_string()
        }
        _ => String::new(),
    };
    Ok(PlannedChain {
        operations,
        explanation,
        answer: answer.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_forms() {
        let v = parse_verdict("Explanation:\nStep 2 is incorrect.\n\nConclusion: [Incorrect] (sub-table error -> column error -> <END>)").unwrap();
        assert_eq!(v.status, VerdictStatus::Incorrect);
        assert_eq!(v.route.unwrap().segments, ["sub-table error", "column error"]);
        assert_eq!(v.explanation, "Explanation:\nStep 2 is incorrect.");
        let v = parse_verdict("Conclusion: [Correct]").unwrap();
        assert!(v.is_correct() && v.route.is_none());
        let v = parse_verdict("**Conclusion:** [Incorrect] (random)").unwrap();
        assert_eq!(v.route.unwrap().terminal, Terminal::Random);
    }

    #[test]
    fn verdict_rejections() {
        for bad in [
            "",
            "Conclusion: Correct",
            "Conclusion: [Correct] (random)",
            "Conclusion: [Incorrect]",
            "Conclusion: [Incorrect] random",
            "Conclusion: [Incorrect](random)",
            "Conclusion: [Incorrect] (a -> b)",
            "Conclusion: [Incorrect] (random).",
            "Conclusion: [Correct]\nConclusion: [Correct]",
            "conclusion: [Correct]",
            "Conclusion: [correct]",
        ] {
            assert!(parse_verdict(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn critique_bounds() {
        let c = parse_critique("Step 1 is correct.\nStep 2 is incorrect.\n\nConclusion: [Incorrect] Step 2\nThanks.", 3).unwrap();
        assert_eq!(c.first_error_index, 2);
        assert!(c.text.ends_with("Step 2 is incorrect.\nConclusion: [Incorrect] Step 2"));
        assert_eq!(
            parse_critique("Conclusion: [Incorrect] Step 4", 3),
            Err(ParseError::StepOutOfRange { index: 4, len: 3 })
        );
        for bad in ["Conclusion: [Incorrect] Step 0", "Conclusion: [Incorrect] Step", "Conclusion: [Correct]", "Conclusion: [Incorrect] Step 2."] {
            assert!(parse_critique(bad, 3).is_err(), "{bad}");
        }
    }

    #[test]
    fn determination_and_addition() {
        let (a, b) = parse_determination("Explanation:\n...\n\nDetermination:\nList 1: <row error>\nList 2: <row error>").unwrap();
        assert_eq!(a, b);
        let (a, b) = parse_determination("**Determination:**\nList 1: <row misidentification error>\n\nList 2: <row omission error>").unwrap();
        assert_eq!((a.as_str(), b.as_str()), ("row misidentification error", "row omission error"));
        assert!(parse_determination("Determination:\nList 1: row error\nList 2: <row error>").is_err());
        assert!(parse_determination("Determination:\nList 1: <row error>").is_err());
        assert!(parse_determination("Determination:\nList 2: <a>\nList 1: <b>").is_err());
        let r = parse_addition("**Addition: (final query error -> <END>)**").unwrap();
        assert_eq!(r.segments, ["final query error"]);
        assert!(parse_addition("Addition: (random)").is_err());
        assert!(parse_addition("Addition: final query error -> <END>").is_err());
    }

    #[test]
    fn continuation_and_plans() {
        assert_eq!(parse_continuation("Function Chain:\nf_select_row(row 3)").unwrap().len(), 1);
        assert_eq!(parse_continuation("f_select_row(row 3) -> f_select_column(a) -> <END>").unwrap().len(), 2);
        assert!(parse_continuation("<END>").unwrap().is_empty());
        assert!(parse_continuation("I cannot help with that.").is_err());
        let p = parse_planned_chain(
            "Function Chain: f_select_row(row 1, row 2) ->\nf_select_column(gold)\nExplanation: count them\nAnswer: 2",
        )
        .unwrap();
        assert_eq!(p.operations.len(), 2);
        assert_eq!((p.explanation.as_str(), p.answer.as_str()), ("count them", "2"));
        assert!(parse_planned_chain("Function Chain: <END>\nAnswer: 4").unwrap().operations.is_empty());
        assert!(parse_planned_chain("Answer: 4").is_err());
        assert!(parse_planned_chain("Function Chain: f_nope(x)\nAnswer: 4").is_err());
        assert!(parse_planned_chain("Function Chain: <END>\nAnswer:").is_err());
    }
}
