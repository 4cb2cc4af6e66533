//! Correction/degradation deltas, iteration histograms and cost reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{weighted_cost, LedgerSnapshot, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("item id sets differ: {only_baseline} only in baseline, {only_treated} only in treated (e.g. {example})")]
    IdSetMismatch {
        only_baseline: usize,
        only_treated: usize,
        example: String,
    },
    #[error("duplicate item id {0}")]
    DuplicateId(String),
}

/// Percentages over all items. `degradation_pct` is reported negative and
/// `net_pct` is defined as the sum of the other two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub items: usize,
    pub corrected: usize,
    pub degraded: usize,
    pub correction_pct: f64,
    pub degradation_pct: f64,
    pub net_pct: f64,
}

fn outcome_map(outcomes: &[(String, bool)]) -> Result<BTreeMap<&str, bool>, MetricsError> {
    let mut map = BTreeMap::new();
    for (id, ok) in outcomes {
        if map.insert(id.as_str(), *ok).is_some() {
            return Err(MetricsError::DuplicateId(id.clone()));
        }
    }
    Ok(map)
}

/// Compares per-item correctness between a baseline and a treated run.
pub fn compute_deltas(baseline: &[(String, bool)], treated: &[(String, bool)]) -> Result<Deltas, MetricsError> {
    let b = outcome_map(baseline)?;
    let t = outcome_map(treated)?;
    let only_b: Vec<&&str> = b.keys().filter(|k| !t.contains_key(*k)).collect();
    let only_t: Vec<&&str> = t.keys().filter(|k| !b.contains_key(*k)).collect();
    if !only_b.is_empty() || !only_t.is_empty() {
        return Err(MetricsError::IdSetMismatch {
            only_baseline: only_b.len(),
            only_treated: only_t.len(),
            example: only_b.iter().chain(&only_t).next().map(|s| s.to_string()).unwrap_or_default(),
        });
    }
    let n = b.len();
    let corrected = b.iter().filter(|(id, ok)| !**ok && t[*id]).count();
    let degraded = b.iter().filter(|(id, ok)| **ok && !t[*id]).count();
    let pct = |c: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
    let correction_pct = pct(corrected);
    let degradation_pct = if degraded == 0 { 0.0 } else { -pct(degraded) };
    Ok(Deltas {
        items: n,
        corrected,
        degraded,
        correction_pct,
        degradation_pct,
        net_pct: correction_pct + degradation_pct,
    })
}

/// Percentage of correct outcomes.
pub fn accuracy_pct(outcomes: &[(String, bool)]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    100.0 * outcomes.iter().filter(|(_, ok)| *ok).count() as f64 / outcomes.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationHistogram {
    pub k: usize,
    /// Sessions that used exactly `i` iterations, `i = 0..=k`.
    pub counts: Vec<usize>,
    pub densities: Vec<f64>,
    /// Accuracy (fraction) if refinement had been capped at `i` iterations.
    pub capped_accuracy: Vec<f64>,
}

/// Builds the histogram from per-item correctness traces: `trace[i]` is
/// whether the answer after `i` iterations was correct, so a trace of
/// length `n + 1` used `n` iterations. Longer traces are clamped to `k`.
pub fn iteration_histogram(traces: &[Vec<bool>], k: usize) -> IterationHistogram {
    let mut counts = vec![0usize; k + 1];
    for t in traces {
        counts[t.len().saturating_sub(1).min(k)] += 1;
    }
    let total = traces.len();
    let frac = |c: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    let densities = counts.iter().map(|&c| frac(c)).collect();
    let capped_accuracy = (0..=k)
        .map(|cap| {
            frac(
                traces
                    .iter()
                    .filter(|t| t.get(cap.min(t.len().saturating_sub(1))).copied().unwrap_or(false))
                    .count(),
            )
        })
        .collect();
    IterationHistogram {
        k,
        counts,
        densities,
        capped_accuracy,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub items: usize,
    pub per_agent: BTreeMap<String, Usage>,
    pub total: Usage,
    /// `0.25 * input + 0.75 * output` over all calls.
    pub weighted_total: f64,
    pub weighted_per_item: f64,
    pub baseline_weighted_total: Option<f64>,
    /// Weighted total divided by the baseline's.
    pub ratio: Option<f64>,
}

pub fn cost_ratio(treated_weighted: f64, baseline_weighted: f64) -> Option<f64> {
    (baseline_weighted > 0.0).then(|| treated_weighted / baseline_weighted)
}

/// Ratio of weighted costs for raw (input, output) totals.
pub fn cost_ratio_from_counts(treated: (f64, f64), baseline: (f64, f64)) -> Option<f64> {
    cost_ratio(weighted_cost(treated.0, treated.1), weighted_cost(baseline.0, baseline.1))
}

pub fn cost_report(ledger: &LedgerSnapshot, items: usize, baseline_weighted_total: Option<f64>) -> CostReport {
    let weighted_total = ledger.total.weighted();
    CostReport {
        items,
        per_agent: ledger.per_agent.clone(),
        total: ledger.total,
        weighted_total,
        weighted_per_item: if items == 0 { 0.0 } else { weighted_total / items as f64 },
        baseline_weighted_total,
        ratio: baseline_weighted_total.and_then(|b| cost_ratio(weighted_total, b)),
    }
}
