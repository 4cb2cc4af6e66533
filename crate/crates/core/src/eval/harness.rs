//! Runs the refinement engine over a dataset and aggregates a report.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, PoisonError};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{BenchmarkItem, Task};
use super::metrics::{accuracy_pct, compute_deltas, cost_report, iteration_histogram, CostReport, Deltas, IterationHistogram, MetricsError};
use super::score::score_answer;
use crate::agents::{Agents, PromptSet, TreeChange, PROMPT_VERSION};
use crate::chain::{ChainRecord, ReasoningChain};
use crate::engine::{run_session, Curation, EngineConfig, Outcome, SharedTree, DEFAULT_K};
use crate::llm::{LedgerSnapshot, LlmClient};
use crate::transcript::Transcript;
use crate::tree::TemplateTree;

pub const REPORT_SCHEMA: &str = "run-report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
    /// Concurrent sessions. Scripted backends need 1.
    pub workers: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: DEFAULT_K,
            seed: 0,
            workers: 1,
        }
    }
}

/// Per-item sampling seed: the run seed mixed with a hash of the item id.
pub fn item_seed(seed: u64, id: &str) -> u64 {
    let digest = Sha256::digest(id.as_bytes());
    seed ^ u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub id: String,
    pub task: Task,
    pub answer: Option<String>,
    pub correct: bool,
    pub initial_answer: Option<String>,
    pub initial_correct: bool,
    pub iterations: usize,
    /// `converged_correct`, `max_iterations_reached`, `aborted` or
    /// `unanswered`.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// `none`, `skipped`, `added`, `split`, `branched` or `failed`.
    pub curation: String,
    /// Correctness after 0, 1, ... iterations.
    pub trace: Vec<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub converged_correct: usize,
    pub max_iterations_reached: usize,
    pub aborted: usize,
    pub unanswered: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub version: u64,
    pub leaves: usize,
    pub templates: usize,
    pub depth: usize,
}

impl TreeSummary {
    pub fn of(tree: &TemplateTree) -> Self {
        TreeSummary {
            version: tree.version(),
            leaves: tree.leaf_count(),
            templates: tree.template_count(),
            depth: tree.depth(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub backend: String,
    pub prompt_version: u32,
    pub k: usize,
    pub seed: u64,
    pub item_count: usize,
    pub accuracy_pct: f64,
    pub initial_accuracy_pct: f64,
    /// Refined answers against each item's own initial chain.
    pub deltas_vs_initial: Deltas,
    pub deltas_vs_baseline: Option<Deltas>,
    pub outcomes: OutcomeCounts,
    pub cost: CostReport,
    pub histogram: IterationHistogram,
    pub tree: TreeSummary,
    /// Sorted by id.
    pub items: Vec<ItemOutcome>,
}

impl RunReport {
    pub fn outcome_pairs(&self) -> Vec<(String, bool)> {
        self.items.iter().map(|i| (i.id.clone(), i.correct)).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Per-item table for plotting.
    pub fn items_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "task", "correct", "answer", "initial_correct", "initial_answer", "iterations", "outcome", "curation"])
            .expect("in-memory write");
        for i in &self.items {
            let task = match i.task {
                Task::Qa => "qa",
                Task::FactVerification => "fact_verification",
            };
            w.write_record([
                i.id.as_str(),
                task,
                &i.correct.to_string(),
                i.answer.as_deref().unwrap_or(""),
                &i.initial_correct.to_string(),
                i.initial_answer.as_deref().unwrap_or(""),
                &i.iterations.to_string(),
                &i.outcome,
                &i.curation,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn histogram_csv(&self) -> String {
        let h = &self.histogram;
        let mut out = String::from("iterations,count,density,capped_accuracy\n");
        for i in 0..=h.k {
            out.push_str(&format!("{i},{},{},{}\n", h.counts[i], h.densities[i], h.capped_accuracy[i]));
        }
        out
    }
}

/// Everything one evaluation run produces.
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: RunReport,
    pub ledger: LedgerSnapshot,
    pub tree: TemplateTree,
    /// Calls of every item, items in id order.
    pub transcript: Transcript,
}

impl EvalRun {
    /// Writes `report.json`, `items.csv`, `histogram.csv`, `ledger.json`,
    /// `tree.json` and `transcript.jsonl` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.report.to_json())?;
        std::fs::write(dir.join("items.csv"), self.report.items_csv())?;
        std::fs::write(dir.join("histogram.csv"), self.report.histogram_csv())?;
        let mut ledger = serde_json::to_string_pretty(&self.ledger).expect("ledger serializes");
        ledger.push('\n');
        std::fs::write(dir.join("ledger.json"), ledger)?;
        std::fs::write(dir.join("tree.json"), self.tree.to_json())?;
        let mut buf = Vec::new();
        self.transcript.write_jsonl(&mut buf)?;
        std::fs::write(dir.join("transcript.jsonl"), buf)
    }
}

fn outcome_name(o: &Outcome) -> (&'static str, Option<String>) {
    match o {
        Outcome::ConvergedCorrect => ("converged_correct", None),
        Outcome::MaxIterationsReached => ("max_iterations_reached", None),
        Outcome::Aborted(r) => ("aborted", Some(r.clone())),
    }
}

fn curation_name(curation: &Curation, applied: Option<&Result<TreeChange, crate::tree::TreeError>>) -> String {
    match (curation, applied) {
        (Curation::NotInvoked, _) => "none".into(),
        (Curation::Skipped { .. }, _) => "skipped".into(),
        (Curation::Planned { .. }, Some(Ok(TreeChange::Added { .. }))) => "added".into(),
        (Curation::Planned { .. }, Some(Ok(TreeChange::Split { .. }))) => "split".into(),
        (Curation::Planned { .. }, Some(Ok(TreeChange::Branched { .. }))) => "branched".into(),
        (Curation::Planned { .. }, _) => "failed".into(),
    }
}

struct Context<'a> {
    client: &'a LlmClient,
    prompts: &'a PromptSet,
    chains: Option<&'a BTreeMap<String, ChainRecord>>,
    tree: &'a SharedTree,
    config: EvalConfig,
}

fn unanswered(item: &BenchmarkItem, reason: String) -> ItemOutcome {
    ItemOutcome {
        id: item.id.clone(),
        task: item.task,
        answer: None,
        correct: false,
        initial_answer: None,
        initial_correct: false,
        iterations: 0,
        outcome: "unanswered".into(),
        reason: Some(reason),
        curation: "none".into(),
        trace: vec![false],
    }
}

fn process(ctx: &Context<'_>, item: &BenchmarkItem) -> (ItemOutcome, Transcript) {
    let mut agents = Agents::new(ctx.client, ctx.prompts, item.id.clone());
    let initial: Result<ReasoningChain, String> = match ctx.chains {
        Some(map) => match map.get(&item.id) {
            Some(rec) => rec.to_chain(&item.table).map_err(|e| e.to_string()),
            None => Err("no precomputed chain for this item".into()),
        },
        None => agents.initial_chain(&item.table, &item.question).map_err(|e| e.to_string()),
    };
    let initial = match initial {
        Ok(c) if c.is_complete() => c,
        Ok(_) => return (unanswered(item, "initial chain has no answer".into()), agents.into_transcript()),
        Err(e) => return (unanswered(item, e), agents.into_transcript()),
    };
    let snapshot = ctx.tree.snapshot();
    let engine = EngineConfig {
        k: ctx.config.k,
        seed: item_seed(ctx.config.seed, &item.id),
    };
    let session = run_session(&mut agents, &item.table, &item.question, &initial, &snapshot, engine);
    let applied = ctx.tree.apply(&session);
    let score = |a: &Option<String>| a.as_deref().is_some_and(|a| score_answer(a, item));
    let (outcome, reason) = outcome_name(&session.outcome);
    let reason = reason.or_else(|| match (&session.curation, &applied) {
        (Curation::Skipped { reason }, _) => Some(format!("curation skipped: {reason}")),
        (_, Some(Err(e))) => Some(format!("curation failed: {e}")),
        _ => None,
    });
    let answer = session.current_chain.final_answer.clone();
    let result = ItemOutcome {
        id: item.id.clone(),
        task: item.task,
        correct: score(&answer),
        answer,
        initial_correct: score(&initial.final_answer),
        initial_answer: initial.final_answer.clone(),
        iterations: session.iteration_count,
        outcome: outcome.into(),
        reason,
        curation: curation_name(&session.curation, applied.as_ref()),
        trace: session.answer_trace.iter().map(score).collect(),
    };
    (result, agents.into_transcript())
}

/// Evaluates `items`. Initial chains come from `chains` when given (keyed
/// by item id), otherwise from the single-prompt planner. Curation updates
/// `tree` as sessions finish.
pub fn run_eval(
    client: &LlmClient,
    prompts: &PromptSet,
    items: &[BenchmarkItem],
    chains: Option<&BTreeMap<String, ChainRecord>>,
    tree: TemplateTree,
    config: EvalConfig,
    baseline: Option<&RunReport>,
) -> Result<EvalRun, MetricsError> {
    let shared = SharedTree::new(tree);
    let ctx = Context {
        client,
        prompts,
        chains,
        tree: &shared,
        config,
    };
    let results: Vec<(ItemOutcome, Transcript)> = if config.workers <= 1 {
        items.iter().map(|it| process(&ctx, it)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<(ItemOutcome, Transcript)>>> = Mutex::new(vec![None; items.len()]);
        std::thread::scope(|s| {
            for _ in 0..config.workers.min(items.len().max(1)) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(item) = items.get(i) else { break };
                    let r = process(&ctx, item);
                    slots.lock().unwrap_or_else(PoisonError::into_inner)[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .unwrap_or_else(PoisonError::into_inner)
            .into_iter()
            .map(|r| r.expect("every item processed"))
            .collect()
    };

    let mut results = results;
    results.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let mut transcript = Transcript::default();
    for (_, t) in &results {
        for r in &t.records {
            transcript.push(r.clone());
        }
    }
    let outcomes: Vec<ItemOutcome> = results.into_iter().map(|(o, _)| o).collect();
    let tree = shared.into_inner();
    let ledger = client.ledger().snapshot();
    let report = aggregate(client.backend_id(), &outcomes, &tree, &ledger, config, baseline)?;
    Ok(EvalRun {
        report,
        ledger,
        tree,
        transcript,
    })
}

fn aggregate(
    backend: String,
    items: &[ItemOutcome],
    tree: &TemplateTree,
    ledger: &LedgerSnapshot,
    config: EvalConfig,
    baseline: Option<&RunReport>,
) -> Result<RunReport, MetricsError> {
    let treated: Vec<(String, bool)> = items.iter().map(|i| (i.id.clone(), i.correct)).collect();
    let initial: Vec<(String, bool)> = items.iter().map(|i| (i.id.clone(), i.initial_correct)).collect();
    let mut counts = OutcomeCounts::default();
    for i in items {
        match i.outcome.as_str() {
            "converged_correct" => counts.converged_correct += 1,
            "max_iterations_reached" => counts.max_iterations_reached += 1,
            "aborted" => counts.aborted += 1,
            _ => counts.unanswered += 1,
        }
    }
    let traces: Vec<Vec<bool>> = items.iter().map(|i| i.trace.clone()).collect();
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        backend,
        prompt_version: PROMPT_VERSION,
        k: config.k,
        seed: config.seed,
        item_count: items.len(),
        accuracy_pct: accuracy_pct(&treated),
        initial_accuracy_pct: accuracy_pct(&initial),
        deltas_vs_initial: compute_deltas(&initial, &treated)?,
        deltas_vs_baseline: baseline.map(|b| compute_deltas(&b.outcome_pairs(), &treated)).transpose()?,
        outcomes: counts,
        cost: cost_report(ledger, items.len(), baseline.map(|b| b.cost.weighted_total)),
        histogram: iteration_histogram(&traces, config.k),
        tree: TreeSummary::of(tree),
        items: items.to_vec(),
    })
}
