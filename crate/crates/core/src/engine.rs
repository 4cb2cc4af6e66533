//! The multi-turn judge, critique and refine loop.

use std::sync::{PoisonError, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{apply_plan, AgentError, Agents, CurationPlan, Critique, TreeChange, Verdict};
use crate::chain::{prefix_before_error, ReasoningChain};
use crate::table::Table;
use crate::tree::{RoutePath, TemplateTree, Terminal, TreeError};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Maximum refinement iterations.
    pub k: usize,
    /// Seeds template sampling for the session.
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { k: DEFAULT_K, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum Outcome {
    ConvergedCorrect,
    MaxIterationsReached,
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reason", rename_all = "snake_case")]
pub enum IterationStatus {
    Refined,
    /// The critic's reply stayed unparseable; the chain is unchanged.
    CriticFailed(String),
    /// The refiner's reply was unparseable or named an operation that does
    /// not apply; the chain is unchanged.
    RefineFailed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    /// Route from the verdict that started this iteration.
    pub route: Option<RoutePath>,
    /// Route actually used for sampling (unresolvable routes become random).
    pub sampling_route: RoutePath,
    pub chain_before: ReasoningChain,
    pub chain_after: ReasoningChain,
    pub critique: Option<Critique>,
    pub status: IterationStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curation {
    NotInvoked,
    Skipped { reason: String },
    Planned { plan: CurationPlan },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementSession {
    pub question: String,
    pub table: Table,
    pub initial_chain: ReasoningChain,
    pub current_chain: ReasoningChain,
    pub iteration_count: usize,
    pub history: Vec<HistoryRecord>,
    pub verdicts: Vec<Verdict>,
    /// Final answer after 0, 1, ..., `iteration_count` iterations.
    pub answer_trace: Vec<Option<String>>,
    pub outcome: Outcome,
    pub curation: Curation,
}

impl RefinementSession {
    pub fn final_answer(&self) -> Option<&str> {
        self.current_chain.final_answer.as_deref()
    }
}

/// The route used for sampling: an END route only if it resolves to a leaf.
pub fn sampling_route(tree: &TemplateTree, route: Option<&RoutePath>) -> RoutePath {
    match route {
        Some(r) if r.terminal == Terminal::End && tree.resolve(r).is_ok() => r.clone(),
        _ => RoutePath::random(),
    }
}

/// Runs one refinement session against a fixed tree snapshot. Curation,
/// if any, is returned as a plan in [`RefinementSession::curation`]; the
/// caller applies it to the live tree.
pub fn run_session(
    agents: &mut Agents<'_>,
    table: &Table,
    question: &str,
    initial_chain: &ReasoningChain,
    tree: &TemplateTree,
    config: EngineConfig,
) -> RefinementSession {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut session = RefinementSession {
        question: question.to_string(),
        table: table.clone(),
        initial_chain: initial_chain.clone(),
        current_chain: initial_chain.clone(),
        iteration_count: 0,
        history: Vec::new(),
        verdicts: Vec::new(),
        answer_trace: vec![initial_chain.final_answer.clone()],
        outcome: Outcome::MaxIterationsReached,
        curation: Curation::NotInvoked,
    };
    let abort = |mut s: RefinementSession, why: String| {
        s.outcome = Outcome::Aborted(why);
        s
    };
    if config.k == 0 {
        return abort(session, "k must be at least 1".into());
    }

    let mut verdict = match agents.judge(table, question, &session.current_chain, tree) {
        Ok(v) => v,
        Err(e) => return abort(session, judge_failure(e)),
    };
    session.verdicts.push(verdict.clone());

    while !verdict.is_correct() && session.iteration_count < config.k {
        session.iteration_count += 1;
        let before = session.current_chain.clone();
        let route = sampling_route(tree, verdict.route.as_ref());
        let mut record = HistoryRecord {
            iteration: session.iteration_count,
            route: verdict.route.clone(),
            sampling_route: route.clone(),
            chain_before: before.clone(),
            chain_after: before.clone(),
            critique: None,
            status: IterationStatus::Refined,
        };
        let templates = match tree.sample_templates(&route, &mut rng) {
            Ok(t) => t,
            Err(e) => return abort(session, e.to_string()),
        };
        let critique = match agents.criticize(table, question, &before, &templates) {
            Ok(c) => c,
            Err(AgentError::Llm(e)) => return abort(session, e.to_string()),
            Err(e) => {
                record.status = IterationStatus::CriticFailed(e.to_string());
                session.history.push(record);
                session.answer_trace.push(before.final_answer.clone());
                continue;
            }
        };
        record.critique = Some(critique.clone());
        let partial = prefix_before_error(&before, critique.first_error_index)
            .expect("critic index was checked against the chain length");
        let refined = match agents.refine(table, question, &partial, &critique) {
            Ok(c) => c,
            Err(AgentError::Llm(e)) => return abort(session, e.to_string()),
            Err(e) => {
                record.status = IterationStatus::RefineFailed(e.to_string());
                session.history.push(record);
                session.answer_trace.push(before.final_answer.clone());
                continue;
            }
        };
        record.chain_after = refined.clone();
        session.history.push(record);
        session.answer_trace.push(refined.final_answer.clone());
        session.current_chain = refined;

        verdict = match agents.judge(table, question, &session.current_chain, tree) {
            Ok(v) => v,
            Err(e) => return abort(session, judge_failure(e)),
        };
        session.verdicts.push(verdict.clone());
    }

    if !verdict.is_correct() {
        session.outcome = Outcome::MaxIterationsReached;
        return session;
    }
    session.outcome = Outcome::ConvergedCorrect;
    if let Some(last) = session.history.last() {
        let critique = last.critique.as_ref().expect("converged after a refinement");
        session.curation = match agents.curate(tree, table, question, &last.chain_before, critique) {
            Ok(Some(plan)) => Curation::Planned { plan },
            Ok(None) => Curation::Skipped {
                reason: "curator reply unparseable".into(),
            },
            Err(e) => Curation::Skipped { reason: e.to_string() },
        };
    }
    session
}

fn judge_failure(e: AgentError) -> String {
    match e {
        AgentError::Parse { source, .. } => format!("judge unparseable: {source}"),
        other => other.to_string(),
    }
}

/// Applies a session's curation plan, if any.
pub fn apply_curation(tree: &mut TemplateTree, session: &RefinementSession) -> Option<Result<TreeChange, TreeError>> {
    match &session.curation {
        Curation::Planned { plan } => Some(apply_plan(tree, plan)),
        _ => None,
    }
}

/// Live tree shared by concurrent sessions: snapshots for reading,
/// exclusive access for curation.
#[derive(Debug, Default)]
pub struct SharedTree {
    inner: RwLock<TemplateTree>,
}

impl SharedTree {
    pub fn new(tree: TemplateTree) -> Self {
        SharedTree { inner: RwLock::new(tree) }
    }

    pub fn snapshot(&self) -> TemplateTree {
        self.inner.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    pub fn apply(&self, session: &RefinementSession) -> Option<Result<TreeChange, TreeError>> {
        let mut tree = self.inner.write().unwrap_or_else(PoisonError::into_inner);
        apply_curation(&mut tree, session)
    }

    pub fn into_inner(self) -> TemplateTree {
        self.inner.into_inner().unwrap_or_else(PoisonError::into_inner)
    }
}

/// Runs a session on `tree`'s current state and applies any curation to
/// it.
pub fn run_and_curate(
    agents: &mut Agents<'_>,
    table: &Table,
    question: &str,
    initial_chain: &ReasoningChain,
    tree: &mut TemplateTree,
    config: EngineConfig,
) -> (RefinementSession, Option<Result<TreeChange, TreeError>>) {
    let session = run_session(agents, table, question, initial_chain, tree, config);
    let change = apply_curation(tree, &session);
    (session, change)
}
