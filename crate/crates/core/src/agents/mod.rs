//! Judge, Critic, Refiner and Curator: prompt construction, LLM calls and
//! strict reply parsing.

mod parse;
mod prompts;

use thiserror::Error;

pub use parse::{
    parse_addition, parse_answer, parse_continuation, parse_critique, parse_determination, parse_planned_chain,
    parse_verdict, Critique, ParseError, PlannedChain, Verdict, VerdictStatus,
};
pub use prompts::{PromptError, PromptKind, PromptSet, PROMPT_VERSION};

use crate::chain::{render_chain, render_function_chain, render_steps, ChainBuilder, ChainError, ReasoningChain};
use crate::llm::{CompletionRequest, LlmClient, LlmError};
use crate::table::{render_prompt_table, Table};
use crate::transcript::{prompt_hash, CallRecord, Transcript};
use crate::tree::{CritiqueTemplate, RoutePath, TemplateTree, TreeError, SAMPLE_SIZE};

pub const JUDGE: &str = "judge";
pub const CRITIC: &str = "critic";
pub const REFINER: &str = "refiner";
pub const CURATOR: &str = "curator";
pub const PLANNER: &str = "planner";

const JUDGE_FORMAT: &str =
    "Conclusion: [Correct]  or  Conclusion: [Incorrect] (node -> node -> <END>)  or  Conclusion: [Incorrect] (random)";
const CRITIC_FORMAT: &str = "Conclusion: [Incorrect] Step <NUM>";
const DETERMINATION_FORMAT: &str = "Determination:\nList 1: <category name>\nList 2: <category name>";
const ADDITION_FORMAT: &str = "Addition: (node -> ... -> <END>)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("{agent} reply could not be parsed: {source}")]
    Parse {
        agent: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("refined operation does not apply: {0}")]
    Operation(#[source] ChainError),
    #[error("the critic needs at least one template")]
    NoTemplates,
    #[error("the judge needs a complete chain")]
    IncompleteChain,
}

/// How the curator wants the tree to change.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CuratorDecision {
    AddTemplate { route: RoutePath },
    VerticalSplit { route: RoutePath, list1: String, list2: String },
    HorizontalAdd { addition: RoutePath },
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CurationPlan {
    pub decision: CuratorDecision,
    pub template: CritiqueTemplate,
}

/// What applying a plan actually did to the tree.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeChange {
    Added { route: RoutePath },
    Split { route: RoutePath, list1: String, list2: String },
    Branched { route: RoutePath },
}

/// Applies a curator plan. A horizontal addition whose name already exists
/// as a leaf falls back to adding the template to that leaf.
pub fn apply_plan(tree: &mut TemplateTree, plan: &CurationPlan) -> Result<TreeChange, TreeError> {
    let template = plan.template.clone();
    match &plan.decision {
        CuratorDecision::AddTemplate { route } => {
            tree.add_template(route, template)?;
            Ok(TreeChange::Added { route: route.clone() })
        }
        CuratorDecision::VerticalSplit { route, list1, list2 } => {
            tree.vertical_expand(route, list1, list2, template)?;
            Ok(TreeChange::Split {
                route: route.clone(),
                list1: list1.clone(),
                list2: list2.clone(),
            })
        }
        CuratorDecision::HorizontalAdd { addition } => {
            let (name, parent) = addition.segments.split_last().expect("addition route is nonempty");
            match tree.horizontal_expand(parent, name, template.clone()) {
                Ok(()) => Ok(TreeChange::Branched { route: addition.clone() }),
                Err(TreeError::NameCollision(n)) => {
                    if tree.resolve(addition).is_ok() {
                        tree.add_template(addition, template)?;
                        Ok(TreeChange::Added { route: addition.clone() })
                    } else {
                        Err(TreeError::NameCollision(n))
                    }
                }
                Err(e) => Err(e),
            }
        }
    }
}

/// Builds the template the curator distills from a failed chain and the
/// critique that fixed it.
pub fn candidate_template(table: &Table, question: &str, failed_chain: &ReasoningChain, critique: &Critique) -> CritiqueTemplate {
    CritiqueTemplate::curated(
        render_prompt_table(table),
        question,
        render_steps(failed_chain, table),
        critique.text.clone(),
    )
}

fn render_examples(templates: &[CritiqueTemplate]) -> String {
    templates
        .iter()
        .enumerate()
        .map(|(i, t)| format!("Example {}:\n{}", i + 1, t.render()))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn render_list(templates: &[&CritiqueTemplate]) -> String {
    templates
        .iter()
        .map(|t| {
            t.render()
                .lines()
                .map(|l| if l.is_empty() { String::new() } else { format!("  {l}") })
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect::<Vec<_>>()
        .join(",\n")
}

/// Pure prompt builders. Each returns the user text; agents send no system
/// text.
impl PromptSet {
    pub fn judge_prompt(&self, table: &Table, question: &str, chain: &ReasoningChain, tree: &TemplateTree) -> String {
        self.render(
            PromptKind::Judge,
            &[
                ("error_tree", &tree.render_outline()),
                ("case", &render_chain(chain, table, question)),
            ],
        )
    }

    pub fn critic_prompt(&self, table: &Table, question: &str, chain: &ReasoningChain, templates: &[CritiqueTemplate]) -> String {
        self.render(
            PromptKind::Critic,
            &[
                ("examples", &render_examples(templates)),
                ("case", &render_chain(chain, table, question)),
            ],
        )
    }

    pub fn refiner_prompt(&self, table: &Table, question: &str, partial: &ReasoningChain, critique: &Critique) -> String {
        let ops: Vec<_> = partial.operations().cloned().collect();
        let (function_chain, progress) = if ops.is_empty() {
            (
                "(none)".to_string(),
                "No operation has been applied yet, so the sub-table is the original table.".to_string(),
            )
        } else {
            let calls = render_function_chain(&ops);
            let sub = partial
                .current_table(table)
                .map(|t| render_prompt_table(&t))
                .unwrap_or_default();
            (
                calls.clone(),
                format!("After step {} ({calls}), we obtain the sub-table:\n{sub}", ops.len()),
            )
        };
        self.render(
            PromptKind::Refiner,
            &[
                ("function_chain", &function_chain),
                ("progress", &progress),
                ("question", question),
                ("critique", &critique.text),
                ("table", &render_prompt_table(table)),
            ],
        )
    }

    pub fn final_query_prompt(&self, sub_table: &Table, question: &str) -> String {
        self.render(
            PromptKind::FinalQuery,
            &[("table", &render_prompt_table(sub_table)), ("question", question)],
        )
    }

    pub fn initial_chain_prompt(&self, table: &Table, question: &str) -> String {
        self.render(
            PromptKind::InitialChain,
            &[("table", &render_prompt_table(table)), ("question", question)],
        )
    }

    pub fn similarity_prompt(&self, parent_category: &str, existing: &[&CritiqueTemplate], candidate: &CritiqueTemplate) -> String {
        self.render(
            PromptKind::CuratorSimilarity,
            &[
                ("parent_category", parent_category),
                ("list1", &render_list(existing)),
                ("list2", &render_list(&[candidate])),
            ],
        )
    }

    pub fn expansion_prompt(&self, tree: &TemplateTree, candidate: &CritiqueTemplate) -> String {
        self.render(
            PromptKind::CuratorExpansion,
            &[("error_tree", &tree.to_route_dictionary()), ("template", &candidate.render())],
        )
    }

    /// The original prompt followed by the format reminder.
    pub fn with_reminder(&self, prompt: &str, format: &str) -> String {
        format!("{prompt}\n\n{}", self.render(PromptKind::FormatReminder, &[("format", format)]))
    }
}

/// One session's view of the agents: shared client and prompts, plus the
/// session's own call transcript.
pub struct Agents<'a> {
    client: &'a LlmClient,
    prompts: &'a PromptSet,
    item: String,
    transcript: Transcript,
}

impl<'a> Agents<'a> {
    pub fn new(client: &'a LlmClient, prompts: &'a PromptSet, item: impl Into<String>) -> Self {
        Agents {
            client,
            prompts,
            item: item.into(),
            transcript: Transcript::default(),
        }
    }

    pub fn prompts(&self) -> &PromptSet {
        self.prompts
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Sends `prompt` and parses the reply, re-asking once with a format
    /// reminder when `reminder` is given.
    fn ask<T>(
        &mut self,
        agent: &'static str,
        prompt: String,
        reminder: Option<&str>,
        parse: impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<T, AgentError> {
        let first = self.call_once(agent, 1, &prompt, &parse)?;
        match (first, reminder) {
            (Ok(v), _) => Ok(v),
            (Err(source), None) => Err(AgentError::Parse { agent, source }),
            (Err(_), Some(format)) => {
                let retry = self.prompts.with_reminder(&prompt, format);
                self.call_once(agent, 2, &retry, &parse)?
                    .map_err(|source| AgentError::Parse { agent, source })
            }
        }
    }

    fn call_once<T>(
        &mut self,
        agent: &'static str,
        attempt: u32,
        prompt: &str,
        parse: &impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<Result<T, ParseError>, AgentError> {
        let request = CompletionRequest::new("", prompt);
        let result = self.client.complete(agent, &request)?;
        let parsed = parse(&result.text);
        self.transcript.push(CallRecord {
            item: self.item.clone(),
            seq: 0,
            agent: agent.to_string(),
            attempt,
            prompt_sha256: prompt_hash(&request.system_text, &request.user_text),
            response: result.text,
            input_tokens: result.input_tokens,
            output_tokens: result.output_tokens,
            parse: match &parsed {
                Ok(_) => "ok".to_string(),
                Err(e) => format!("error: {e}"),
            },
        });
        Ok(parsed)
    }

    /// Judges a complete chain against the tree's error categories.
    pub fn judge(&mut self, table: &Table, question: &str, chain: &ReasoningChain, tree: &TemplateTree) -> Result<Verdict, AgentError> {
        if !chain.is_complete() {
            return Err(AgentError::IncompleteChain);
        }
        let prompt = self.prompts.judge_prompt(table, question, chain, tree);
        self.ask(JUDGE, prompt, Some(JUDGE_FORMAT), parse_verdict)
    }

    /// Locates the first erroneous step, guided by worked templates.
    pub fn criticize(
        &mut self,
        table: &Table,
        question: &str,
        chain: &ReasoningChain,
        templates: &[CritiqueTemplate],
    ) -> Result<Critique, AgentError> {
        if templates.is_empty() {
            return Err(AgentError::NoTemplates);
        }
        let prompt = self.prompts.critic_prompt(table, question, chain, templates);
        let len = chain.len();
        self.ask(CRITIC, prompt, Some(CRITIC_FORMAT), |t| parse_critique(t, len))
    }

    /// Continues `partial` per the critique, applying each new operation,
    /// then asks for the final answer over the resulting sub-table.
    pub fn refine(
        &mut self,
        table: &Table,
        question: &str,
        partial: &ReasoningChain,
        critique: &Critique,
    ) -> Result<ReasoningChain, AgentError> {
        let mut builder = ChainBuilder::resume(table, partial).map_err(AgentError::Operation)?;
        let prompt = self.prompts.refiner_prompt(table, question, partial, critique);
        let ops = self.ask(REFINER, prompt, None, parse_continuation)?;
        for op in ops {
            builder.push("", op).map_err(AgentError::Operation)?;
        }
        let prompt = self.prompts.final_query_prompt(builder.current_table(), question);
        let (rationale, answer) = self.ask(REFINER, prompt, None, parse_answer)?;
        Ok(builder.finish(rationale, answer))
    }

    /// Single-prompt initial chain: plan, apply, answer.
    pub fn initial_chain(&mut self, table: &Table, question: &str) -> Result<ReasoningChain, AgentError> {
        let prompt = self.prompts.initial_chain_prompt(table, question);
        let plan = self.ask(PLANNER, prompt, None, parse_planned_chain)?;
        let mut builder = ChainBuilder::new(table);
        for op in plan.operations {
            builder.push("", op).map_err(AgentError::Operation)?;
        }
        Ok(builder.finish(plan.explanation, plan.answer))
    }

    /// Decides how to fold a successful refinement into the tree. Re-judges
    /// the failed chain to get a route; a route that resolves to a leaf
    /// leads to the similarity check, anything else to horizontal expansion.
    /// `Ok(None)` means the curator's reply stayed unparseable and curation
    /// is skipped.
    pub fn curate(
        &mut self,
        tree: &TemplateTree,
        table: &Table,
        question: &str,
        failed_chain: &ReasoningChain,
        critique: &Critique,
    ) -> Result<Option<CurationPlan>, AgentError> {
        let template = candidate_template(table, question, failed_chain, critique);
        let verdict = match self.judge(table, question, failed_chain, tree) {
            Ok(v) => v,
            Err(AgentError::Parse { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let resolved = verdict
            .route
            .as_ref()
            .filter(|r| r.terminal == crate::tree::Terminal::End)
            .and_then(|r| tree.resolve(r).ok().map(|p| (r.clone(), p)));
        let decision = match resolved {
            Some((route, path)) => {
                let leaf = tree.node(&path).expect("resolved leaf");
                let existing: Vec<&CritiqueTemplate> = leaf.templates.iter().rev().take(SAMPLE_SIZE).collect();
                let prompt = self.prompts.similarity_prompt(&leaf.name, &existing, &template);
                match self.ask(CURATOR, prompt, Some(DETERMINATION_FORMAT), parse_determination) {
                    Ok((list1, list2)) if list1 == list2 => CuratorDecision::AddTemplate { route },
                    Ok((list1, list2)) => CuratorDecision::VerticalSplit { route, list1, list2 },
                    Err(AgentError::Parse { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            None => {
                let prompt = self.prompts.expansion_prompt(tree, &template);
                match self.ask(CURATOR, prompt, Some(ADDITION_FORMAT), parse_addition) {
                    Ok(addition) => CuratorDecision::HorizontalAdd { addition },
                    Err(AgentError::Parse { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(Some(CurationPlan { decision, template }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{RetryPolicy, ScriptedBackend};
    use crate::table::TableOperation;

    fn table() -> Table {
        Table::new(
            vec!["name".into(), "score".into()],
            vec![vec!["a".into(), "3".into()], vec!["b".into(), "5".into()]],
        )
        .unwrap()
    }

    fn chain() -> ReasoningChain {
        let mut b = ChainBuilder::new(&table());
        b.push("", TableOperation::SelectRow { rows: vec![1] }).unwrap();
        b.finish("", "3")
    }

    fn client(script: &[&str]) -> LlmClient {
        LlmClient::with_options(ScriptedBackend::new(script.iter().copied()), RetryPolicy::no_delay(), 1)
    }

    #[test]
    fn judge_reasks_once() {
        let c = client(&["I think it is fine.", "Conclusion: [Correct]"]);
        let p = PromptSet::default();
        let mut a = Agents::new(&c, &p, "q");
        let v = a.judge(&table(), "best?", &chain(), &TemplateTree::initial()).unwrap();
        assert!(v.is_correct());
        let t = a.transcript();
        assert_eq!(t.agents(), ["judge", "judge"]);
        assert_eq!(t.records[1].attempt, 2);
        assert!(t.records[0].parse.starts_with("error"));
    }

    #[test]
    fn judge_gives_up_after_reask() {
        let c = client(&["nope", "still nope"]);
        let p = PromptSet::default();
        let mut a = Agents::new(&c, &p, "q");
        assert!(matches!(
            a.judge(&table(), "best?", &chain(), &TemplateTree::initial()),
            Err(AgentError::Parse { agent: JUDGE, .. })
        ));
    }

    #[test]
    fn critic_step_out_of_range_is_a_parse_failure() {
        let c = client(&["Conclusion: [Incorrect] Step 7", "Conclusion: [Incorrect] Step 2"]);
        let p = PromptSet::default();
        let mut a = Agents::new(&c, &p, "q");
        let templates = TemplateTree::initial().all_templates().into_iter().cloned().collect::<Vec<_>>();
        let crit = a.criticize(&table(), "best?", &chain(), &templates).unwrap();
        assert_eq!(crit.first_error_index, 2);
        assert!(matches!(
            a.criticize(&table(), "best?", &chain(), &[]),
            Err(AgentError::NoTemplates)
        ));
    }

    #[test]
    fn refine_builds_a_complete_chain() {
        let c = client(&["Function Chain:\nf_select_row(row 2)", "5 is the score.\nAnswer: 5"]);
        let p = PromptSet::default();
        let mut a = Agents::new(&c, &p, "q");
        let crit = Critique {
            text: "Conclusion: [Incorrect] Step 1".into(),
            first_error_index: 1,
        };
        let out = a.refine(&table(), "best?", &ReasoningChain::empty(), &crit).unwrap();
        assert!(out.is_complete());
        assert_eq!(out.final_answer.as_deref(), Some("5"));
        assert!(out.replays_cleanly(&table()).unwrap());
    }

    #[test]
    fn refine_rejects_inapplicable_ops() {
        let c = client(&["f_select_row(row 9)"]);
        let p = PromptSet::default();
        let mut a = Agents::new(&c, &p, "q");
        let crit = Critique {
            text: "Conclusion: [Incorrect] Step 1".into(),
            first_error_index: 1,
        };
        assert!(matches!(
            a.refine(&table(), "best?", &ReasoningChain::empty(), &crit),
            Err(AgentError::Operation(_))
        ));
    }

    #[test]
    fn refiner_prompt_shows_prefix_progress() {
        let p = PromptSet::default();
        let crit = Critique {
            text: "Step 2 is incorrect.\nConclusion: [Incorrect] Step 2".into(),
            first_error_index: 2,
        };
        let partial = crate::chain::prefix_before_error(&chain(), 2).unwrap();
        let prompt = p.refiner_prompt(&table(), "best?", &partial, &crit);
        assert!(prompt.contains("Function Chain: f_select_row(row 1)\nAfter step 1 (f_select_row(row 1)), we obtain the sub-table:\n/*"));
        assert!(prompt.ends_with("f_sort_column().\n\nFunction Chain:"));
    }

    #[test]
    fn curate_paths() {
        let tree = TemplateTree::initial();
        let crit = Critique {
            text: "Step 1 is incorrect.\nConclusion: [Incorrect] Step 1".into(),
            first_error_index: 1,
        };
        let p = PromptSet::default();

        let c = client(&[
            "Conclusion: [Incorrect] (sub-table error -> <END>)",
            "Determination:\nList 1: <row error>\nList 2: <row error>",
        ]);
        let plan = Agents::new(&c, &p, "q").curate(&tree, &table(), "best?", &chain(), &crit).unwrap().unwrap();
        assert!(matches!(plan.decision, CuratorDecision::AddTemplate { .. }));

        let c = client(&[
            "Conclusion: [Incorrect] (sub-table error -> <END>)",
            "Determination:\nList 1: <row error>\nList 2: <column error>",
        ]);
        let plan = Agents::new(&c, &p, "q").curate(&tree, &table(), "best?", &chain(), &crit).unwrap().unwrap();
        let mut t2 = tree.clone();
        assert!(matches!(apply_plan(&mut t2, &plan).unwrap(), TreeChange::Split { .. }));
        t2.validate().unwrap();

        let c = client(&["Conclusion: [Incorrect] (random)", "Addition: (aggregation error -> <END>)"]);
        let plan = Agents::new(&c, &p, "q").curate(&tree, &table(), "best?", &chain(), &crit).unwrap().unwrap();
        let mut t3 = tree.clone();
        assert!(matches!(apply_plan(&mut t3, &plan).unwrap(), TreeChange::Branched { .. }));
        assert_eq!(t3.leaf_count(), 3);

        let c = client(&["Conclusion: [Correct]", "Addition: (final query error -> <END>)"]);
        let plan = Agents::new(&c, &p, "q").curate(&tree, &table(), "best?", &chain(), &crit).unwrap().unwrap();
        let mut t4 = tree.clone();
        assert!(matches!(apply_plan(&mut t4, &plan).unwrap(), TreeChange::Added { .. }));

        let c = client(&["Conclusion: [Correct]", "no idea", "still none"]);
        assert_eq!(Agents::new(&c, &p, "q").curate(&tree, &table(), "best?", &chain(), &crit).unwrap(), None);
    }
}
