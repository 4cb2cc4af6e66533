//! Scripted sessions and a synthetic dataset whose script follows the
//! engine's call order exactly.

use tabref_core::agents::{Agents, PromptSet};
use tabref_core::chain::{ChainBuilder, ReasoningChain};
use tabref_core::engine::{run_and_curate, EngineConfig, RefinementSession};
use tabref_core::eval::{BenchmarkItem, Task};
use tabref_core::llm::{LlmClient, RetryPolicy, ScriptEntry, ScriptedBackend};
use tabref_core::table::{Table, TableOperation};
use tabref_core::transcript::Transcript;
use tabref_core::tree::TemplateTree;

pub const K: usize = 5;

pub fn league() -> Table {
    Table::new(
        vec!["team".into(), "wins".into()],
        vec![
            vec!["ants".into(), "4".into()],
            vec!["bees".into(), "9".into()],
            vec!["cats".into(), "7".into()],
        ],
    )
    .unwrap()
}

pub const QUESTION: &str = "which team won the most games?";

/// Picks row 3 and answers "cats".
pub fn wrong_chain() -> ReasoningChain {
    let mut b = ChainBuilder::new(&league());
    b.push("the most wins should be in the last row", TableOperation::SelectRow { rows: vec![3] })
        .unwrap();
    b.finish("only cats remain", "cats")
}

pub struct Scenario {
    pub session: RefinementSession,
    pub tree: TemplateTree,
    pub transcript: Transcript,
    pub script_left: usize,
}

pub fn run_scenario(script: &[&str]) -> Scenario {
    let backend = ScriptedBackend::new(script.iter().map(|s| ScriptEntry::text(*s).with_usage(50, 5)));
    let client = LlmClient::with_options(backend, RetryPolicy::no_delay(), 1);
    let prompts = PromptSet::default();
    let mut agents = Agents::new(&client, &prompts, "scenario");
    let mut tree = TemplateTree::initial();
    let (session, _) = run_and_curate(&mut agents, &league(), QUESTION, &wrong_chain(), &mut tree, EngineConfig { k: K, seed: 11 });
    let served = agents.transcript().len();
    Scenario {
        session,
        tree,
        transcript: agents.into_transcript(),
        script_left: script.len() - served,
    }
}

/// (a) the judge accepts the chain at once.
pub const IMMEDIATE: &[&str] = &["The steps support the answer.\nConclusion: [Correct]"];

/// (b) one critique fixes the chain; curation adds a template.
pub const ONE_FIX: &[&str] = &[
    "Step 1 keeps the wrong row.\nConclusion: [Incorrect] (sub-table error -> <END>)",
    "Step 1 selects cats, who have fewer wins than bees. Step 1 is incorrect.\nConclusion: [Incorrect] Step 1",
    "Function Chain: f_select_row(row 2)",
    "Only bees remain.\nAnswer: bees",
    "Conclusion: [Correct]",
    "Conclusion: [Incorrect] (sub-table error -> <END>)",
    "Determination:\nList 1: <sub-table error>\nList 2: <sub-table error>",
];

/// (c) the judge never accepts.
pub fn never_correct() -> Vec<&'static str> {
    let mut s = vec!["Conclusion: [Incorrect] (final query error -> <END>)"];
    for _ in 0..K {
        s.extend([
            "Conclusion: [Incorrect] Step 1",
            "Function Chain: f_select_row(row 1)",
            "Answer: ants",
            "Conclusion: [Incorrect] (final query error -> <END>)",
        ]);
    }
    s
}

/// Deterministic 20-item dataset mixing five session shapes, with the
/// script that drives it when items run in order. Returns (items, script).
pub fn synthetic_eval() -> (Vec<BenchmarkItem>, Vec<ScriptEntry>) {
    let names = ["ants", "bees", "cats", "dogs", "eels", "foxes"];
    let mut items = Vec::new();
    let mut script: Vec<String> = Vec::new();
    let mut split_done = false;
    for i in 0..20usize {
        // three rows, winner rotates
        let rows: Vec<Vec<String>> = (0..3)
            .map(|r| {
                let team = names[(i + r) % names.len()];
                let wins = 3 + ((i * 7 + r * 5) % 11);
                vec![team.to_string(), wins.to_string()]
            })
            .collect();
        let best = (0..3).max_by_key(|&r| (rows[r][1].parse::<u32>().unwrap(), std::cmp::Reverse(r))).unwrap();
        let worst = if best == 0 { 1 } else { 0 };
        let gold = rows[best][0].clone();
        let wrong = rows[worst][0].clone();
        let table = Table::new(vec!["team".into(), "wins".into()], rows).unwrap();
        items.push(BenchmarkItem {
            id: format!("syn-{i:02}"),
            table,
            question: QUESTION.into(),
            gold_answers: vec![gold.clone()],
            task: Task::Qa,
        });
        let plan = |row: usize, answer: &str| {
            format!("Function Chain: f_select_row(row {}) -> <END>\nExplanation: that row has the most wins\nAnswer: {answer}", row + 1)
        };
        let fix = |script: &mut Vec<String>| {
            script.push("Conclusion: [Incorrect] Step 1".into());
            script.push(format!("Function Chain: f_select_row(row {})", best + 1));
            script.push(format!("Answer: {gold}"));
            script.push("Conclusion: [Correct]".into());
        };
        match i % 5 {
            0 => {
                script.push(plan(best, &gold));
                script.push("Conclusion: [Correct]".into());
            }
            1 => {
                script.push(plan(worst, &wrong));
                script.push("Conclusion: [Incorrect] (final query error -> <END>)".into());
                fix(&mut script);
                script.push("Conclusion: [Incorrect] (final query error -> <END>)".into());
                script.push("Determination:\nList 1: <final query error>\nList 2: <final query error>".into());
            }
            2 => {
                script.push(plan(worst, &wrong));
                script.push("Conclusion: [Incorrect] (random)".into());
                for _ in 0..K {
                    script.push("Conclusion: [Incorrect] Step 1".into());
                    script.push(format!("Function Chain: f_select_row(row {})", worst + 1));
                    script.push(format!("Answer: {wrong}"));
                    script.push("Conclusion: [Incorrect] (random)".into());
                }
            }
            3 => {
                script.push(plan(worst, &wrong));
                script.push("Conclusion: [Incorrect] (random)".into());
                fix(&mut script);
                script.push("Conclusion: [Incorrect] (random)".into());
                script.push(format!("Addition: (ranking error {i} -> <END>)"));
            }
            _ => {
                script.push(plan(worst, &wrong));
                let route = if split_done {
                    "(sub-table error -> row error -> <END>)"
                } else {
                    "(sub-table error -> <END>)"
                };
                script.push(format!("Conclusion: [Incorrect] {route}"));
                // critic fails twice (ask plus re-ask), costing one iteration
                script.push("I cannot tell.".into());
                script.push("Still unsure.".into());
                fix(&mut script);
                script.push(format!("Conclusion: [Incorrect] {route}"));
                if split_done {
                    script.push("Determination:\nList 1: <row error>\nList 2: <row error>".into());
                } else {
                    script.push("Determination:\nList 1: <row error>\nList 2: <column error>".into());
                    split_done = true;
                }
            }
        }
    }
    (items, script.into_iter().map(ScriptEntry::text).collect())
}
