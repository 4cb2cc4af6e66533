//! Browser demo over `tabref-core`.
//!
//! Every operation is a plain Rust function returning JSON or text so it
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors into JS exceptions.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use tabref_core::agents::{apply_plan, CurationPlan, CuratorDecision};
use tabref_core::chain::{parse_function_chain, render_function_chain};
use tabref_core::eval::metrics::{compute_deltas, cost_ratio};
use tabref_core::llm::weighted_cost;
use tabref_core::table::{apply_operation, parse_prompt_table, render_prompt_table, Table};
use tabref_core::tree::{CritiqueTemplate, RoutePath, TemplateTree};

/// Reads either a `/* col : ... */` block or CSV with a header line.
pub fn parse_table_input(text: &str) -> Result<Table, String> {
    let trimmed = text.trim();
    if trimmed.starts_with("/*") {
        return parse_prompt_table(trimmed).map_err(|e| e.to_string());
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(trimmed.as_bytes());
    let columns: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let mut row: Vec<String> = rec.iter().map(str::to_string).collect();
        row.resize(columns.len(), String::new());
        rows.push(row);
    }
    Table::sanitized(&columns, &rows).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StepView {
    step: usize,
    call: String,
    table: String,
    rows: usize,
    columns: usize,
}

/// Replays a function chain over a table and returns every intermediate
/// sub-table as JSON: `{original, steps: [...], error}`. The first failing
/// operation stops the replay and is reported in `error`.
pub fn explore_chain(table_text: &str, chain_text: &str) -> Result<String, String> {
    let table = parse_table_input(table_text)?;
    let ops = parse_function_chain(chain_text).map_err(|e| e.to_string())?;
    let mut current = table.clone();
    let mut steps = Vec::new();
    let mut error = None;
    for (i, op) in ops.iter().enumerate() {
        match apply_operation(&current, op) {
            Ok(next) => {
                current = next;
                steps.push(StepView {
                    step: i + 1,
                    call: render_function_chain(std::iter::once(op)),
                    table: render_prompt_table(&current),
                    rows: current.row_count(),
                    columns: current.columns().len(),
                });
            }
            Err(e) => {
                error = Some(json!({ "step": i + 1, "message": e.to_string() }));
                break;
            }
        }
    }
    Ok(json!({
        "original": render_prompt_table(&table),
        "function_chain": render_function_chain(&ops),
        "steps": steps,
        "error": error,
    })
    .to_string())
}

/// Mutable template tree driven by hand-entered curator decisions.
pub struct TreeLab {
    tree: TemplateTree,
    made: usize,
}

impl Default for TreeLab {
    fn default() -> Self {
        TreeLab {
            tree: TemplateTree::initial(),
            made: 0,
        }
    }
}

impl TreeLab {
    pub fn from_json(text: &str) -> Result<Self, String> {
        Ok(TreeLab {
            tree: TemplateTree::from_json(text).map_err(|e| e.to_string())?,
            made: 0,
        })
    }

    fn template(&mut self, note: &str) -> CritiqueTemplate {
        self.made += 1;
        CritiqueTemplate::curated(
            "/*\ncol   : item | value\nrow 1 : a | 1\n*/",
            format!("demo question {}", self.made),
            "Step 1: f_select_row(row 1)",
            format!("{note}\nConclusion: [Incorrect] Step 1"),
        )
    }

    fn apply(&mut self, decision: CuratorDecision, note: &str) -> Result<String, String> {
        let plan = CurationPlan {
            template: self.template(note),
            decision,
        };
        let change = apply_plan(&mut self.tree, &plan).map_err(|e| e.to_string())?;
        Ok(serde_json::to_string(&change).expect("change serializes"))
    }

    /// Adds a template to the leaf at `route`, e.g. `(sub-table error -> <END>)`.
    pub fn add(&mut self, route: &str) -> Result<String, String> {
        let route = RoutePath::parse(route).map_err(|e| e.to_string())?;
        self.apply(CuratorDecision::AddTemplate { route }, "added by hand")
    }

    /// Turns the leaf at `route` into a parent of `existing` (old templates)
    /// and `new` (the fresh template).
    pub fn split(&mut self, route: &str, existing: &str, new: &str) -> Result<String, String> {
        let route = RoutePath::parse(route).map_err(|e| e.to_string())?;
        self.apply(
            CuratorDecision::VerticalSplit {
                route,
                list1: existing.to_string(),
                list2: new.to_string(),
            },
            "split by hand",
        )
    }

    /// Adds a new leaf; the last route segment is its name.
    pub fn branch(&mut self, addition: &str) -> Result<String, String> {
        let addition = RoutePath::parse(addition).map_err(|e| e.to_string())?;
        self.apply(CuratorDecision::HorizontalAdd { addition }, "branched by hand")
    }

    /// Templates the critic would see for `route` under `seed`, as JSON.
    pub fn sample(&self, route: &str, seed: u64) -> Result<String, String> {
        let route = RoutePath::parse(route).map_err(|e| e.to_string())?;
        let picked = self.tree.sample_templates_seeded(&route, seed).map_err(|e| e.to_string())?;
        let view: Vec<_> = picked
            .iter()
            .map(|t| json!({ "question": t.question, "critique": t.critique_text, "created_at": t.created_at }))
            .collect();
        Ok(serde_json::Value::Array(view).to_string())
    }

    pub fn inspect(&self) -> String {
        self.tree.inspect()
    }

    pub fn routes(&self) -> String {
        self.tree.to_route_dictionary()
    }

    pub fn to_json(&self) -> String {
        self.tree.to_json()
    }

    pub fn tree(&self) -> &TemplateTree {
        &self.tree
    }
}

fn outcome_bits(text: &str) -> Result<Vec<(String, bool)>, String> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .enumerate()
        .map(|(i, c)| match c {
            '1' => Ok((i.to_string(), true)),
            '0' => Ok((i.to_string(), false)),
            other => Err(format!("outcome strings use 0 and 1, found {other:?}")),
        })
        .collect()
}

/// Weighted cost of both runs, their ratio, and deltas between two
/// per-item outcome strings such as `"0110"` (item order must match).
pub fn cost_and_deltas(
    input: f64,
    output: f64,
    baseline_input: f64,
    baseline_output: f64,
    baseline_outcomes: &str,
    treated_outcomes: &str,
) -> Result<String, String> {
    let treated_cost = weighted_cost(input, output);
    let baseline_cost = weighted_cost(baseline_input, baseline_output);
    let b = outcome_bits(baseline_outcomes)?;
    let t = outcome_bits(treated_outcomes)?;
    if b.len() != t.len() {
        return Err(format!("outcome strings differ in length ({} vs {})", b.len(), t.len()));
    }
    let deltas = compute_deltas(&b, &t).map_err(|e| e.to_string())?;
    Ok(json!({
        "weighted": treated_cost,
        "baseline_weighted": baseline_cost,
        "ratio": cost_ratio(treated_cost, baseline_cost),
        "deltas": deltas,
    })
    .to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exploreChain)]
pub fn explore_chain_js(table_text: &str, chain_text: &str) -> Result<String, JsError> {
    js(explore_chain(table_text, chain_text))
}

#[wasm_bindgen(js_name = costAndDeltas)]
pub fn cost_and_deltas_js(
    input: f64,
    output: f64,
    baseline_input: f64,
    baseline_output: f64,
    baseline_outcomes: &str,
    treated_outcomes: &str,
) -> Result<String, JsError> {
    js(cost_and_deltas(input, output, baseline_input, baseline_output, baseline_outcomes, treated_outcomes))
}

#[wasm_bindgen]
pub struct TreePlayground(TreeLab);

#[wasm_bindgen]
impl TreePlayground {
    #[wasm_bindgen(constructor)]
    pub fn new() -> TreePlayground {
        TreePlayground(TreeLab::default())
    }

    #[wasm_bindgen(js_name = fromJson)]
    pub fn from_json(text: &str) -> Result<TreePlayground, JsError> {
        js(TreeLab::from_json(text)).map(TreePlayground)
    }

    pub fn add(&mut self, route: &str) -> Result<String, JsError> {
        js(self.0.add(route))
    }

    pub fn split(&mut self, route: &str, existing: &str, new: &str) -> Result<String, JsError> {
        js(self.0.split(route, existing, new))
    }

    pub fn branch(&mut self, addition: &str) -> Result<String, JsError> {
        js(self.0.branch(addition))
    }

    pub fn sample(&self, route: &str, seed: u64) -> Result<String, JsError> {
        js(self.0.sample(route, seed))
    }

    pub fn inspect(&self) -> String {
        self.0.inspect()
    }

    pub fn routes(&self) -> String {
        self.0.routes()
    }

    #[wasm_bindgen(js_name = toJson)]
    pub fn to_json(&self) -> String {
        self.0.to_json()
    }
}

impl Default for TreePlayground {
    fn default() -> Self {
        Self::new()
    }
}
