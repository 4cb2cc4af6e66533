use serde_json::Value;
use tabref_web::{cost_and_deltas, explore_chain, parse_table_input, TreeLab};

const CSV: &str = "team,wins,city\nants,4,oslo\nbees,9,rome\nwasps,7,oslo\n";

#[test]
fn csv_and_prompt_block_inputs_agree() {
    let a = parse_table_input(CSV).unwrap();
    let block = tabref_core::table::render_prompt_table(&a);
    assert_eq!(parse_table_input(&block).unwrap(), a);
}

#[test]
fn chain_explorer_shows_each_sub_table() {
    let out: Value = serde_json::from_str(&explore_chain(CSV, "f_select_row(row 1, row 3) -> f_select_column(team) -> <END>").unwrap()).unwrap();
    let steps = out["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[0]["rows"], 2);
    assert_eq!(steps[1]["table"], "/*\ncol   : team\nrow 1 : ants\nrow 2 : wasps\n*/");
    assert!(out["error"].is_null());
}

#[test]
fn chain_explorer_reports_the_failing_step() {
    let out: Value = serde_json::from_str(&explore_chain(CSV, "f_select_column(team) -> f_select_column(wins)").unwrap()).unwrap();
    assert_eq!(out["steps"].as_array().unwrap().len(), 1);
    assert_eq!(out["error"]["step"], 2);
    assert!(explore_chain(CSV, "f_fly(away)").is_err());
}

#[test]
fn tree_playground_evolves() {
    let mut lab = TreeLab::default();
    assert!(lab.add("(sub-table error -> <END>)").unwrap().contains("added"));
    lab.split("(sub-table error -> <END>)", "row error", "column error").unwrap();
    lab.branch("(final query error -> <END>)").unwrap(); // existing leaf: falls back to add
    lab.branch("(format error -> <END>)").unwrap();
    let tree = lab.tree();
    tree.validate().unwrap();
    assert_eq!(tree.leaf_count(), 4);
    assert_eq!(tree.template_count(), 2 + 4);
    assert!(lab.inspect().contains("row error [2 templates"));
    let picked: Value = serde_json::from_str(&lab.sample("(random)", 7).unwrap()).unwrap();
    assert_eq!(picked.as_array().unwrap().len(), 2);
    assert_eq!(lab.sample("(random)", 7).unwrap(), lab.sample("(random)", 7).unwrap());
    let again = TreeLab::from_json(&lab.to_json()).unwrap();
    assert_eq!(again.tree(), tree);
    assert!(lab.add("(nowhere -> <END>)").is_err());
}

#[test]
fn calculator() {
    let out: Value = serde_json::from_str(&cost_and_deltas(135.5, 3.8, 73.5, 1.6, "0011", "1010").unwrap()).unwrap();
    assert!((out["weighted"].as_f64().unwrap() - 36.725).abs() < 1e-9);
    assert!((out["ratio"].as_f64().unwrap() - 36.725 / 19.575).abs() < 1e-12);
    assert_eq!(out["deltas"]["correction_pct"], 25.0);
    assert_eq!(out["deltas"]["degradation_pct"], -25.0);
    assert_eq!(out["deltas"]["net_pct"], 0.0);
    assert!(cost_and_deltas(1.0, 1.0, 1.0, 1.0, "01", "0").is_err());
    assert!(cost_and_deltas(1.0, 1.0, 1.0, 1.0, "0x", "01").is_err());
}

#[test]
fn page_defaults_run_cleanly() {
    let html = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/www/index.html")).unwrap();
    let table = html.split("<textarea id=\"table\" rows=\"7\">").nth(1).unwrap().split("</textarea>").next().unwrap();
    let chain = html.split("id=\"chain\" size=\"80\" value=\"").nth(1).unwrap().split('"').next().unwrap();
    let chain = chain.replace("&lt;", "<").replace("&gt;", ">");
    let out: Value = serde_json::from_str(&explore_chain(table, &chain).unwrap()).unwrap();
    assert!(out["error"].is_null(), "{out}");
    assert_eq!(out["steps"][1]["table"], "/*\ncol   : round | new entries\nrow 1 : first | 96\nrow 2 : third | 16\n*/");
}
