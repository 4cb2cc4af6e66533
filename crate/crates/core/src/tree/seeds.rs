//! Built-in seed templates, one per initial category.

use super::{CritiqueTemplate, TemplateSource};
use crate::chain::{render_steps, ChainBuilder};
use crate::table::{render_prompt_table, Table, TableOperation};

fn table(columns: &[&str], rows: &[&[&str]]) -> Table {
    Table::new(
        columns.iter().map(|c| c.to_string()).collect(),
        rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect(),
    )
    .expect("seed table is well formed")
}

fn seed(table: &Table, question: &str, chain_text: String, critique: &str) -> CritiqueTemplate {
    CritiqueTemplate {
        table_text: render_prompt_table(table),
        question: question.to_string(),
        chain_text,
        critique_text: critique.to_string(),
        source: TemplateSource::Seed,
        created_at: 0,
    }
}

fn sub_table_seed() -> CritiqueTemplate {
    let t = table(
        &["rank", "athlete", "nation", "gold"],
        &[
            &["1", "amos koech", "kenya", "3"],
            &["2", "lena ortiz", "spain", "2"],
            &["3", "ruth wanjiru", "kenya", "1"],
            &["4", "piet de vries", "netherlands", "0"],
        ],
    );
    let question = "how many athletes from kenya won at least one gold medal?";
    let mut b = ChainBuilder::new(&t);
    b.push(
        "The question is about athletes and gold medals.",
        TableOperation::SelectColumn {
            columns: vec!["athlete".into(), "gold".into()],
        },
    )
    .expect("valid seed op");
    let chain = b.finish("Three athletes have a gold count above zero.", "3");
    seed(
        &t,
        question,
        render_steps(&chain, &t),
        "Step 1 keeps only the athlete and gold columns. The question restricts the count to athletes from kenya, \
so the nation column is required; without it the later steps cannot tell which rows qualify, and lena ortiz \
from spain is wrongly counted.\nConclusion: [Incorrect] Step 1",
    )
}

fn final_query_seed() -> CritiqueTemplate {
    let t = table(
        &["river", "country", "length km"],
        &[
            &["vardar", "north macedonia", "388"],
            &["drina", "bosnia", "346"],
            &["morava", "serbia", "185"],
        ],
    );
    let question = "what is the combined length of the rivers longer than 300 km?";
    let mut b = ChainBuilder::new(&t);
    b.push(
        "Only the vardar and the drina are longer than 300 km.",
        TableOperation::SelectRow { rows: vec![1, 2] },
    )
    .expect("valid seed op");
    let chain = b.finish("Adding 388 and 346 gives 634.", "634");
    seed(
        &t,
        question,
        render_steps(&chain, &t),
        "Step 1 selects exactly the two rivers above 300 km, so the sub table is correct. Step 2 adds their \
lengths: 388 + 346 is 734, not 634, so the arithmetic in the final step is wrong.\nConclusion: [Incorrect] Step 2",
    )
}

/// `(category name, template)` pairs in tree order.
pub(super) fn seed_templates() -> Vec<(&'static str, CritiqueTemplate)> {
    vec![
        ("sub-table error", sub_table_seed()),
        ("final query error", final_query_seed()),
    ]
}
