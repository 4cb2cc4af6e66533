//! Agent outputs and tables transcribed from the worked examples. Only the
//! structured lines are kept verbatim; free-form reasoning is elided.

use tabref_core::table::Table;

/// Judge analysis ending in a three-level route.
pub const JUDGE_ROUTE: &str = "**Explanation:**\n\
Step 1 ... Step 1 is correct.\n\
Step 2 ... Step 2 is incorrect.\n\
\n\
**Conclusion:** [Incorrect] (sub-table error -> column error -> <END>)";

pub const JUDGE_CORRECT: &str = "**Explanation:**\n...\n\n**Conclusion:** [Correct]";

pub const JUDGE_RANDOM: &str = "**Explanation:**\n...\n\n**Conclusion:** [Incorrect] (random)";

/// Critic output for a three-step chain, error at step 3.
pub const CRITIC_STEP3: &str = "**Critique:**\n\
Step 1 ... Step 1 is correct.\n\
Step 2 ... Step 2 is correct.\n\
Step 3 ... Step 3 is incorrect.\n\
\n\
**Conclusion:** [Incorrect] Step 3";

/// Refiner continuation after the critique.
pub const REFINER_CONTINUATION: &str = "**Function Chain:**\nf_select_row(row 3)";

/// Curator similarity reply that keeps one category.
pub const DETERMINATION_SAME: &str = "**Explanation:**\n...\n\n**Determination:**\nList 1: <row error>\nList 2: <row error>";

/// Curator similarity reply that splits the category.
pub const DETERMINATION_SPLIT: &str =
    "**Explanation:**\n...\n\n**Determination:**\nList 1: <row misidentification error>\nList 2: <row omission error>";

/// Curator expansion reply.
pub const ADDITION: &str = "**Addition: (final query error -> <END>)**";

/// Ten-column fight record table; rows without notes get an empty cell.
pub fn fight_record_table() -> Table {
    let columns = ["res.", "record", "opponent", "method", "event", "date", "round", "time", "location", "notes"];
    let rows: [[&str; 10]; 7] = [
        ["win", "12-3", "mike hayes", "ko (punch)", "ksw 25: khalidov vs. sakurai", "december 7, 2013", "1", "1:12", "wrocław, poland", ""],
        ["win", "11–3", "nick moghadden", "tko (punches)", "bellator 99", "september 13, 2013", "1", "3:22", "temecula, california, united states", "bellator debut"],
        ["loss", "10–3", "guto inocente", "decision (unanimous)", "strikeforce: barnett vs. cormier", "may 19, 2012", "3", "5:00", "san jose, california, united states", "light heavyweight debut"],
        ["win", "10–2", "brett albee", "tko (strikes)", "strikeforce: diaz vs. daley", "april 9, 2011", "1", "1:46", "san diego, california, united states", ""],
        ["loss", "9–2", "lavar johnson", "ko (punches)", "strikeforce challengers: bowling vs. voelker", "october 22, 2010", "1", "2:17", "fresno, california, united states", ""],
        ["win", "9–1", "eddie sapp", "submission (rear-naked choke)", "native fighting championship 6", "august 14, 2010", "1", "2:01", "campo, california, united states", ""],
        ["loss", "8–1", "cody goodale", "decision (unanimous)", "gladiator challenge: maximum force", "april 25, 2010", "3", "5:00", "san jacinto, california, united states", ""],
    ];
    Table::new(
        columns.iter().map(|s| s.to_string()).collect(),
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
    )
    .unwrap()
}

/// Eight-row fixture table with comma-grouped attendance figures.
pub fn attendance_table() -> Table {
    let columns = ["tie", "home team", "score", "away team", "attendance"];
    let rows: [[&str; 5]; 8] = [
        ["1", "aylesbury united", "2-2", "windsor & eton", "847"],
        ["2", "burscough", "5-0", "wakefield & emley", "437"],
        ["3", "dover athletic", "0-3", "forest green roves", "932"],
        ["4", "farnborough town", "2-0", "halifax town", "863"],
        ["5", "gloucester city", "1-1", "southport", "1,237"],
        ["6", "havant & waterlooville", "3-0", "hayes", "456"],
        ["7", "margate", "0-2", "tamworth", "971"],
        ["8", "yeovil town", "2-1", "northwich victoria", "4,469"],
    ];
    Table::new(
        columns.iter().map(|s| s.to_string()).collect(),
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
    )
    .unwrap()
}
