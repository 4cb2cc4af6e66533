//! Datasets, answer scoring, metrics and the batch evaluation harness.

pub mod dataset;
pub mod harness;
pub mod metrics;
pub mod score;

pub use dataset::{load_items, read_items, write_items, BenchmarkItem, DatasetError, Task};
pub use harness::{item_seed, run_eval, EvalConfig, EvalRun, ItemOutcome, RunReport};
pub use metrics::{accuracy_pct, compute_deltas, cost_ratio, iteration_histogram, Deltas, IterationHistogram, MetricsError};
pub use score::{answers_match, normalize_answer, score_answer};
