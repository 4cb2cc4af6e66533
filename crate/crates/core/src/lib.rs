//! Multi-agent critique-and-refine loop for step-wise table reasoning.
//!
//! A judge checks a reasoning chain and routes any error into a tree of
//! error categories, a critic pinpoints the first wrong step using worked
//! templates from that tree, a refiner rewrites the chain from there, and a
//! curator grows the tree from successful corrections.

pub mod agents;
pub mod chain;
pub mod engine;
pub mod eval;
pub mod llm;
pub mod table;
pub mod transcript;
pub mod tree;
