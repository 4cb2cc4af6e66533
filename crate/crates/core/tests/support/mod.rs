//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod figures;
pub mod scenarios;
pub mod table_oracle;
pub mod tree_oracle;
