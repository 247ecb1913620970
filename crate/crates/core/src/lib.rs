//! Symbolic regression with Interaction-Transformation expressions.

pub mod cli;
pub mod data;
pub mod evolution;
pub mod explain;
pub mod expr;
pub mod fitting;
pub mod metrics;
pub mod symtree;
pub mod transforms;
