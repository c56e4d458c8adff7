//! Test support shared by the workspace's integration and acceptance tests:
//! random dataset generators, a random well-typed expression generator, and
//! a reference expression interpreter that works straight from source text,
//! and brute-force oracles for plot ticks.

pub mod exprgen;
pub mod gen;
pub mod oracle;
pub mod reference;
