//! Solving generalized Pillai equations
//! `(-1)^u r a^x + (-1)^v s b^y = c` with at least three solutions.

pub mod arith;
mod serde_big;
pub mod model;
pub mod families;
pub mod bounds;
pub mod eliminate;
pub mod search;
pub mod cli;
