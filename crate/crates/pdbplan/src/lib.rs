//! A cost-optimal classical planner for SAS+ tasks.
//!
//! The planner builds collections of explicit pattern databases (PDBs) with a
//! mix of construction algorithms — seeded next-fit bin-packing, causal
//! dependency bin-packing and goal-growing hill climbing — alternated by a
//! UCB1 bandit. Candidate collections are screened by a random-walk sampling
//! evaluator, combined under zero-one cost partitioning, and the surviving
//! set feeds an explicit A* search.

pub mod bandit;
pub mod clock;
pub mod evaluator;
pub mod generators;
pub mod orchestrator;
pub mod pdb;
pub mod report;
pub mod sas;
pub mod search;

#[cfg(test)]
pub(crate) mod testutil;
