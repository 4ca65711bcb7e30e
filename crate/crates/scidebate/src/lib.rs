//! Profile-grounded multi-agent debate for molecular discovery.
//!
//! A campaign retrieves task-relevant literature from an offline corpus,
//! turns the first and last authors into scientist agents with expertise
//! profiles, then runs rounds of proposal, critique and voting through a
//! chat backend. Pure algorithms live in [`scidebate_core`]; this crate adds
//! IO, clients, orchestration and the `scidebate` binary.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod debate;
pub mod llm;
pub mod oracle;
pub mod parallel;
pub mod persistence;
pub mod profiles;
pub mod prompts;
pub mod report;
pub mod retry;
pub mod task;

pub use scidebate_core as core;
