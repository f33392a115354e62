//! Configuration-driven experiment runner for the planar Gibbs segment
//! process toolkit: sampling, GNZ diagnostics, bound tables and the full
//! convergence experiment, with persisted tabular outputs.

pub mod commands;
pub mod config;
pub mod expr;
