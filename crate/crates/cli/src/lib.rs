//! Library surface of the scenario runner, shared by the binary and the
//! integration tests.

pub mod commands;
pub mod config;
pub mod emit;
pub mod scenario;
