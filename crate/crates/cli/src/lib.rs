//! Library side of the `pvstab` binary: scenario parsing and the
//! subcommand implementations, kept out of `main` so they can be tested.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{cmd_classify, cmd_modes, cmd_roots, cmd_sweep, cmd_validate, Outcome};
pub use error::CliError;
pub use scenario::{parse_scenario, parse_scenario_str, Scenario, ScenarioError};
