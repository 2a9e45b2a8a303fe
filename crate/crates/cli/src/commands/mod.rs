mod geometry;
mod maps;
mod sim;

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Exit};

pub use geometry::{cmd_curvature, cmd_flatness, cmd_hill};
pub use maps::{build_map, cmd_map, cmd_map_verify};
pub use sim::{cmd_action, cmd_classical, cmd_quantum};

/// Rendered command output and its exit status.
pub struct Outcome {
    pub body: String,
    pub exit: Exit,
}

pub fn json_outcome<T: Serialize>(value: &T, exit: Exit) -> Result<Outcome, CliError> {
    let mut body = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
    body.push('\n');
    Ok(Outcome { body, exit })
}

pub fn json_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    match cfg.format(Format::Json) {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Config(format!("{command} only writes json"))),
    }
}
