use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Exit codes: 0 pass, 1 negative verdict, 2 usage or config, 3 runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Negative = 1,
    Config = 2,
    Runtime = 3,
}

impl Exit {
    pub fn verdict(ok: bool) -> Exit {
        if ok {
            Exit::Pass
        } else {
            Exit::Negative
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(e: impl fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn runtime(e: impl fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) => Exit::Config,
            CliError::Runtime(_) => Exit::Runtime,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        let kind = match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
        };
        serde_json::json!({ "error": Body { kind, message: self.to_string() } })
    }
}
