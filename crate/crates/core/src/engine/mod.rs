//! Program interpreter, traces and verdict aggregation.

mod env;
mod exec;
mod logic;
mod vote;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use env::{Binding, EnvError, Environment, Value};
pub use exec::{execute, EvidenceMode, ExecSettings, ExecutionTrace, StepRecord};
pub use logic::{eval_logic, substitute};
pub use vote::{aggregate, majority_vote, Aggregate, DecidedBy, FallbackPolicy, Vote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VeracityLabel {
    Supported,
    Refuted,
}

impl VeracityLabel {
    pub const ALL: [VeracityLabel; 2] = [VeracityLabel::Supported, VeracityLabel::Refuted];

    pub fn as_bool(self) -> bool {
        self == VeracityLabel::Supported
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VeracityLabel::Supported => "Supported",
            VeracityLabel::Refuted => "Refuted",
        }
    }
}

impl From<bool> for VeracityLabel {
    fn from(value: bool) -> Self {
        if value {
            VeracityLabel::Supported
        } else {
            VeracityLabel::Refuted
        }
    }
}

impl fmt::Display for VeracityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecErrorKind {
    UnboundVariable,
    AmbiguousCaseMatch,
    TypeMismatch,
    HandlerFailure,
}

/// Why a program stopped before producing a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("step {step_index}: {detail}")]
pub struct ExecError {
    pub kind: ExecErrorKind,
    pub step_index: usize,
    pub detail: String,
}

impl ExecError {
    pub(crate) fn from_env(err: EnvError, step_index: usize) -> Self {
        let kind = match err {
            EnvError::Unbound(_) => ExecErrorKind::UnboundVariable,
            EnvError::Ambiguous { .. } => ExecErrorKind::AmbiguousCaseMatch,
            EnvError::TypeMismatch { .. } => ExecErrorKind::TypeMismatch,
        };
        Self {
            kind,
            step_index,
            detail: err.to_string(),
        }
    }
}
