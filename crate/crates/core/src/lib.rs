//! Program-guided fact-checking.
//!
//! A claim is decomposed by a language model into a small reasoning program
//! ([`dsl`]), which is interpreted step by step ([`engine`]) against
//! question-answering and verification handlers ([`handlers`]) that see gold,
//! retrieved ([`retrieval`]) or no evidence. Several sampled programs
//! ([`generation`]) vote on the final label, and [`eval`] runs whole datasets
//! and scores them.

pub mod dsl;
pub mod engine;
pub mod eval;
pub mod generation;
pub mod handlers;
pub mod retrieval;

use std::fmt;

use serde::{Deserialize, Serialize};

/// What evidence the sub-task handlers get to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceSetting {
    Gold,
    OpenBook,
    ClosedBook,
}

impl EvidenceSetting {
    pub const ALL: [EvidenceSetting; 3] = [
        EvidenceSetting::Gold,
        EvidenceSetting::OpenBook,
        EvidenceSetting::ClosedBook,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceSetting::Gold => "gold",
            EvidenceSetting::OpenBook => "open_book",
            EvidenceSetting::ClosedBook => "closed_book",
        }
    }
}

impl fmt::Display for EvidenceSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EvidenceSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "gold" => Ok(EvidenceSetting::Gold),
            "open_book" | "open" => Ok(EvidenceSetting::OpenBook),
            "closed_book" | "closed" => Ok(EvidenceSetting::ClosedBook),
            other => Err(format!("unknown evidence setting `{other}`")),
        }
    }
}
