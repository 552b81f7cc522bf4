use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GenerationError;
use crate::dsl::{format_report, parse_program};

const HOVER: &str = include_str!("../../assets/exemplars/hover.txt");
const FEVEROUS: &str = include_str!("../../assets/exemplars/feverous.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExemplarSetName {
    Hover,
    Feverous,
}

impl ExemplarSetName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExemplarSetName::Hover => "hover",
            ExemplarSetName::Feverous => "feverous",
        }
    }
}

impl fmt::Display for ExemplarSetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExemplarSetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hover" => Ok(ExemplarSetName::Hover),
            "feverous" | "feverous_s" | "feverous-s" => Ok(ExemplarSetName::Feverous),
            other => Err(format!("unknown exemplar set `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub claim: String,
    /// Program lines without indentation or `def` header.
    pub program_text: String,
}

/// Instruction plus worked claim/program pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarSet {
    pub name: String,
    pub instruction: String,
    pub exemplars: Vec<Exemplar>,
}

impl ExemplarSet {
    pub fn bundled(name: ExemplarSetName) -> Self {
        let text = match name {
            ExemplarSetName::Hover => HOVER,
            ExemplarSetName::Feverous => FEVEROUS,
        };
        Self::parse(name.as_str(), text).expect("bundled exemplar assets are valid")
    }

    pub fn load(path: &Path) -> Result<Self, GenerationError> {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(&name, &text)
    }

    /// Parses the asset format:
    ///
    /// ```text
    /// INSTRUCTION: <one line>
    /// ---
    /// CLAIM: <claim>
    /// PROGRAM:
    ///     <indented program lines>
    /// ---
    /// ...
    /// ```
    ///
    /// Every program must parse cleanly.
    pub fn parse(name: &str, text: &str) -> Result<Self, GenerationError> {
        let err = |block: usize, msg: String| GenerationError::Exemplar {
            block,
            message: msg,
        };
        let mut blocks = split_blocks(text);
        let header = blocks.next().unwrap_or_default();
        let instruction = header
            .trim()
            .strip_prefix("INSTRUCTION:")
            .ok_or_else(|| err(0, "expected `INSTRUCTION:` first".into()))?
            .trim()
            .to_string();

        let mut exemplars = Vec::new();
        for (i, block) in blocks.enumerate() {
            let n = i + 1;
            if block.trim().is_empty() {
                continue;
            }
            let mut lines = block.lines().skip_while(|l| l.trim().is_empty());
            let claim = lines
                .next()
                .and_then(|l| l.strip_prefix("CLAIM:"))
                .ok_or_else(|| err(n, "expected `CLAIM:`".into()))?
                .trim()
                .to_string();
            if lines.next().map(str::trim) != Some("PROGRAM:") {
                return Err(err(n, "expected `PROGRAM:` after the claim".into()));
            }
            let program_text = lines
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join("\n");
            parse_program(&program_text).map_err(|d| err(n, format_report(&d)))?;
            exemplars.push(Exemplar {
                claim,
                program_text,
            });
        }
        Ok(Self {
            name: name.to_string(),
            instruction,
            exemplars,
        })
    }
}

fn split_blocks(text: &str) -> impl Iterator<Item = String> + '_ {
    let mut blocks = vec![String::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            blocks.push(String::new());
        } else {
            let cur = blocks.last_mut().expect("non-empty");
            cur.push_str(line);
            cur.push('\n');
        }
    }
    blocks.into_iter()
}
