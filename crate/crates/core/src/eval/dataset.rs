//! Claim datasets.
//!
//! Input is line-delimited JSON (a single JSON array is also accepted). Field
//! names follow the public releases, with a few aliases:
//!
//! | field            | accepted keys                                  |
//! |------------------|------------------------------------------------|
//! | id               | `claim_id`, `uid`, `id`                        |
//! | claim text       | `claim`, `text`                                |
//! | label            | `label`                                        |
//! | hop count        | `num_hops`, `hops` (required for HOVER)        |
//! | gold evidence    | `gold_evidence_ids`, HOVER `supporting_facts` titles, FEVEROUS `evidence[].content` page titles |
//! | inline evidence  | `evidence_docs: [{id, title, text}]`           |

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::engine::VeracityLabel;
use crate::retrieval::EvidenceDoc;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub text: String,
    pub gold_label: VeracityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<u32>,
    #[serde(default)]
    pub gold_evidence_ids: Vec<String>,
    /// Gold paragraphs shipped with the record itself.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence_docs: Vec<EvidenceDoc>,
}

impl ClaimRecord {
    pub fn new(
        claim_id: impl Into<String>,
        text: impl Into<String>,
        gold_label: VeracityLabel,
    ) -> Self {
        Self {
            claim_id: claim_id.into(),
            text: text.into(),
            gold_label,
            hops: None,
            gold_evidence_ids: Vec::new(),
            evidence_docs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Hover,
    FeverousS,
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::Hover => "hover",
            DatasetFormat::FeverousS => "feverous_s",
        })
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hover" => Ok(DatasetFormat::Hover),
            "feverous_s" | "feverous" => Ok(DatasetFormat::FeverousS),
            _ => Err(DatasetError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("unknown dataset format `{0}`")]
    UnknownFormat(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedDataset {
    pub records: Vec<ClaimRecord>,
    /// Records dropped because their label is not two-class, by label.
    pub skipped_labels: BTreeMap<String, usize>,
}

impl LoadedDataset {
    pub fn skipped(&self) -> usize {
        self.skipped_labels.values().sum()
    }

    /// Record counts per hop; records without a hop count are omitted.
    pub fn hop_counts(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            if let Some(h) = r.hops {
                *out.entry(h).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Maps a dataset label to the two-class scheme.
pub fn map_label(raw: &str) -> Option<VeracityLabel> {
    match raw
        .trim()
        .to_ascii_uppercase()
        .replace([' ', '-'], "_")
        .as_str()
    {
        "SUPPORTED" | "SUPPORTS" => Some(VeracityLabel::Supported),
        "NOT_SUPPORTED" | "REFUTES" | "REFUTED" => Some(VeracityLabel::Refuted),
        _ => None,
    }
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<LoadedDataset, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, format)
}

pub fn parse_dataset(text: &str, format: DatasetFormat) -> Result<LoadedDataset, DatasetError> {
    let rows: Vec<(usize, Json)> = if text.trim_start().starts_with('[') {
        let all: Vec<Json> = serde_json::from_str(text).map_err(|e| DatasetError::Malformed {
            line: e.line(),
            message: e.to_string(),
        })?;
        all.into_iter()
            .enumerate()
            .map(|(i, v)| (i + 1, v))
            .collect()
    } else {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v = serde_json::from_str(line).map_err(|e| DatasetError::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
            rows.push((i + 1, v));
        }
        rows
    };

    let mut out = LoadedDataset::default();
    for (line, row) in rows {
        let err = |message: String| DatasetError::Malformed { line, message };
        let label_raw = row
            .get("label")
            .and_then(Json::as_str)
            .ok_or_else(|| err("missing string field `label`".into()))?;
        let Some(gold_label) = map_label(label_raw) else {
            *out.skipped_labels.entry(label_raw.to_string()).or_insert(0) += 1;
            continue;
        };
        let claim_id = ["claim_id", "uid", "id"]
            .iter()
            .find_map(|k| row.get(*k))
            .and_then(|v| match v {
                Json::String(s) => Some(s.clone()),
                Json::Number(n) => Some(n.to_string()),
                _ => None,
            })
            .ok_or_else(|| err("missing claim id".into()))?;
        let text = ["claim", "text"]
            .iter()
            .find_map(|k| row.get(*k).and_then(Json::as_str))
            .ok_or_else(|| err("missing claim text".into()))?
            .to_string();
        let hops = ["num_hops", "hops"]
            .iter()
            .find_map(|k| row.get(*k).and_then(Json::as_u64))
            .map(|h| h as u32);
        let hops = match format {
            DatasetFormat::Hover => {
                Some(hops.ok_or_else(|| err("HOVER record without `num_hops`".into()))?)
            }
            DatasetFormat::FeverousS => None,
        };
        let evidence_docs: Vec<EvidenceDoc> = match row.get("evidence_docs") {
            Some(v) => {
                serde_json::from_value(v.clone()).map_err(|e| err(format!("evidence_docs: {e}")))?
            }
            None => Vec::new(),
        };
        let mut gold_evidence_ids = gold_ids(&row, format);
        if gold_evidence_ids.is_empty() {
            gold_evidence_ids = evidence_docs.iter().map(|d| d.doc_id.clone()).collect();
        }
        out.records.push(ClaimRecord {
            claim_id,
            text,
            gold_label,
            hops,
            gold_evidence_ids,
            evidence_docs,
        });
    }
    Ok(out)
}

fn push_unique(ids: &mut Vec<String>, id: &str) {
    if !id.is_empty() && !ids.iter().any(|x| x == id) {
        ids.push(id.to_string());
    }
}

fn gold_ids(row: &Json, format: DatasetFormat) -> Vec<String> {
    let mut ids = Vec::new();
    if let Some(list) = row.get("gold_evidence_ids").and_then(Json::as_array) {
        for id in list.iter().filter_map(Json::as_str) {
            push_unique(&mut ids, id);
        }
        return ids;
    }
    match format {
        // [[title, sentence_index], ...]
        DatasetFormat::Hover => {
            for fact in row
                .get("supporting_facts")
                .and_then(Json::as_array)
                .into_iter()
                .flatten()
            {
                if let Some(title) = fact.get(0).and_then(Json::as_str) {
                    push_unique(&mut ids, title);
                }
            }
        }
        // evidence: [{content: ["Page_sentence_3", ...]}, ...]
        DatasetFormat::FeverousS => {
            for set in row
                .get("evidence")
                .and_then(Json::as_array)
                .into_iter()
                .flatten()
            {
                for element in set
                    .get("content")
                    .and_then(Json::as_array)
                    .into_iter()
                    .flatten()
                {
                    if let Some(s) = element.as_str() {
                        let page = s.split_once("_sentence_").map_or(s, |(p, _)| p);
                        push_unique(&mut ids, page);
                    }
                }
            }
        }
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hover_row() {
        let text = r#"{"uid": "u1", "claim": "A claim.", "supporting_facts": [["Page A", 0], ["Page B", 2], ["Page A", 1]], "label": "NOT_SUPPORTED", "num_hops": 2}"#;
        let d = parse_dataset(text, DatasetFormat::Hover).unwrap();
        assert_eq!(d.records.len(), 1);
        let r = &d.records[0];
        assert_eq!(r.gold_label, VeracityLabel::Refuted);
        assert_eq!(r.hops, Some(2));
        assert_eq!(r.gold_evidence_ids, ["Page A", "Page B"]);
    }

    #[test]
    fn feverous_rows_and_skips() {
        let text = concat!(
            r#"{"id": 7, "claim": "x", "label": "SUPPORTS", "evidence": [{"content": ["Alfredo_sentence_0", "Alfredo_sentence_3", "Rome_sentence_1"]}]}"#,
            "\n\n",
            r#"{"id": 8, "claim": "y", "label": "NOT ENOUGH INFO"}"#,
            "\n",
            r#"{"id": 9, "claim": "z", "label": "REFUTES"}"#,
        );
        let d = parse_dataset(text, DatasetFormat::FeverousS).unwrap();
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.records[0].claim_id, "7");
        assert_eq!(d.records[0].gold_evidence_ids, ["Alfredo", "Rome"]);
        assert_eq!(d.records[0].hops, None);
        assert_eq!(d.skipped(), 1);
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "{\"id\": \"a\", \"claim\": \"x\", \"label\": \"SUPPORTS\"}\n{oops";
        match parse_dataset(text, DatasetFormat::FeverousS) {
            Err(DatasetError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hover_requires_hops_and_format_tags() {
        let text = r#"{"uid": "u1", "claim": "A.", "label": "SUPPORTED"}"#;
        assert!(parse_dataset(text, DatasetFormat::Hover).is_err());
        assert!("fever".parse::<DatasetFormat>().is_err());
        assert_eq!(
            "feverous-s".parse::<DatasetFormat>().unwrap(),
            DatasetFormat::FeverousS
        );
    }

    #[test]
    fn json_array_and_inline_evidence() {
        let text = r#"[{"claim_id": "c", "claim": "x", "label": "supported", "hops": 3, "evidence_docs": [{"id": "d1", "title": "T", "text": "body"}]}]"#;
        let d = parse_dataset(text, DatasetFormat::Hover).unwrap();
        assert_eq!(d.records[0].gold_evidence_ids, ["d1"]);
        assert_eq!(d.hop_counts()[&3], 1);
    }
}
