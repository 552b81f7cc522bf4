//! Error analysis of wrong predictions.
//!
//! Parse failures are tagged automatically from the stored diagnostics of a
//! claim's first sampled program; whether a well-formed program was executed
//! incorrectly can only be told by a person, so those cases come from an
//! annotation file (one [`ErrorAnnotation`] per line). Annotations always
//! win over automatic tags.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::runner::{PredictionRecord, TraceLine};
use crate::dsl::{DiagnosticKind, SemanticKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Syntax,
    SemanticToken,
    SemanticStructure,
    SemanticSubtask,
    IncorrectExecution,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 5] = [
        ErrorCategory::Syntax,
        ErrorCategory::SemanticToken,
        ErrorCategory::SemanticStructure,
        ErrorCategory::SemanticSubtask,
        ErrorCategory::IncorrectExecution,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Syntax => "syntax",
            ErrorCategory::SemanticToken => "semantic_token",
            ErrorCategory::SemanticStructure => "semantic_structure",
            ErrorCategory::SemanticSubtask => "semantic_subtask",
            ErrorCategory::IncorrectExecution => "incorrect_execution",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnnotation {
    pub claim_id: String,
    pub category: ErrorCategory,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("annotation refers to unknown claim `{0}`")]
    UnknownClaim(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    /// Wrong predictions in this group.
    pub incorrect: usize,
    /// Wrong predictions still lacking a category.
    pub unannotated: usize,
    pub counts: BTreeMap<ErrorCategory, usize>,
    /// Share of categorized errors, in percent; sums to 100 when any exist.
    pub percentages: BTreeMap<ErrorCategory, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    /// Keyed by `"{n}-hop"`, `"unknown-hop"`, plus `"all"`.
    pub rows: BTreeMap<String, ErrorRow>,
    pub tags: BTreeMap<String, ErrorCategory>,
}

fn auto_category(trace: &TraceLine) -> Option<ErrorCategory> {
    let d = trace.diagnostics.first()?;
    if trace.diagnostics.iter().any(|d| d.is_syntax()) {
        return Some(ErrorCategory::Syntax);
    }
    Some(match d.kind {
        DiagnosticKind::Syntax => ErrorCategory::Syntax,
        DiagnosticKind::Semantic(SemanticKind::Token) => ErrorCategory::SemanticToken,
        DiagnosticKind::Semantic(SemanticKind::Structure) => ErrorCategory::SemanticStructure,
        DiagnosticKind::Semantic(SemanticKind::Subtask) => ErrorCategory::SemanticSubtask,
    })
}

pub fn classify_errors(
    predictions: &[PredictionRecord],
    traces: &[TraceLine],
    annotations: &[ErrorAnnotation],
) -> Result<ErrorTable, TaxonomyError> {
    let known: HashSet<&str> = predictions.iter().map(|p| p.claim_id.as_str()).collect();
    let mut manual: HashMap<&str, ErrorCategory> = HashMap::new();
    for a in annotations {
        if !known.contains(a.claim_id.as_str()) {
            return Err(TaxonomyError::UnknownClaim(a.claim_id.clone()));
        }
        manual.insert(&a.claim_id, a.category);
    }
    let mut first_sample: HashMap<&str, &TraceLine> = HashMap::new();
    for t in traces {
        let e = first_sample.entry(&t.trace.claim_id).or_insert(t);
        if t.sample_index < e.sample_index {
            *e = t;
        }
    }

    let mut table = ErrorTable::default();
    for p in predictions
        .iter()
        .filter(|p| p.predicted_label != p.gold_label)
    {
        let category = manual.get(p.claim_id.as_str()).copied().or_else(|| {
            first_sample
                .get(p.claim_id.as_str())
                .and_then(|t| auto_category(t))
        });
        let hop = p
            .hops
            .map_or_else(|| "unknown-hop".to_string(), |h| format!("{h}-hop"));
        for key in [hop, "all".to_string()] {
            let row = table.rows.entry(key).or_default();
            row.incorrect += 1;
            match category {
                Some(c) => *row.counts.entry(c).or_insert(0) += 1,
                None => row.unannotated += 1,
            }
        }
        if let Some(c) = category {
            table.tags.insert(p.claim_id.clone(), c);
        }
    }
    for row in table.rows.values_mut() {
        let tagged: usize = row.counts.values().sum();
        for c in ErrorCategory::ALL {
            let n = row.counts.get(&c).copied().unwrap_or(0);
            let pct = if tagged == 0 {
                0.0
            } else {
                100.0 * n as f64 / tagged as f64
            };
            row.percentages.insert(c, pct);
        }
    }
    Ok(table)
}

impl fmt::Display for ErrorTable {
    /// Plain-text table: one row per group, one column per category.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<12}{:>10}", "group", "incorrect")?;
        for c in ErrorCategory::ALL {
            write!(f, "{:>21}", c.as_str())?;
        }
        writeln!(f, "{:>13}", "unannotated")?;
        for (key, row) in &self.rows {
            write!(f, "{key:<12}{:>10}", row.incorrect)?;
            for c in ErrorCategory::ALL {
                write!(
                    f,
                    "{:>20.1}%",
                    row.percentages.get(&c).copied().unwrap_or(0.0)
                )?;
            }
            writeln!(f, "{:>13}", row.unannotated)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::engine::{ExecutionTrace, VeracityLabel};

    fn pred(id: &str, wrong: bool, hops: u32) -> PredictionRecord {
        PredictionRecord {
            claim_id: id.into(),
            predicted_label: VeracityLabel::Supported,
            gold_label: if wrong {
                VeracityLabel::Refuted
            } else {
                VeracityLabel::Supported
            },
            hops: Some(hops),
            decided_by: "majority".into(),
            supported_votes: 1,
            refuted_votes: 0,
            failed_programs: 0,
            anomaly: None,
            error: None,
        }
    }

    fn trace(id: &str, source: &str) -> TraceLine {
        TraceLine {
            sample_index: 0,
            trace: ExecutionTrace {
                claim_id: id.into(),
                program_source: source.into(),
                steps: vec![],
                final_label: None,
                failure: None,
            },
            diagnostics: parse_program(source).err().unwrap_or_default(),
            generation_error: None,
        }
    }

    #[test]
    fn structure_diagnostic_is_auto_tagged() {
        let preds = [pred("a", true, 2)];
        let traces = [trace("a", "f = Verify(\"x\")")];
        let t = classify_errors(&preds, &traces, &[]).unwrap();
        assert_eq!(t.tags["a"], ErrorCategory::SemanticStructure);
        assert_eq!(
            t.rows["2-hop"].percentages[&ErrorCategory::SemanticStructure],
            100.0
        );
    }

    #[test]
    fn annotations_override_and_unknown_ids_fail() {
        let preds = [pred("a", true, 2), pred("b", true, 3), pred("c", false, 3)];
        let traces = [
            trace("a", "f = Verify(\"x\")\nl = Predict(f)"),
            trace("b", "l = Predict("),
        ];
        let t = classify_errors(&preds, &traces, &[]).unwrap();
        assert_eq!(t.rows["2-hop"].unannotated, 1);
        assert_eq!(t.tags["b"], ErrorCategory::Syntax);
        let ann = [ErrorAnnotation {
            claim_id: "a".into(),
            category: ErrorCategory::IncorrectExecution,
            note: String::new(),
        }];
        let t = classify_errors(&preds, &traces, &ann).unwrap();
        assert_eq!(
            t.rows["2-hop"].percentages[&ErrorCategory::IncorrectExecution],
            100.0
        );
        assert_eq!(t.rows["all"].incorrect, 2);
        let bad = [ErrorAnnotation {
            claim_id: "zzz".into(),
            category: ErrorCategory::Syntax,
            note: String::new(),
        }];
        assert_eq!(
            classify_errors(&preds, &traces, &bad),
            Err(TaxonomyError::UnknownClaim("zzz".into()))
        );
    }
}
