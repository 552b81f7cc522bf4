//! Prompt formats for the question-answering and verification sub-tasks.

use crate::retrieval::EvidenceDoc;
use crate::EvidenceSetting;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Question,
    Verify,
}

/// A prompt layout with `{EVIDENCE}`, `{QUESTION}` and `{CLAIM}` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub setting: EvidenceSetting,
    pub kind: PromptKind,
    pub template: &'static str,
}

const QUESTION_WITH_EVIDENCE: &str = "{EVIDENCE}\nQ: {QUESTION}? The answer is:";
const QUESTION_CLOSED: &str = "Q: {QUESTION}? The answer is:";
const VERIFY_WITH_EVIDENCE: &str =
    "{EVIDENCE}\nQ: Is it true that {CLAIM}? True or False? The answer is:";
const VERIFY_CLOSED: &str = "Q: Is it true that {CLAIM}? True or False? The answer is:";

impl PromptTemplate {
    pub fn for_setting(setting: EvidenceSetting, kind: PromptKind) -> Self {
        let template = match (setting, kind) {
            (EvidenceSetting::ClosedBook, PromptKind::Question) => QUESTION_CLOSED,
            (EvidenceSetting::ClosedBook, PromptKind::Verify) => VERIFY_CLOSED,
            (_, PromptKind::Question) => QUESTION_WITH_EVIDENCE,
            (_, PromptKind::Verify) => VERIFY_WITH_EVIDENCE,
        };
        Self {
            setting,
            kind,
            template,
        }
    }

    /// Fills slots in a single pass, so slot-like text inside values is never
    /// re-expanded. Unknown slots are left as-is.
    pub fn render(&self, slots: &[(&str, &str)]) -> String {
        fill_slots(self.template, slots)
    }
}

pub(crate) fn fill_slots(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match slots.iter().find(|(k, _)| *k == name) {
                    Some((_, value)) => out.push_str(value),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Doc texts in the given order separated by a blank line.
pub fn evidence_block(evidence: &[EvidenceDoc]) -> String {
    evidence
        .iter()
        .map(|d| d.text.trim())
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn effective_setting(setting: EvidenceSetting, evidence: &[EvidenceDoc]) -> EvidenceSetting {
    if evidence.is_empty() {
        EvidenceSetting::ClosedBook
    } else {
        setting
    }
}

/// Question text without a trailing `?`, so the template adds exactly one.
fn question_body(question: &str) -> &str {
    let q = question.trim();
    q.strip_suffix('?').unwrap_or(q).trim_end()
}

/// Claim text without one trailing `.` or `?`.
fn claim_body(claim: &str) -> &str {
    let c = claim.trim();
    c.strip_suffix('.')
        .or_else(|| c.strip_suffix('?'))
        .unwrap_or(c)
        .trim_end()
}

/// Closed-book, or an empty evidence list, omits the evidence block.
pub fn build_question_prompt(
    question: &str,
    evidence: &[EvidenceDoc],
    setting: EvidenceSetting,
) -> String {
    let setting = effective_setting(setting, evidence);
    let block = evidence_block(evidence);
    PromptTemplate::for_setting(setting, PromptKind::Question)
        .render(&[("EVIDENCE", &block), ("QUESTION", question_body(question))])
}

pub fn build_verify_prompt(
    claim: &str,
    evidence: &[EvidenceDoc],
    setting: EvidenceSetting,
) -> String {
    let setting = effective_setting(setting, evidence);
    let block = evidence_block(evidence);
    PromptTemplate::for_setting(setting, PromptKind::Verify)
        .render(&[("EVIDENCE", &block), ("CLAIM", claim_body(claim))])
}

/// Boolean reading of a Verify completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub value: bool,
    pub anomaly: Option<String>,
}

impl VerifyOutcome {
    pub fn clean(value: bool) -> Self {
        Self {
            value,
            anomaly: None,
        }
    }
}

pub const UNPARSEABLE_VERIFY: &str = "unparseable verify output";

/// Reads the first alphabetic word: true/yes/supported map to `true`,
/// false/no/refuted to `false`. Anything else is `false` with an anomaly.
pub fn parse_verify_output(text: &str) -> VerifyOutcome {
    let word: String = text
        .chars()
        .skip_while(|c| !c.is_alphabetic())
        .take_while(|c| c.is_alphabetic())
        .collect();
    match word.to_lowercase().as_str() {
        "true" | "yes" | "supported" => VerifyOutcome::clean(true),
        "false" | "no" | "refuted" => VerifyOutcome::clean(false),
        _ => VerifyOutcome {
            value: false,
            anomaly: Some(UNPARSEABLE_VERIFY.to_string()),
        },
    }
}
