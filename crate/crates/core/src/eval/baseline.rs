//! Closed-book prompting baselines that label a claim with a single
//! completion.

use serde::{Deserialize, Serialize};

use super::config::PromptStyle;
use crate::engine::VeracityLabel;
use crate::handlers::{fill_slots, CompletionClient, HandlerError, SamplingParams};

const DIRECT: &str = include_str!("../../assets/closed_book/direct.txt");
const COT: &str = include_str!("../../assets/closed_book/cot.txt");
const ZS_COT: &str = include_str!("../../assets/closed_book/zs_cot.txt");
const SELF_ASK: &str = include_str!("../../assets/closed_book/self_ask.txt");

/// Template text with a `{CLAIM}` slot; `None` for [`PromptStyle::Program`].
pub fn baseline_template(style: PromptStyle) -> Option<&'static str> {
    match style {
        PromptStyle::Program => None,
        PromptStyle::Direct => Some(DIRECT),
        PromptStyle::Cot => Some(COT),
        PromptStyle::ZsCot => Some(ZS_COT),
        PromptStyle::SelfAsk => Some(SELF_ASK),
    }
}

pub fn build_baseline_prompt(style: PromptStyle, claim: &str) -> Option<String> {
    let claim = claim.trim();
    let claim = claim.strip_suffix(['.', '?']).unwrap_or(claim);
    baseline_template(style).map(|t| fill_slots(t, &[("CLAIM", claim)]))
}

/// Label from the last standalone `true`/`false` in the output.
pub fn extract_final_answer(output: &str) -> Option<VeracityLabel> {
    output
        .split(|c: char| !c.is_ascii_alphabetic())
        .rev()
        .find_map(|w| match w.to_ascii_lowercase().as_str() {
            "true" => Some(VeracityLabel::Supported),
            "false" => Some(VeracityLabel::Refuted),
            _ => None,
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAnswer {
    pub label: VeracityLabel,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<String>,
}

pub fn baseline_sampling() -> SamplingParams {
    SamplingParams {
        temperature: 0.0,
        max_tokens: 256,
        stop: vec!["\n\n".to_string()],
        n: 1,
    }
}

/// Runs one baseline prompt. An answer without `true`/`false` counts as
/// Refuted with an anomaly.
pub fn run_baseline(
    style: PromptStyle,
    client: &dyn CompletionClient,
    claim: &str,
) -> Result<BaselineAnswer, HandlerError> {
    let prompt = build_baseline_prompt(style, claim)
        .ok_or_else(|| HandlerError::Config("program style is not a prompt baseline".into()))?;
    let output = client
        .complete(&prompt, &baseline_sampling())?
        .into_iter()
        .next()
        .unwrap_or_default();
    Ok(match extract_final_answer(&output) {
        Some(label) => BaselineAnswer {
            label,
            output,
            anomaly: None,
        },
        None => BaselineAnswer {
            label: VeracityLabel::Refuted,
            output,
            anomaly: Some("no true/false answer in output".to_string()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handlers::CannedCompletionClient;

    #[test]
    fn final_answer_scan() {
        assert_eq!(extract_final_answer(" False"), Some(VeracityLabel::Refuted));
        assert_eq!(
            extract_final_answer("True that he was born there, so the answer is false."),
            Some(VeracityLabel::Refuted)
        );
        assert_eq!(
            extract_final_answer("So the final answer is: True."),
            Some(VeracityLabel::Supported)
        );
        assert_eq!(extract_final_answer("untrue"), None);
        assert_eq!(extract_final_answer(""), None);
    }

    #[test]
    fn prompts_fill_claim_once() {
        for style in [
            PromptStyle::Direct,
            PromptStyle::Cot,
            PromptStyle::ZsCot,
            PromptStyle::SelfAsk,
        ] {
            let p = build_baseline_prompt(style, "Paris is in France.").unwrap();
            assert!(p.contains("Is it true that Paris is in France?"), "{style}");
            assert!(!p.contains("{CLAIM}"));
        }
        assert!(build_baseline_prompt(PromptStyle::Program, "x").is_none());
    }

    #[test]
    fn unparseable_output_defaults_to_refuted() {
        let client = CannedCompletionClient::default().with_default("I am not sure.");
        let a = run_baseline(PromptStyle::Direct, &client, "x").unwrap();
        assert_eq!(a.label, VeracityLabel::Refuted);
        assert!(a.anomaly.is_some());
    }
}
