use serde::{Deserialize, Serialize};

use super::client::{CompletionClient, SamplingParams};
use super::prompts::{
    build_question_prompt, build_verify_prompt, parse_verify_output, VerifyOutcome,
};
use super::{HandlerError, SubTaskHandler};
use crate::retrieval::EvidenceDoc;
use crate::EvidenceSetting;

/// Decoding settings for sub-task calls. Greedy by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubtaskParams {
    pub temperature: f64,
    pub question_max_tokens: u32,
    pub verify_max_tokens: u32,
    pub stop: Vec<String>,
}

impl Default for SubtaskParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            question_max_tokens: 64,
            verify_max_tokens: 8,
            stop: vec!["\n".to_string()],
        }
    }
}

/// Question/Verify backed by a completion model.
pub struct LmHandler<C> {
    client: C,
    setting: EvidenceSetting,
    params: SubtaskParams,
}

impl<C: CompletionClient> LmHandler<C> {
    pub fn new(client: C, setting: EvidenceSetting) -> Self {
        Self::with_params(client, setting, SubtaskParams::default())
    }

    pub fn with_params(client: C, setting: EvidenceSetting, params: SubtaskParams) -> Self {
        Self {
            client,
            setting,
            params,
        }
    }

    pub fn setting(&self) -> EvidenceSetting {
        self.setting
    }

    fn call(&self, prompt: &str, max_tokens: u32) -> Result<String, HandlerError> {
        let params = SamplingParams {
            temperature: self.params.temperature,
            max_tokens,
            stop: self.params.stop.clone(),
            n: 1,
        };
        self.client
            .complete(prompt, &params)?
            .into_iter()
            .next()
            .ok_or(HandlerError::EmptyAnswer)
    }
}

impl<C: CompletionClient> SubTaskHandler for LmHandler<C> {
    fn question(&self, question: &str, evidence: &[EvidenceDoc]) -> Result<String, HandlerError> {
        let prompt = build_question_prompt(question, evidence, self.setting);
        let raw = self.call(&prompt, self.params.question_max_tokens)?;
        let answer = raw.trim().lines().next().unwrap_or("").trim();
        if answer.is_empty() {
            return Err(HandlerError::EmptyAnswer);
        }
        Ok(answer.to_string())
    }

    fn verify(&self, claim: &str, evidence: &[EvidenceDoc]) -> Result<VerifyOutcome, HandlerError> {
        let prompt = build_verify_prompt(claim, evidence, self.setting);
        let raw = self.call(&prompt, self.params.verify_max_tokens)?;
        Ok(parse_verify_output(&raw))
    }

    fn concurrent_safe(&self) -> bool {
        self.client.concurrent_safe()
    }
}
