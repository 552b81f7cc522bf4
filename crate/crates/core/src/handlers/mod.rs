//! Question and Verify sub-task handlers.

mod client;
mod lm;
mod mock;
mod prompts;

pub use client::{
    CompletionClient, HttpCompletionClient, LmEndpointConfig, SamplingParams, DEFAULT_API_KEY_ENV,
};
pub use lm::{LmHandler, SubtaskParams};
pub use mock::{
    mock_handler, normalize_key, CannedCompletionClient, MockFixture, MockHandler,
    ScriptedGenerator, CLAIM_MARKER,
};
pub(crate) use prompts::fill_slots;
pub use prompts::{
    build_question_prompt, build_verify_prompt, evidence_block, parse_verify_output, PromptKind,
    PromptTemplate, VerifyOutcome, UNPARSEABLE_VERIFY,
};

use crate::retrieval::EvidenceDoc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HandlerError {
    #[error("transport failed after {attempts} attempt(s): {detail}")]
    Transport {
        status: Option<u16>,
        attempts: u32,
        detail: String,
    },
    #[error("model returned an empty answer")]
    EmptyAnswer,
    #[error("no answer available for question `{0}`")]
    UnknownQuestion(String),
    #[error("handler configuration: {0}")]
    Config(String),
}

/// Executes `Question` and `Verify` steps for one evidence setting.
pub trait SubTaskHandler: Send + Sync {
    /// Answers a question. Never returns empty text.
    fn question(&self, question: &str, evidence: &[EvidenceDoc]) -> Result<String, HandlerError>;

    /// Verifies a simple claim. Unreadable model output maps to `false` with
    /// an anomaly rather than an error.
    fn verify(&self, claim: &str, evidence: &[EvidenceDoc]) -> Result<VerifyOutcome, HandlerError>;

    /// Whether the handler may be called from several threads at once.
    fn concurrent_safe(&self) -> bool {
        true
    }
}

impl<T: SubTaskHandler + ?Sized> SubTaskHandler for &T {
    fn question(&self, question: &str, evidence: &[EvidenceDoc]) -> Result<String, HandlerError> {
        (**self).question(question, evidence)
    }

    fn verify(&self, claim: &str, evidence: &[EvidenceDoc]) -> Result<VerifyOutcome, HandlerError> {
        (**self).verify(claim, evidence)
    }

    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
}

impl<T: CompletionClient + ?Sized> CompletionClient for &T {
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError> {
        (**self).complete(prompt, params)
    }

    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
}

impl<T: CompletionClient + ?Sized> CompletionClient for Box<T> {
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError> {
        (**self).complete(prompt, params)
    }

    fn concurrent_safe(&self) -> bool {
        (**self).concurrent_safe()
    }
}
