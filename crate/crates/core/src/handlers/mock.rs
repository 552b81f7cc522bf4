//! Deterministic stand-ins for model-backed components.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::client::{CompletionClient, SamplingParams};
use super::prompts::VerifyOutcome;
use super::{HandlerError, SubTaskHandler};
use crate::retrieval::EvidenceDoc;

/// Lowercase, collapse whitespace, drop trailing `?`/`.`.
pub fn normalize_key(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| c == '?' || c == '.' || c.is_whitespace())
        .to_lowercase()
}

/// Fixture file: `{"questions": {question: answer}, "claims": {claim: bool}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockFixture {
    pub questions: HashMap<String, String>,
    pub claims: HashMap<String, bool>,
}

impl MockFixture {
    pub fn load(path: &Path) -> Result<Self, HandlerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HandlerError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HandlerError::Config(format!("{}: {e}", path.display())))
    }
}

/// Table-driven handler. Unknown questions fail; unknown claims verify as
/// `false` with an anomaly.
#[derive(Debug, Clone, Default)]
pub struct MockHandler {
    questions: HashMap<String, String>,
    claims: HashMap<String, bool>,
}

impl MockHandler {
    pub fn new(fixture: MockFixture) -> Self {
        Self {
            questions: fixture
                .questions
                .into_iter()
                .map(|(k, v)| (normalize_key(&k), v))
                .collect(),
            claims: fixture
                .claims
                .into_iter()
                .map(|(k, v)| (normalize_key(&k), v))
                .collect(),
        }
    }

    pub fn with_question(mut self, question: &str, answer: &str) -> Self {
        self.questions
            .insert(normalize_key(question), answer.to_string());
        self
    }

    pub fn with_claim(mut self, claim: &str, value: bool) -> Self {
        self.claims.insert(normalize_key(claim), value);
        self
    }
}

/// Builds a [`MockHandler`] from a fixture.
pub fn mock_handler(fixture: MockFixture) -> MockHandler {
    MockHandler::new(fixture)
}

impl SubTaskHandler for MockHandler {
    fn question(&self, question: &str, _evidence: &[EvidenceDoc]) -> Result<String, HandlerError> {
        self.questions
            .get(&normalize_key(question))
            .cloned()
            .ok_or_else(|| HandlerError::UnknownQuestion(question.to_string()))
    }

    fn verify(
        &self,
        claim: &str,
        _evidence: &[EvidenceDoc],
    ) -> Result<VerifyOutcome, HandlerError> {
        Ok(match self.claims.get(&normalize_key(claim)) {
            Some(&value) => VerifyOutcome::clean(value),
            None => VerifyOutcome {
                value: false,
                anomaly: Some("claim not in fixture".to_string()),
            },
        })
    }
}

/// Returns canned text for exact prompts, or a default.
#[derive(Debug, Clone, Default)]
pub struct CannedCompletionClient {
    responses: HashMap<String, String>,
    default: Option<String>,
}

impl CannedCompletionClient {
    pub fn new(responses: HashMap<String, String>) -> Self {
        Self {
            responses,
            default: None,
        }
    }

    pub fn with_default(mut self, text: &str) -> Self {
        self.default = Some(text.to_string());
        self
    }
}

impl CompletionClient for CannedCompletionClient {
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError> {
        let text = self
            .responses
            .get(prompt)
            .or(self.default.as_ref())
            .ok_or_else(|| HandlerError::Transport {
                status: Some(404),
                attempts: 1,
                detail: "no canned completion for prompt".to_string(),
            })?;
        Ok(vec![text.clone(); params.n.max(1) as usize])
    }
}

/// Program-generation stand-in keyed by the claim in the prompt's final
/// `# The claim is that ...` line.
///
/// The scripted completions for a claim are cycled to fill `n` samples,
/// starting at `seed % len`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptedGenerator {
    #[serde(flatten)]
    pub scripts: HashMap<String, Vec<String>>,
    #[serde(skip)]
    pub seed: u64,
}

pub const CLAIM_MARKER: &str = "# The claim is that ";

impl ScriptedGenerator {
    pub fn new(scripts: HashMap<String, Vec<String>>) -> Self {
        Self { scripts, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Loads `{claim: [completion, ...]}` JSON.
    pub fn load(path: &Path) -> Result<Self, HandlerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HandlerError::Config(format!("{}: {e}", path.display())))?;
        let scripts: HashMap<String, Vec<String>> = serde_json::from_str(&text)
            .map_err(|e| HandlerError::Config(format!("{}: {e}", path.display())))?;
        Ok(Self::new(scripts))
    }
}

impl CompletionClient for ScriptedGenerator {
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<String>, HandlerError> {
        let claim = prompt
            .rfind(CLAIM_MARKER)
            .map(|i| &prompt[i + CLAIM_MARKER.len()..])
            .and_then(|rest| rest.lines().next())
            .unwrap_or("")
            .trim();
        let script = self
            .scripts
            .get(claim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| HandlerError::Transport {
                status: Some(404),
                attempts: 1,
                detail: format!("no scripted programs for claim `{claim}`"),
            })?;
        let start = (self.seed % script.len() as u64) as usize;
        Ok((0..params.n.max(1) as usize)
            .map(|i| script[(start + i) % script.len()].clone())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_answers_normalized_questions() {
        let h =
            MockHandler::default().with_question("who directed interstellar", "Christopher Nolan");
        assert_eq!(
            h.question("Who directed Interstellar?", &[]).unwrap(),
            "Christopher Nolan"
        );
        assert!(matches!(
            h.question("Who wrote Dune?", &[]),
            Err(HandlerError::UnknownQuestion(_))
        ));
    }

    #[test]
    fn mock_unknown_claim_is_false_with_anomaly() {
        let h = MockHandler::default().with_claim("nolan was born in canada", false);
        assert_eq!(
            h.verify("Nolan was born in Canada.", &[]).unwrap(),
            VerifyOutcome::clean(false)
        );
        let unknown = h.verify("Something else.", &[]).unwrap();
        assert!(!unknown.value && unknown.anomaly.is_some());
    }

    #[test]
    fn canned_client_returns_text() {
        let mut map = HashMap::new();
        map.insert("p".to_string(), "out".to_string());
        let c = CannedCompletionClient::new(map);
        let params = SamplingParams {
            temperature: 0.0,
            max_tokens: 5,
            stop: vec![],
            n: 1,
        };
        assert_eq!(c.complete("p", &params).unwrap(), ["out"]);
        assert!(c.complete("q", &params).is_err());
    }

    #[test]
    fn scripted_generator_cycles_from_seed() {
        let mut scripts = HashMap::new();
        scripts.insert(
            "A claim.".to_string(),
            vec!["one".to_string(), "two".to_string()],
        );
        let g = ScriptedGenerator::new(scripts).with_seed(1);
        let params = SamplingParams {
            temperature: 0.7,
            max_tokens: 5,
            stop: vec![],
            n: 3,
        };
        let prompt =
            "...\n# The claim is that other\n...\n# The claim is that A claim.\ndef program():";
        assert_eq!(g.complete(prompt, &params).unwrap(), ["two", "one", "two"]);
    }
}
