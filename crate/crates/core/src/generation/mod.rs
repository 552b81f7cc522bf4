//! Few-shot program generation.

mod exemplars;

use serde::{Deserialize, Serialize};

pub use exemplars::{Exemplar, ExemplarSet, ExemplarSetName};

use crate::dsl::{extract_program_block, parse_program, ParseDiagnostic, ReasoningProgram};
use crate::handlers::{CompletionClient, HandlerError, SamplingParams, CLAIM_MARKER};

#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("exemplar block {block}: {message}")]
    Exemplar { block: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub num_programs: u32,
    pub temperature: f64,
    pub max_new_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            num_programs: 5,
            temperature: 0.7,
            max_new_tokens: 256,
            stop_sequences: vec!["\n# The claim".to_string(), "\n\n\n".to_string()],
        }
    }
}

impl GenerationConfig {
    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            temperature: self.temperature,
            max_tokens: self.max_new_tokens,
            stop: self.stop_sequences.clone(),
            n: self.num_programs,
        }
    }
}

/// Instruction in triple quotes, each exemplar as a commented claim plus
/// `def program():` body, then the open block for `claim`.
pub fn build_generation_prompt(set: &ExemplarSet, claim: &str) -> String {
    let mut out = format!("'''{}'''\n\n", set.instruction);
    for ex in &set.exemplars {
        out.push_str(CLAIM_MARKER);
        out.push_str(&ex.claim);
        out.push_str("\ndef program():\n");
        for line in ex.program_text.lines() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(CLAIM_MARKER);
    out.push_str(claim.trim());
    out.push_str("\ndef program():");
    out
}

/// One sampled program.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleOutcome {
    Parsed {
        text: String,
        program: ReasoningProgram,
    },
    Invalid {
        text: String,
        diagnostics: Vec<ParseDiagnostic>,
    },
    Failed(HandlerError),
}

impl SampleOutcome {
    pub fn from_completion(completion: &str) -> Self {
        let text = extract_program_block(completion);
        match parse_program(&text) {
            Ok(program) => SampleOutcome::Parsed { text, program },
            Err(diagnostics) => SampleOutcome::Invalid { text, diagnostics },
        }
    }

    pub fn program(&self) -> Option<&ReasoningProgram> {
        match self {
            SampleOutcome::Parsed { program, .. } => Some(program),
            _ => None,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            SampleOutcome::Parsed { text, .. } | SampleOutcome::Invalid { text, .. } => text,
            SampleOutcome::Failed(_) => "",
        }
    }

    pub fn diagnostics(&self) -> &[ParseDiagnostic] {
        match self {
            SampleOutcome::Invalid { diagnostics, .. } => diagnostics,
            _ => &[],
        }
    }

    pub fn record(&self) -> SampleRecord {
        match self {
            SampleOutcome::Parsed { text, .. } => SampleRecord {
                text: text.clone(),
                parse_ok: true,
                diagnostics: Vec::new(),
                error: None,
            },
            SampleOutcome::Invalid { text, diagnostics } => SampleRecord {
                text: text.clone(),
                parse_ok: false,
                diagnostics: diagnostics.clone(),
                error: None,
            },
            SampleOutcome::Failed(e) => SampleRecord {
                text: String::new(),
                parse_ok: false,
                diagnostics: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    }
}

/// Serialized form of a sample in `generate` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub text: String,
    pub parse_ok: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ParseDiagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SampleRecord {
    /// Re-parses the stored text.
    pub fn outcome(&self) -> SampleOutcome {
        match &self.error {
            Some(e) => SampleOutcome::Failed(HandlerError::Transport {
                status: None,
                attempts: 0,
                detail: e.clone(),
            }),
            None => SampleOutcome::from_completion(&self.text),
        }
    }
}

/// Samples `config.num_programs` completions and parses each. Always returns
/// exactly that many entries, in sample order.
pub fn generate_programs(
    config: &GenerationConfig,
    client: &dyn CompletionClient,
    set: &ExemplarSet,
    claim: &str,
) -> Vec<SampleOutcome> {
    let n = config.num_programs.max(1) as usize;
    let prompt = build_generation_prompt(set, claim);
    match client.complete(&prompt, &config.sampling()) {
        Ok(completions) => {
            let mut out: Vec<SampleOutcome> = completions
                .iter()
                .take(n)
                .map(|c| SampleOutcome::from_completion(c))
                .collect();
            while out.len() < n {
                out.push(SampleOutcome::Failed(HandlerError::Transport {
                    status: None,
                    attempts: 1,
                    detail: format!("endpoint returned {} of {n} samples", completions.len()),
                }));
            }
            out
        }
        Err(e) => vec![SampleOutcome::Failed(e); n],
    }
}
