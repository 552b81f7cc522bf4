//! Run configuration, read from TOML.
//!
//! ```toml
//! setting = "open_book"          # gold | open_book | closed_book
//! dataset_format = "hover"       # hover | feverous_s
//! exemplars = "hover"            # bundled set name or path to an asset file
//! prompt_style = "program"       # program | direct | cot | zs_cot | self_ask
//! fallback = "direct_verify"     # direct_verify | always_supported | always_refuted
//! seed = 0
//! workers = 4
//! output_dir = "run"
//!
//! [generation]                   # num_programs, temperature, max_new_tokens, stop_sequences
//! [endpoint]                     # sub-task handler endpoint
//! [generator]                    # program generator endpoint; defaults to [endpoint]
//! [subtask]                      # temperature, question_max_tokens, verify_max_tokens, stop
//! [retrieval]                    # index, per_step_k, evidence_budget
//! [mock]                         # handler_fixture, generator_script, completions
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{ClaimRecord, DatasetFormat};
use crate::engine::FallbackPolicy;
use crate::generation::GenerationConfig;
use crate::handlers::{LmEndpointConfig, SubtaskParams};
use crate::retrieval::{DEFAULT_EVIDENCE_BUDGET, DEFAULT_TOP_K};
use crate::EvidenceSetting;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How each claim is turned into a label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    /// Generate, execute and vote over reasoning programs.
    #[default]
    Program,
    Direct,
    Cot,
    ZsCot,
    SelfAsk,
}

impl PromptStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptStyle::Program => "program",
            PromptStyle::Direct => "direct",
            PromptStyle::Cot => "cot",
            PromptStyle::ZsCot => "zs_cot",
            PromptStyle::SelfAsk => "self_ask",
        }
    }
}

impl fmt::Display for PromptStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PromptStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "program" => Ok(PromptStyle::Program),
            "direct" => Ok(PromptStyle::Direct),
            "cot" => Ok(PromptStyle::Cot),
            "zs_cot" => Ok(PromptStyle::ZsCot),
            "self_ask" => Ok(PromptStyle::SelfAsk),
            other => Err(format!("unknown prompt style `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub index: Option<PathBuf>,
    pub per_step_k: usize,
    pub evidence_budget: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            index: None,
            per_step_k: DEFAULT_TOP_K,
            evidence_budget: DEFAULT_EVIDENCE_BUDGET,
        }
    }
}

/// Deterministic stand-ins used instead of HTTP endpoints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockConfig {
    /// `{"questions": {..}, "claims": {..}}` for the sub-task handler.
    pub handler_fixture: Option<PathBuf>,
    /// `{claim: [program, ...]}` for the generator.
    pub generator_script: Option<PathBuf>,
    /// `{prompt: completion}` for prompt-style baselines.
    pub completions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub setting: EvidenceSetting,
    pub dataset_format: DatasetFormat,
    pub exemplars: String,
    pub prompt_style: PromptStyle,
    pub fallback: FallbackPolicy,
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub generation: GenerationConfig,
    pub endpoint: LmEndpointConfig,
    pub generator: Option<LmEndpointConfig>,
    pub subtask: SubtaskParams,
    pub retrieval: RetrievalConfig,
    pub mock: MockConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            setting: EvidenceSetting::OpenBook,
            dataset_format: DatasetFormat::Hover,
            exemplars: "hover".to_string(),
            prompt_style: PromptStyle::Program,
            fallback: FallbackPolicy::DirectVerify,
            seed: 0,
            workers: 4,
            output_dir: PathBuf::from("run"),
            generation: GenerationConfig::default(),
            endpoint: LmEndpointConfig::default(),
            generator: None,
            subtask: SubtaskParams::default(),
            retrieval: RetrievalConfig::default(),
            mock: MockConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Makes relative file paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.retrieval.index);
        fix(&mut self.mock.handler_fixture);
        fix(&mut self.mock.generator_script);
        fix(&mut self.mock.completions);
        if self
            .exemplars
            .parse::<crate::generation::ExemplarSetName>()
            .is_err()
        {
            let p = Path::new(&self.exemplars);
            if p.is_relative() {
                self.exemplars = base.join(p).to_string_lossy().into_owned();
            }
        }
    }

    pub fn generator_endpoint(&self) -> &LmEndpointConfig {
        self.generator.as_ref().unwrap_or(&self.endpoint)
    }

    /// Checks setting requirements. Returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        if self.generation.num_programs == 0 {
            return Err(ConfigError::Invalid(
                "generation.num_programs must be at least 1".into(),
            ));
        }
        if self.generation.num_programs.is_multiple_of(2) {
            warnings.push("an even number of programs allows tied votes".to_string());
        }
        if self.retrieval.per_step_k == 0 {
            return Err(ConfigError::Invalid(
                "retrieval.per_step_k must be at least 1".into(),
            ));
        }
        match self.setting {
            EvidenceSetting::OpenBook if self.retrieval.index.is_none() => {
                return Err(ConfigError::Invalid(
                    "open_book requires retrieval.index".into(),
                ))
            }
            EvidenceSetting::ClosedBook if self.retrieval.index.is_some() => {
                warnings.push("retrieval.index is unused in the closed_book setting".to_string())
            }
            _ => {}
        }
        if self.prompt_style != PromptStyle::Program && self.setting != EvidenceSetting::ClosedBook
        {
            return Err(ConfigError::Invalid(format!(
                "prompt_style `{}` is only available in the closed_book setting",
                self.prompt_style
            )));
        }
        if self.mock.handler_fixture.is_none() {
            self.endpoint.validate().map_err(ConfigError::Invalid)?;
        }
        if self.mock.generator_script.is_none() {
            self.generator_endpoint()
                .validate()
                .map_err(ConfigError::Invalid)?;
        }
        Ok(warnings)
    }

    /// Gold runs need evidence on every record.
    pub fn validate_dataset(&self, records: &[ClaimRecord]) -> Result<(), ConfigError> {
        if self.setting == EvidenceSetting::Gold {
            if let Some(r) = records
                .iter()
                .find(|r| r.gold_evidence_ids.is_empty() && r.evidence_docs.is_empty())
            {
                return Err(ConfigError::Invalid(format!(
                    "gold setting but claim `{}` has no gold evidence",
                    r.claim_id
                )));
            }
        }
        Ok(())
    }

    /// First 12 hex digits of SHA-256 over the result-affecting fields.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.workers = 0;
        keyed.output_dir = PathBuf::new();
        let json = serde_json::to_string(&keyed).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..12].to_string()
    }

    /// `output_dir/{hash}`.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.hash())
    }
}
