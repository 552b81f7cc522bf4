use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{combine_results, Bm25Index, RetrievalResult, COMBINED_DEPTH};
use crate::dsl::{Argument, ReasoningProgram};
use crate::engine::{substitute, Environment, ExecutionTrace};

/// Per-step rankings keyed by step index, plus their combination.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterativeRetrieval {
    pub per_step: BTreeMap<usize, RetrievalResult>,
    pub combined: RetrievalResult,
}

impl IterativeRetrieval {
    pub fn from_steps(steps: impl IntoIterator<Item = (usize, RetrievalResult)>) -> Self {
        let per_step: BTreeMap<usize, RetrievalResult> = steps.into_iter().collect();
        let combined = combine_results(per_step.values(), COMBINED_DEPTH);
        Self { per_step, combined }
    }

    /// Rankings recorded by an open-book execution.
    pub fn from_trace(trace: &ExecutionTrace) -> Self {
        Self::from_steps(
            trace
                .steps
                .iter()
                .filter_map(|s| s.retrieved.clone().map(|r| (s.step_index, r))),
        )
    }
}

/// Queries the index with every Question/Verify argument after substitution
/// against `env`. Steps whose placeholders are not yet bound are skipped.
pub fn iterative_retrieve(
    program: &ReasoningProgram,
    env: &Environment,
    index: &Bm25Index,
    per_step_k: usize,
) -> IterativeRetrieval {
    IterativeRetrieval::from_steps(program.steps().iter().enumerate().filter_map(|(i, step)| {
        match &step.argument {
            Argument::Template(t) => substitute(t, env)
                .ok()
                .map(|query| (i, index.retrieve(&query, per_step_k))),
            Argument::Logic(_) => None,
        }
    }))
}
