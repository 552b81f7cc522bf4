//! Static checks over parsed steps.

use std::collections::HashMap;

use super::ast::{Argument, ReasoningStep, StepKind};
use super::diagnostic::{ParseDiagnostic, SemanticKind};
use super::lexer::is_identifier;

/// Failure to resolve a variable reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveError {
    Unbound,
    /// Case-insensitive fallback matched several names.
    Ambiguous(Vec<String>),
}

/// Resolves `name` against `defined`: an exact match wins, otherwise a unique
/// case-insensitive match is accepted.
pub fn resolve_name<'a, I>(name: &str, defined: I) -> Result<&'a str, ResolveError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut folded = Vec::new();
    for candidate in defined {
        if candidate == name {
            return Ok(candidate);
        }
        if candidate.eq_ignore_ascii_case(name) {
            folded.push(candidate);
        }
    }
    match folded.len() {
        0 => Err(ResolveError::Unbound),
        1 => Ok(folded[0]),
        _ => {
            folded.sort_unstable();
            Err(ResolveError::Ambiguous(
                folded.into_iter().map(str::to_string).collect(),
            ))
        }
    }
}

/// `positions[i]` is the (line, column) reported for step `i`.
pub(crate) fn validate_steps(
    steps: &[ReasoningStep],
    positions: &[(usize, usize)],
) -> Result<(), Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let mut defined: HashMap<&str, StepKind> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();

    if steps.is_empty() {
        return Err(vec![ParseDiagnostic::syntax(
            1,
            1,
            "no program statements found",
        )]);
    }

    for (i, step) in steps.iter().enumerate() {
        let (line, col) = positions[i];

        if !is_identifier(&step.target_var) {
            diags.push(ParseDiagnostic::syntax(
                line,
                col,
                format!("`{}` is not a valid variable name", step.target_var),
            ));
            continue;
        }
        match (&step.kind, &step.argument) {
            (StepKind::Predict, Argument::Logic(_)) => {}
            (StepKind::Question | StepKind::Verify, Argument::Template(t)) => {
                if let Some(bad) = t.placeholders().find(|p| !is_identifier(p)) {
                    diags.push(ParseDiagnostic::syntax(
                        line,
                        col,
                        format!("invalid placeholder `{{{bad}}}`"),
                    ));
                    continue;
                }
            }
            (kind, _) => {
                diags.push(ParseDiagnostic::syntax(
                    line,
                    col,
                    format!("argument type does not match {kind}"),
                ));
                continue;
            }
        }

        for var in step.referenced_vars() {
            match resolve_name(var, order.iter().copied()) {
                Ok(resolved) => {
                    if step.kind == StepKind::Predict && defined[resolved] == StepKind::Question {
                        diags.push(ParseDiagnostic::semantic(
                            SemanticKind::Subtask,
                            line,
                            col,
                            format!(
                                "`{resolved}` holds a Question answer and cannot be used as a boolean"
                            ),
                        ));
                    }
                }
                Err(ResolveError::Unbound) => diags.push(ParseDiagnostic::semantic(
                    SemanticKind::Token,
                    line,
                    col,
                    format!("`{var}` is not assigned by an earlier step"),
                )),
                Err(ResolveError::Ambiguous(names)) => diags.push(ParseDiagnostic::semantic(
                    SemanticKind::Token,
                    line,
                    col,
                    format!("`{var}` ambiguously matches {}", names.join(", ")),
                )),
            }
        }

        if defined.contains_key(step.target_var.as_str()) {
            diags.push(ParseDiagnostic::semantic(
                SemanticKind::Token,
                line,
                col,
                format!("`{}` is assigned more than once", step.target_var),
            ));
        } else {
            defined.insert(&step.target_var, step.kind);
            order.push(&step.target_var);
        }
    }

    let last = steps.len() - 1;
    let mut predicts = 0;
    for (i, step) in steps.iter().enumerate() {
        if step.kind == StepKind::Predict {
            predicts += 1;
            if i != last {
                let (line, col) = positions[i];
                diags.push(ParseDiagnostic::semantic(
                    SemanticKind::Structure,
                    line,
                    col,
                    "Predict must be the final step",
                ));
            }
        }
    }
    if predicts == 0 {
        let (line, col) = positions[last];
        diags.push(ParseDiagnostic::semantic(
            SemanticKind::Structure,
            line,
            col,
            "program has no final Predict step",
        ));
    }

    if diags.is_empty() {
        Ok(())
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}
