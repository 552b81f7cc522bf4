//! Reasoning-program language: tokenizer, parser, static validation and
//! canonical rendering.
//!
//! A program is a sequence of assignments `var = Kind(arg)` where `Kind` is
//! `Question`, `Verify` or `Predict`. `Question`/`Verify` take a string whose
//! `{name}` placeholders refer to earlier variables; `Predict` takes a
//! `not`/`and`/`or` expression over earlier boolean variables and must be the
//! last step.

mod ast;
mod diagnostic;
mod extract;
mod lexer;
mod parser;
mod render;
mod validate;

pub use ast::{
    Argument, LogicExpr, ReasoningProgram, ReasoningStep, Segment, StepKind, TemplateString,
};
pub use diagnostic::{format_report, DiagnosticKind, ParseDiagnostic, SemanticKind};
pub use extract::extract_program_block;
pub use parser::parse_program;
pub use render::{render_expr, render_program, render_step, render_template};
pub use validate::{resolve_name, ResolveError};

/// Parses the text of a string argument (without quotes) into a template.
pub fn parse_template(raw: &str) -> Result<TemplateString, String> {
    lexer::parse_template(raw)
}

pub fn is_identifier(s: &str) -> bool {
    lexer::is_identifier(s)
}
