//! Recursive-descent parser for program statements.
//!
//! ```text
//! program  := line+
//! line     := ident "=" kind "(" arg ")"
//! kind     := "Question" | "Verify" | "Predict"        (case-insensitive)
//! arg      := string | or_expr
//! string   := ["f"] ( '"' chars '"' | "'" chars "'" )
//! or_expr  := and_expr ( "or" and_expr )*
//! and_expr := not_expr ( "and" not_expr )*
//! not_expr := "not" not_expr | ident | "(" or_expr ")"
//! ```
//!
//! Blank lines, `#` comment lines and a `def program():` header are skipped.

use super::ast::{Argument, LogicExpr, ReasoningProgram, ReasoningStep, StepKind};
use super::diagnostic::ParseDiagnostic;
use super::lexer::{lex_line, Tok, Token};
use super::validate::validate_steps;

const MAX_EXPR_DEPTH: usize = 128;
const RESERVED: &[&str] = &["and", "or", "not", "True", "False", "None"];

/// Parses and validates a reasoning program.
///
/// Syntax errors from every line are collected; if there are any, semantic
/// checks are skipped.
pub fn parse_program(text: &str) -> Result<ReasoningProgram, Vec<ParseDiagnostic>> {
    let mut steps = Vec::new();
    let mut positions = Vec::new();
    let mut syntax = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || is_def_header(trimmed) {
            continue;
        }
        match parse_statement(line, line_no) {
            Ok(step) => {
                let indent = line.chars().take_while(|c| c.is_whitespace()).count();
                steps.push(step);
                positions.push((line_no, indent + 1));
            }
            Err(d) => syntax.push(d),
        }
    }

    if steps.is_empty() && syntax.is_empty() {
        syntax.push(ParseDiagnostic::syntax(1, 1, "no program statements found"));
    }
    if !syntax.is_empty() {
        return Err(syntax);
    }
    validate_steps(&steps, &positions)?;
    Ok(ReasoningProgram::from_validated(steps, text.to_string()))
}

fn is_def_header(trimmed: &str) -> bool {
    let compact: String = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
    compact == "defprogram():"
}

fn parse_statement(line: &str, line_no: usize) -> Result<ReasoningStep, ParseDiagnostic> {
    let tokens = lex_line(line, line_no)?;
    let end_col = line.chars().count() + 1;
    let mut cur = Cursor {
        tokens: &tokens,
        pos: 0,
        line_no,
        end_col,
    };

    let (target, target_col) = match cur.next() {
        Some(Token {
            tok: Tok::Ident(name),
            column,
        }) => (name.clone(), *column),
        Some(t) => return Err(cur.err_at(t.column, "expected a variable name")),
        None => return Err(cur.err_at(1, "expected a variable name")),
    };
    if RESERVED.contains(&target.as_str()) {
        return Err(cur.err_at(target_col, format!("`{target}` cannot be assigned")));
    }
    match cur.next() {
        Some(Token {
            tok: Tok::Assign, ..
        }) => {}
        Some(t) => return Err(cur.err_at(t.column, "expected `=` after variable name")),
        None => return Err(cur.err_at(end_col, "expected `=` after variable name")),
    }
    let (kind, kind_col) = match cur.next() {
        Some(Token {
            tok: Tok::Ident(name),
            column,
        }) => match StepKind::from_name(name) {
            Some(kind) => (kind, *column),
            None => return Err(cur.err_at(*column, format!("unknown function `{name}`"))),
        },
        Some(t) => return Err(cur.err_at(t.column, "expected Question, Verify or Predict")),
        None => return Err(cur.err_at(end_col, "expected Question, Verify or Predict")),
    };
    match cur.next() {
        Some(Token {
            tok: Tok::LParen, ..
        }) => {}
        Some(t) => return Err(cur.err_at(t.column, format!("expected `(` after {kind}"))),
        None => return Err(cur.err_at(end_col, format!("expected `(` after {kind}"))),
    }

    let argument = match kind {
        StepKind::Question | StepKind::Verify => match cur.next() {
            Some(Token {
                tok: Tok::Str(tpl), ..
            }) => Argument::Template(tpl.clone()),
            Some(t) => {
                return Err(cur.err_at(t.column, format!("{kind} expects a string argument")))
            }
            None => return Err(cur.err_at(end_col, "missing `)`")),
        },
        StepKind::Predict => {
            if matches!(
                cur.peek(),
                Some(Token {
                    tok: Tok::RParen,
                    ..
                })
            ) {
                return Err(cur.err_at(kind_col, "Predict requires a logical expression"));
            }
            Argument::Logic(cur.or_expr(0)?)
        }
    };

    match cur.next() {
        Some(Token {
            tok: Tok::RParen, ..
        }) => {}
        Some(t) => return Err(cur.err_at(t.column, "expected `)`")),
        None => return Err(cur.err_at(end_col, "missing `)`")),
    }
    if let Some(t) = cur.next() {
        return Err(cur.err_at(t.column, "unexpected text after statement"));
    }

    Ok(ReasoningStep {
        target_var: target,
        kind,
        argument,
    })
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    line_no: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, column: usize, msg: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic::syntax(self.line_no, column, msg)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(w), .. }) if w == kw)
    }

    fn or_expr(&mut self, depth: usize) -> Result<LogicExpr, ParseDiagnostic> {
        let mut lhs = self.and_expr(depth)?;
        while self.peek_keyword("or") {
            self.pos += 1;
            let rhs = self.and_expr(depth)?;
            lhs = LogicExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self, depth: usize) -> Result<LogicExpr, ParseDiagnostic> {
        let mut lhs = self.not_expr(depth)?;
        while self.peek_keyword("and") {
            self.pos += 1;
            let rhs = self.not_expr(depth)?;
            lhs = LogicExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self, depth: usize) -> Result<LogicExpr, ParseDiagnostic> {
        if depth > MAX_EXPR_DEPTH {
            let col = self.peek().map(|t| t.column).unwrap_or(self.end_col);
            return Err(self.err_at(col, "expression nested too deeply"));
        }
        let Some(tok) = self.next() else {
            return Err(self.err_at(self.end_col, "incomplete logical expression"));
        };
        match &tok.tok {
            Tok::Ident(w) if w == "not" => Ok(LogicExpr::not(self.not_expr(depth + 1)?)),
            Tok::Ident(w) if w == "and" || w == "or" => {
                Err(self.err_at(tok.column, format!("unexpected operator `{w}`")))
            }
            Tok::Ident(w) if RESERVED.contains(&w.as_str()) => Err(self.err_at(
                tok.column,
                format!("constant `{w}` is not allowed in Predict"),
            )),
            Tok::Ident(w) => {
                if matches!(
                    self.peek(),
                    Some(Token {
                        tok: Tok::LParen,
                        ..
                    })
                ) {
                    return Err(self.err_at(
                        tok.column,
                        format!("nested call `{w}(...)` is not allowed in Predict"),
                    ));
                }
                Ok(LogicExpr::Var(w.clone()))
            }
            Tok::LParen => {
                let inner = self.or_expr(depth + 1)?;
                match self.next() {
                    Some(Token {
                        tok: Tok::RParen, ..
                    }) => Ok(inner),
                    Some(t) => Err(self.err_at(t.column, "expected `)`")),
                    None => Err(self.err_at(self.end_col, "missing `)`")),
                }
            }
            Tok::Str(_) => Err(self.err_at(
                tok.column,
                "Predict expects a logical expression, not a string",
            )),
            Tok::RParen => Err(self.err_at(tok.column, "unexpected `)`")),
            Tok::Assign => Err(self.err_at(tok.column, "unexpected `=`")),
        }
    }
}
