//! Single-line tokenizer for program statements.

use super::ast::{Segment, TemplateString};
use super::diagnostic::ParseDiagnostic;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Assign,
    LParen,
    RParen,
    Str(TemplateString),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    /// 1-based character column of the token start.
    pub column: usize,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_continue)
}

/// Tokenizes one source line. A `#` outside a string ends the line.
pub(crate) fn lex_line(line: &str, line_no: usize) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '#' => break,
            '=' => {
                if chars.get(i + 1) == Some(&'=') {
                    return Err(ParseDiagnostic::syntax(line_no, column, "unexpected `==`"));
                }
                tokens.push(Token {
                    tok: Tok::Assign,
                    column,
                });
                i += 1;
            }
            '(' => {
                tokens.push(Token {
                    tok: Tok::LParen,
                    column,
                });
                i += 1;
            }
            ')' => {
                tokens.push(Token {
                    tok: Tok::RParen,
                    column,
                });
                i += 1;
            }
            '"' | '\'' => {
                let (tpl, next) = lex_string(&chars, i, line_no)?;
                tokens.push(Token {
                    tok: Tok::Str(tpl),
                    column,
                });
                i = next;
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_continue(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if i < chars.len() && (chars[i] == '"' || chars[i] == '\'') {
                    if word == "f" || word == "F" {
                        let (tpl, next) = lex_string(&chars, i, line_no)?;
                        tokens.push(Token {
                            tok: Tok::Str(tpl),
                            column,
                        });
                        i = next;
                        continue;
                    }
                    return Err(ParseDiagnostic::syntax(
                        line_no,
                        column,
                        format!("unsupported string prefix `{word}`"),
                    ));
                }
                tokens.push(Token {
                    tok: Tok::Ident(word),
                    column,
                });
            }
            other => {
                return Err(ParseDiagnostic::syntax(
                    line_no,
                    column,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(tokens)
}

/// Lexes a quoted string starting at `open`, returning the template and the
/// index just past the closing quote.
fn lex_string(
    chars: &[char],
    open: usize,
    line_no: usize,
) -> Result<(TemplateString, usize), ParseDiagnostic> {
    let quote = chars[open];
    let mut raw = String::new();
    let mut i = open + 1;
    loop {
        let Some(&c) = chars.get(i) else {
            return Err(ParseDiagnostic::syntax(
                line_no,
                open + 1,
                "unterminated string literal",
            ));
        };
        if c == quote {
            i += 1;
            break;
        }
        if c == '\\' {
            match chars.get(i + 1) {
                Some('\\') => raw.push('\\'),
                Some('"') => raw.push('"'),
                Some('\'') => raw.push('\''),
                Some('n') => raw.push('\n'),
                Some('t') => raw.push('\t'),
                Some(&other) => {
                    raw.push('\\');
                    raw.push(other);
                }
                None => {
                    return Err(ParseDiagnostic::syntax(
                        line_no,
                        open + 1,
                        "unterminated string literal",
                    ))
                }
            }
            i += 2;
            continue;
        }
        raw.push(c);
        i += 1;
    }
    let tpl =
        parse_template(&raw).map_err(|msg| ParseDiagnostic::syntax(line_no, open + 1, msg))?;
    Ok((tpl, i))
}

/// Splits string content into literal and `{name}` placeholder segments.
/// `{{` and `}}` are literal braces.
pub(crate) fn parse_template(raw: &str) -> Result<TemplateString, String> {
    let chars: Vec<char> = raw.chars().collect();
    let mut segments = Vec::new();
    let mut literal = String::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' if chars.get(i + 1) == Some(&'{') => {
                literal.push('{');
                i += 2;
            }
            '}' if chars.get(i + 1) == Some(&'}') => {
                literal.push('}');
                i += 2;
            }
            '{' => {
                let Some(close) = chars[i + 1..].iter().position(|&c| c == '}') else {
                    return Err("unbalanced `{` in string".to_string());
                };
                let name: String = chars[i + 1..i + 1 + close].iter().collect();
                let name = name.trim();
                if !is_identifier(name) {
                    return Err(format!("invalid placeholder `{{{name}}}`"));
                }
                if !literal.is_empty() {
                    segments.push(Segment::Literal(std::mem::take(&mut literal)));
                }
                segments.push(Segment::Placeholder(name.to_string()));
                i += close + 2;
            }
            '}' => return Err("unbalanced `}` in string".to_string()),
            c => {
                literal.push(c);
                i += 1;
            }
        }
    }
    if !literal.is_empty() {
        segments.push(Segment::Literal(literal));
    }
    Ok(TemplateString::new(segments))
}
