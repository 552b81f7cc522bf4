//! Canonical text form of a program.

use super::ast::{Argument, LogicExpr, ReasoningProgram, ReasoningStep, Segment, TemplateString};

/// One `var = Kind("arg")` / `var = Predict(expr)` line per step, no header,
/// no indentation. Parsing the output yields a structurally equal program.
pub fn render_program(program: &ReasoningProgram) -> String {
    program
        .steps()
        .iter()
        .map(render_step)
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_step(step: &ReasoningStep) -> String {
    let arg = match &step.argument {
        Argument::Template(t) => format!("\"{}\"", render_template(t)),
        Argument::Logic(e) => render_expr(e),
    };
    format!("{} = {}({})", step.target_var, step.kind, arg)
}

/// String-literal body with quotes, backslashes and braces escaped.
pub fn render_template(template: &TemplateString) -> String {
    let mut out = String::new();
    for seg in template.segments() {
        match seg {
            Segment::Placeholder(name) => {
                out.push('{');
                out.push_str(name);
                out.push('}');
            }
            Segment::Literal(text) => {
                for c in text.chars() {
                    match c {
                        '\\' => out.push_str("\\\\"),
                        '"' => out.push_str("\\\""),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        '{' => out.push_str("{{"),
                        '}' => out.push_str("}}"),
                        c => out.push(c),
                    }
                }
            }
        }
    }
    out
}

fn precedence(e: &LogicExpr) -> u8 {
    match e {
        LogicExpr::Or(..) => 1,
        LogicExpr::And(..) => 2,
        LogicExpr::Not(_) => 3,
        LogicExpr::Var(_) => 4,
    }
}

/// Minimal parentheses for `not` > `and` > `or`, both binaries left-associative.
pub fn render_expr(e: &LogicExpr) -> String {
    fn wrap(e: &LogicExpr, parens: bool) -> String {
        if parens {
            format!("({})", render_expr(e))
        } else {
            render_expr(e)
        }
    }
    match e {
        LogicExpr::Var(v) => v.clone(),
        LogicExpr::Not(inner) => format!("not {}", wrap(inner, precedence(inner) < 3)),
        LogicExpr::And(a, b) => format!(
            "{} and {}",
            wrap(a, precedence(a) < 2),
            wrap(b, precedence(b) <= 2)
        ),
        LogicExpr::Or(a, b) => format!("{} or {}", render_expr(a), wrap(b, precedence(b) <= 1)),
    }
}
