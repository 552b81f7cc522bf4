use super::env::{EnvError, Environment};
use crate::dsl::{LogicExpr, Segment, TemplateString};

/// Replaces each placeholder with its binding's text form.
pub fn substitute(template: &TemplateString, env: &Environment) -> Result<String, EnvError> {
    let mut out = String::new();
    for seg in template.segments() {
        match seg {
            Segment::Literal(text) => out.push_str(text),
            Segment::Placeholder(name) => out.push_str(&env.lookup(name)?.value.to_string()),
        }
    }
    Ok(out)
}

/// Standard boolean semantics; every variable must be bound to a boolean.
pub fn eval_logic(expr: &LogicExpr, env: &Environment) -> Result<bool, EnvError> {
    Ok(match expr {
        LogicExpr::Var(name) => env.lookup_bool(name)?,
        LogicExpr::Not(inner) => !eval_logic(inner, env)?,
        LogicExpr::And(a, b) => {
            let lhs = eval_logic(a, env)?;
            let rhs = eval_logic(b, env)?;
            lhs && rhs
        }
        LogicExpr::Or(a, b) => {
            let lhs = eval_logic(a, env)?;
            let rhs = eval_logic(b, env)?;
            lhs || rhs
        }
    })
}

/// The expression with each variable replaced by `True`/`False`, for traces.
pub(crate) fn substitute_logic(expr: &LogicExpr, env: &Environment) -> Result<LogicExpr, EnvError> {
    Ok(match expr {
        LogicExpr::Var(name) => {
            let v = env.lookup_bool(name)?;
            LogicExpr::Var(if v { "True" } else { "False" }.to_string())
        }
        LogicExpr::Not(inner) => LogicExpr::not(substitute_logic(inner, env)?),
        LogicExpr::And(a, b) => {
            LogicExpr::and(substitute_logic(a, env)?, substitute_logic(b, env)?)
        }
        LogicExpr::Or(a, b) => LogicExpr::or(substitute_logic(a, env)?, substitute_logic(b, env)?),
    })
}
