use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{resolve_name, ResolveError};

/// Value bound to a program variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    /// Booleans render as `True`/`False`, matching the program surface syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Bool(true) => f.write_str("True"),
            Value::Bool(false) => f.write_str("False"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub value: Value,
    pub origin_step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvError {
    Unbound(String),
    Ambiguous {
        name: String,
        candidates: Vec<String>,
    },
    TypeMismatch {
        name: String,
        expected: &'static str,
    },
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::Unbound(name) => write!(f, "`{name}` is not bound"),
            EnvError::Ambiguous { name, candidates } => {
                write!(
                    f,
                    "`{name}` matches {} ignoring case",
                    candidates.join(", ")
                )
            }
            EnvError::TypeMismatch { name, expected } => {
                write!(f, "`{name}` is not a {expected} value")
            }
        }
    }
}

/// Variable bindings in assignment order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    bindings: Vec<Binding>,
    by_name: HashMap<String, usize>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds (or rebinds) `name`.
    pub fn bind(&mut self, name: &str, value: Value, origin_step: usize) {
        let binding = Binding {
            name: name.to_string(),
            value,
            origin_step,
        };
        match self.by_name.get(name) {
            Some(&i) => self.bindings[i] = binding,
            None => {
                self.by_name.insert(name.to_string(), self.bindings.len());
                self.bindings.push(binding);
            }
        }
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        let step = self.bindings.len();
        self.bind(name, value, step);
        self
    }

    /// Exact lookup, falling back to a unique case-insensitive match.
    pub fn lookup(&self, name: &str) -> Result<&Binding, EnvError> {
        match resolve_name(name, self.bindings.iter().map(|b| b.name.as_str())) {
            Ok(resolved) => Ok(&self.bindings[self.by_name[resolved]]),
            Err(ResolveError::Unbound) => Err(EnvError::Unbound(name.to_string())),
            Err(ResolveError::Ambiguous(candidates)) => Err(EnvError::Ambiguous {
                name: name.to_string(),
                candidates,
            }),
        }
    }

    pub fn lookup_bool(&self, name: &str) -> Result<bool, EnvError> {
        match &self.lookup(name)?.value {
            Value::Bool(b) => Ok(*b),
            Value::Text(_) => Err(EnvError::TypeMismatch {
                name: name.to_string(),
                expected: "boolean",
            }),
        }
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl FromIterator<Binding> for Environment {
    fn from_iter<T: IntoIterator<Item = Binding>>(iter: T) -> Self {
        let mut env = Environment::new();
        for b in iter {
            env.bind(&b.name, b.value, b.origin_step);
        }
        env
    }
}
