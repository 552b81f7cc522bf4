use std::fmt;

use serde::{Deserialize, Serialize};

/// Which part of a program a semantic error is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticKind {
    /// Missing, unbound or reassigned variables.
    Token,
    /// Missing, repeated or misplaced `Predict`.
    Structure,
    /// A sub-task result used where its type does not fit.
    Subtask,
}

impl SemanticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SemanticKind::Token => "token",
            SemanticKind::Structure => "structure",
            SemanticKind::Subtask => "subtask",
        }
    }
}

/// Severity plus sub-kind. Syntax errors carry no sub-kind by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Syntax,
    Semantic(SemanticKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "DiagnosticRecord", try_from = "DiagnosticRecord")]
pub struct ParseDiagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    /// 1-based line in the parsed text.
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
}

impl ParseDiagnostic {
    pub fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            kind: DiagnosticKind::Syntax,
            message: message.into(),
            line,
            column,
        }
    }

    pub fn semantic(
        sub_kind: SemanticKind,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        Self {
            kind: DiagnosticKind::Semantic(sub_kind),
            message: message.into(),
            line,
            column,
        }
    }

    pub fn is_syntax(&self) -> bool {
        self.kind == DiagnosticKind::Syntax
    }

    pub fn severity(&self) -> &'static str {
        match self.kind {
            DiagnosticKind::Syntax => "syntax_error",
            DiagnosticKind::Semantic(_) => "semantic_error",
        }
    }

    pub fn sub_kind(&self) -> Option<SemanticKind> {
        match self.kind {
            DiagnosticKind::Syntax => None,
            DiagnosticKind::Semantic(k) => Some(k),
        }
    }
}

/// `severity:subkind:line:col:message`; the subkind is empty for syntax errors.
impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.severity(),
            self.sub_kind().map(SemanticKind::as_str).unwrap_or(""),
            self.line,
            self.column,
            self.message
        )
    }
}

/// One diagnostic per line in the report format.
pub fn format_report(diagnostics: &[ParseDiagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct DiagnosticRecord {
    severity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sub_kind: Option<SemanticKind>,
    line: usize,
    column: usize,
    message: String,
}

impl From<ParseDiagnostic> for DiagnosticRecord {
    fn from(d: ParseDiagnostic) -> Self {
        DiagnosticRecord {
            severity: d.severity().to_string(),
            sub_kind: d.sub_kind(),
            line: d.line,
            column: d.column,
            message: d.message,
        }
    }
}

impl TryFrom<DiagnosticRecord> for ParseDiagnostic {
    type Error = String;

    fn try_from(r: DiagnosticRecord) -> Result<Self, Self::Error> {
        let kind = match (r.severity.as_str(), r.sub_kind) {
            ("syntax_error", None) => DiagnosticKind::Syntax,
            ("semantic_error", Some(k)) => DiagnosticKind::Semantic(k),
            ("syntax_error", Some(_)) => return Err("syntax_error cannot carry a sub_kind".into()),
            ("semantic_error", None) => return Err("semantic_error requires a sub_kind".into()),
            (other, _) => return Err(format!("unknown severity `{other}`")),
        };
        Ok(ParseDiagnostic {
            kind,
            message: r.message,
            line: r.line,
            column: r.column,
        })
    }
}
