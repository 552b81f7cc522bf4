//! Typed syntax tree for reasoning programs.

use std::fmt;

use super::diagnostic::ParseDiagnostic;
use super::validate::validate_steps;

/// A validated reasoning program: an ordered list of steps ending in exactly
/// one `Predict`.
///
/// Equality is structural and ignores `source_text`, so a program parsed from
/// model output compares equal to the same program parsed from its canonical
/// rendering.
#[derive(Debug, Clone)]
pub struct ReasoningProgram {
    steps: Vec<ReasoningStep>,
    source_text: String,
}

impl ReasoningProgram {
    /// Builds a program from already-constructed steps, running the same
    /// semantic checks as [`parse_program`](super::parse_program).
    ///
    /// Diagnostics produced here use the 1-based step index as the line
    /// number and column 1.
    pub fn new(
        steps: Vec<ReasoningStep>,
        source_text: impl Into<String>,
    ) -> Result<Self, Vec<ParseDiagnostic>> {
        let lines: Vec<(usize, usize)> = (1..=steps.len()).map(|i| (i, 1)).collect();
        validate_steps(&steps, &lines)?;
        Ok(Self {
            steps,
            source_text: source_text.into(),
        })
    }

    pub(crate) fn from_validated(steps: Vec<ReasoningStep>, source_text: String) -> Self {
        Self { steps, source_text }
    }

    pub fn steps(&self) -> &[ReasoningStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Verbatim text this program was parsed from.
    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// The final `Predict` step.
    pub fn predict_step(&self) -> &ReasoningStep {
        self.steps.last().expect("validated program is non-empty")
    }
}

impl PartialEq for ReasoningProgram {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps
    }
}

impl Eq for ReasoningProgram {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningStep {
    pub target_var: String,
    pub kind: StepKind,
    pub argument: Argument,
}

impl ReasoningStep {
    pub fn question(target: &str, template: TemplateString) -> Self {
        Self {
            target_var: target.to_string(),
            kind: StepKind::Question,
            argument: Argument::Template(template),
        }
    }

    pub fn verify(target: &str, template: TemplateString) -> Self {
        Self {
            target_var: target.to_string(),
            kind: StepKind::Verify,
            argument: Argument::Template(template),
        }
    }

    pub fn predict(target: &str, expr: LogicExpr) -> Self {
        Self {
            target_var: target.to_string(),
            kind: StepKind::Predict,
            argument: Argument::Logic(expr),
        }
    }

    /// Variable names this step reads, in order of first appearance.
    pub fn referenced_vars(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        match &self.argument {
            Argument::Template(t) => {
                for name in t.placeholders() {
                    if !out.contains(&name) {
                        out.push(name);
                    }
                }
            }
            Argument::Logic(e) => e.collect_vars(&mut out),
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum StepKind {
    Question,
    Verify,
    Predict,
}

impl StepKind {
    pub fn name(self) -> &'static str {
        match self {
            StepKind::Question => "Question",
            StepKind::Verify => "Verify",
            StepKind::Predict => "Predict",
        }
    }

    /// Function names are matched case-insensitively; published exemplars
    /// contain a lowercase `predict(...)`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "question" => Some(StepKind::Question),
            "verify" => Some(StepKind::Verify),
            "predict" => Some(StepKind::Predict),
            _ => None,
        }
    }

    /// Whether the step binds a boolean (`Verify`, `Predict`) rather than text.
    pub fn yields_bool(self) -> bool {
        !matches!(self, StepKind::Question)
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Argument {
    Template(TemplateString),
    Logic(LogicExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Literal(String),
    Placeholder(String),
}

/// Natural-language argument with `{name}` placeholders.
///
/// Segments are kept normalized: no empty literals and no two adjacent
/// literals, so structurally equal templates have identical segment lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TemplateString {
    segments: Vec<Segment>,
}

impl TemplateString {
    pub fn new(segments: impl IntoIterator<Item = Segment>) -> Self {
        let mut out = TemplateString::default();
        for seg in segments {
            match seg {
                Segment::Literal(s) => out.push_literal(&s),
                Segment::Placeholder(p) => out.segments.push(Segment::Placeholder(p)),
            }
        }
        out
    }

    pub fn literal(text: &str) -> Self {
        let mut out = TemplateString::default();
        out.push_literal(text);
        out
    }

    fn push_literal(&mut self, text: &str) {
        if text.is_empty() {
            return;
        }
        if let Some(Segment::Literal(last)) = self.segments.last_mut() {
            last.push_str(text);
        } else {
            self.segments.push(Segment::Literal(text.to_string()));
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Placeholder(p) => Some(p.as_str()),
            Segment::Literal(_) => None,
        })
    }
}

/// Boolean expression over previously bound variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LogicExpr {
    Var(String),
    Not(Box<LogicExpr>),
    And(Box<LogicExpr>, Box<LogicExpr>),
    Or(Box<LogicExpr>, Box<LogicExpr>),
}

impl LogicExpr {
    pub fn var(name: &str) -> Self {
        LogicExpr::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: LogicExpr) -> Self {
        LogicExpr::Not(Box::new(inner))
    }

    pub fn and(lhs: LogicExpr, rhs: LogicExpr) -> Self {
        LogicExpr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: LogicExpr, rhs: LogicExpr) -> Self {
        LogicExpr::Or(Box::new(lhs), Box::new(rhs))
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            LogicExpr::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            LogicExpr::Not(e) => e.collect_vars(out),
            LogicExpr::And(a, b) | LogicExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Distinct variable names in left-to-right order.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }
}
