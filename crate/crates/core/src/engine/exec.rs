use serde::{Deserialize, Serialize};

use super::env::{Binding, Environment, Value};
use super::logic::{eval_logic, substitute, substitute_logic};
use super::{ExecError, ExecErrorKind, VeracityLabel};
use crate::dsl::{render_expr, Argument, ReasoningProgram, Segment, StepKind, TemplateString};
use crate::eval::ClaimRecord;
use crate::handlers::SubTaskHandler;
use crate::retrieval::{apply_evidence_budget, Bm25Index, EvidenceDoc, RetrievalResult};
use crate::EvidenceSetting;

/// Where step evidence comes from.
#[derive(Debug, Clone, Copy)]
pub enum EvidenceMode<'a> {
    /// The same documents for every step.
    Gold(&'a [EvidenceDoc]),
    /// Per-step BM25 over the substituted argument.
    OpenBook(&'a Bm25Index),
    ClosedBook,
}

impl EvidenceMode<'_> {
    pub fn setting(&self) -> EvidenceSetting {
        match self {
            EvidenceMode::Gold(_) => EvidenceSetting::Gold,
            EvidenceMode::OpenBook(_) => EvidenceSetting::OpenBook,
            EvidenceMode::ClosedBook => EvidenceSetting::ClosedBook,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExecSettings<'a> {
    pub evidence: EvidenceMode<'a>,
    pub per_step_k: usize,
    /// Character budget for the evidence handed to each step.
    pub evidence_budget: usize,
}

impl<'a> ExecSettings<'a> {
    pub fn new(evidence: EvidenceMode<'a>) -> Self {
        Self {
            evidence,
            per_step_k: crate::retrieval::DEFAULT_TOP_K,
            evidence_budget: crate::retrieval::DEFAULT_EVIDENCE_BUDGET,
        }
    }

    pub fn closed_book() -> Self {
        Self::new(EvidenceMode::ClosedBook)
    }

    /// Evidence for one step query plus the ranking it came from, if any.
    pub fn evidence_for(&self, query: &str) -> (Vec<EvidenceDoc>, Option<RetrievalResult>) {
        match self.evidence {
            EvidenceMode::ClosedBook => (Vec::new(), None),
            EvidenceMode::Gold(docs) => (
                apply_evidence_budget(docs.to_vec(), self.evidence_budget),
                None,
            ),
            EvidenceMode::OpenBook(index) => {
                let ranked = index.retrieve(query, self.per_step_k);
                let docs = ranked
                    .doc_ids()
                    .filter_map(|id| index.doc_by_id(id).cloned())
                    .collect();
                (
                    apply_evidence_budget(docs, self.evidence_budget),
                    Some(ranked),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_index: usize,
    pub kind: StepKind,
    pub target_var: String,
    pub raw_argument: String,
    pub substituted_argument: String,
    /// Documents actually shown to the handler.
    pub evidence_doc_ids: Vec<String>,
    /// Full per-step ranking in the open-book setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved: Option<RetrievalResult>,
    pub result: Binding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handler_anomaly: Option<String>,
}

/// Record of one program run; `final_label` is set iff `failure` is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub claim_id: String,
    pub program_source: String,
    pub steps: Vec<StepRecord>,
    pub final_label: Option<VeracityLabel>,
    pub failure: Option<ExecError>,
}

impl ExecutionTrace {
    pub fn bindings(&self) -> Environment {
        self.steps.iter().map(|s| s.result.clone()).collect()
    }
}

fn raw_template(t: &TemplateString) -> String {
    t.segments()
        .iter()
        .map(|s| match s {
            Segment::Literal(text) => text.clone(),
            Segment::Placeholder(name) => format!("{{{name}}}"),
        })
        .collect()
}

pub(crate) fn raw_argument(arg: &Argument) -> String {
    match arg {
        Argument::Template(t) => raw_template(t),
        Argument::Logic(e) => render_expr(e),
    }
}

/// Runs `program` step by step. Any step error stops execution and is
/// recorded as the trace's failure.
pub fn execute(
    program: &ReasoningProgram,
    handler: &dyn SubTaskHandler,
    claim: &ClaimRecord,
    settings: &ExecSettings<'_>,
) -> ExecutionTrace {
    let mut trace = ExecutionTrace {
        claim_id: claim.claim_id.clone(),
        program_source: program.source_text().to_string(),
        steps: Vec::with_capacity(program.len()),
        final_label: None,
        failure: None,
    };
    let mut env = Environment::new();

    for (i, step) in program.steps().iter().enumerate() {
        match run_step(i, step, handler, settings, &env) {
            Ok(record) => {
                env.bind(&record.result.name, record.result.value.clone(), i);
                trace.steps.push(record);
            }
            Err(e) => {
                trace.failure = Some(e);
                return trace;
            }
        }
    }

    match trace.steps.last().map(|s| &s.result.value) {
        Some(Value::Bool(b)) => trace.final_label = Some(VeracityLabel::from(*b)),
        _ => {
            trace.failure = Some(ExecError {
                kind: ExecErrorKind::TypeMismatch,
                step_index: program.len().saturating_sub(1),
                detail: "final step did not produce a boolean".to_string(),
            })
        }
    }
    trace
}

fn run_step(
    i: usize,
    step: &crate::dsl::ReasoningStep,
    handler: &dyn SubTaskHandler,
    settings: &ExecSettings<'_>,
    env: &Environment,
) -> Result<StepRecord, ExecError> {
    let handler_err = |e: crate::handlers::HandlerError| ExecError {
        kind: ExecErrorKind::HandlerFailure,
        step_index: i,
        detail: e.to_string(),
    };
    let raw_argument = raw_argument(&step.argument);
    let mut record = StepRecord {
        step_index: i,
        kind: step.kind,
        target_var: step.target_var.clone(),
        raw_argument,
        substituted_argument: String::new(),
        evidence_doc_ids: Vec::new(),
        retrieved: None,
        result: Binding {
            name: step.target_var.clone(),
            value: Value::Bool(false),
            origin_step: i,
        },
        handler_anomaly: None,
    };

    match (&step.kind, &step.argument) {
        (StepKind::Predict, Argument::Logic(expr)) => {
            let value = eval_logic(expr, env).map_err(|e| ExecError::from_env(e, i))?;
            let shown = substitute_logic(expr, env).map_err(|e| ExecError::from_env(e, i))?;
            record.substituted_argument = render_expr(&shown);
            record.result.value = Value::Bool(value);
        }
        (kind, Argument::Template(t)) => {
            let text = substitute(t, env).map_err(|e| ExecError::from_env(e, i))?;
            let (docs, retrieved) = settings.evidence_for(&text);
            record.evidence_doc_ids = docs.iter().map(|d| d.doc_id.clone()).collect();
            record.retrieved = retrieved;
            record.result.value = if *kind == StepKind::Question {
                Value::Text(handler.question(&text, &docs).map_err(handler_err)?)
            } else {
                let outcome = handler.verify(&text, &docs).map_err(handler_err)?;
                record.handler_anomaly = outcome.anomaly;
                Value::Bool(outcome.value)
            };
            record.substituted_argument = text;
        }
        (kind, Argument::Logic(_)) => {
            return Err(ExecError {
                kind: ExecErrorKind::TypeMismatch,
                step_index: i,
                detail: format!("{kind} step has a logic argument"),
            })
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::handlers::{HandlerError, MockHandler, VerifyOutcome};

    const TWO_HOP_PROGRAM: &str = "def program():
    fact_1 = Verify(\"James Cameron was born in Canada.\")
    Answer_1 = Question(\"Who is the director of the film Interstellar?\")
    fact_2 = Verify(\"{Answer_1} was born in Canada.\")
    label = Predict(fact_1 and fact_2)";

    fn fixture_handler() -> MockHandler {
        MockHandler::default()
            .with_claim("James Cameron was born in Canada.", true)
            .with_question(
                "Who is the director of the film Interstellar?",
                "Christopher Nolan",
            )
            .with_claim("Christopher Nolan was born in Canada.", false)
    }

    fn claim() -> ClaimRecord {
        ClaimRecord::new(
            "c1",
            "Both James Cameron and the director of the film Interstellar were born in Canada.",
            VeracityLabel::Refuted,
        )
    }

    #[test]
    fn two_hop_example_is_refuted() {
        let program = parse_program(TWO_HOP_PROGRAM).unwrap();
        let trace = execute(
            &program,
            &fixture_handler(),
            &claim(),
            &ExecSettings::closed_book(),
        );
        assert_eq!(trace.failure, None);
        assert_eq!(trace.final_label, Some(VeracityLabel::Refuted));
        assert_eq!(trace.steps.len(), 4);
        assert_eq!(
            trace.steps[2].substituted_argument,
            "Christopher Nolan was born in Canada."
        );
        assert_eq!(
            trace.steps[2].raw_argument,
            "{Answer_1} was born in Canada."
        );
        assert_eq!(trace.steps[3].substituted_argument, "True and False");
        assert_eq!(trace.program_source, TWO_HOP_PROGRAM);
    }

    struct TimesOutOnQuestions;

    impl SubTaskHandler for TimesOutOnQuestions {
        fn question(&self, _: &str, _: &[EvidenceDoc]) -> Result<String, HandlerError> {
            Err(HandlerError::Transport {
                status: None,
                attempts: 4,
                detail: "operation timed out".into(),
            })
        }

        fn verify(&self, _: &str, _: &[EvidenceDoc]) -> Result<VerifyOutcome, HandlerError> {
            Ok(VerifyOutcome::clean(true))
        }
    }

    #[test]
    fn handler_failure_stops_execution() {
        let program = parse_program(TWO_HOP_PROGRAM).unwrap();
        let trace = execute(
            &program,
            &TimesOutOnQuestions,
            &claim(),
            &ExecSettings::closed_book(),
        );
        let failure = trace.failure.unwrap();
        assert_eq!(failure.kind, ExecErrorKind::HandlerFailure);
        assert_eq!(failure.step_index, 1);
        assert_eq!(trace.final_label, None);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn gold_docs_are_shown_to_every_step() {
        let docs = vec![
            EvidenceDoc::new(
                "d1",
                "James Cameron",
                "James Cameron was born in Kapuskasing, Ontario.",
            ),
            EvidenceDoc::new(
                "d2",
                "Interstellar",
                "Interstellar is directed by Christopher Nolan.",
            ),
        ];
        let program = parse_program(TWO_HOP_PROGRAM).unwrap();
        let settings = ExecSettings::new(EvidenceMode::Gold(&docs));
        let trace = execute(&program, &fixture_handler(), &claim(), &settings);
        for s in &trace.steps[..3] {
            assert_eq!(s.evidence_doc_ids, ["d1", "d2"]);
        }
        assert!(trace.steps[3].evidence_doc_ids.is_empty());
    }

    #[test]
    fn anomaly_is_recorded() {
        let program =
            parse_program("f = Verify(\"unknown claim\")\nlabel = Predict(not f)").unwrap();
        let trace = execute(
            &program,
            &fixture_handler(),
            &claim(),
            &ExecSettings::closed_book(),
        );
        assert_eq!(trace.final_label, Some(VeracityLabel::Supported));
        assert!(trace.steps[0].handler_anomaly.is_some());
    }

    #[test]
    fn trace_round_trips_through_json() {
        let program = parse_program(TWO_HOP_PROGRAM).unwrap();
        let trace = execute(
            &program,
            &fixture_handler(),
            &claim(),
            &ExecSettings::closed_book(),
        );
        let line = serde_json::to_string(&trace).unwrap();
        assert!(!line.contains('\n'));
        let back: ExecutionTrace = serde_json::from_str(&line).unwrap();
        assert_eq!(back, trace);
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        for key in [
            "claim_id",
            "program_source",
            "steps",
            "final_label",
            "failure",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
