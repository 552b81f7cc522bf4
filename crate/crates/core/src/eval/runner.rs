//! End-to-end dataset runs with resumable JSONL output.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::run_baseline;
use super::config::{PromptStyle, RunConfig};
use super::dataset::ClaimRecord;
use super::metrics::{accuracy, macro_f1, MacroF1, MetricsError};
use crate::dsl::ParseDiagnostic;
use crate::engine::{
    aggregate, execute, EvidenceMode, ExecSettings, ExecutionTrace, VeracityLabel,
};
use crate::generation::{generate_programs, ExemplarSet, SampleOutcome};
use crate::handlers::{CompletionClient, SubTaskHandler};
use crate::retrieval::{Bm25Index, EvidenceDoc};
use crate::EvidenceSetting;

pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const TRACES_FILE: &str = "traces.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub claim_id: String,
    pub predicted_label: VeracityLabel,
    pub gold_label: VeracityLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<u32>,
    /// `majority`, `fallback_tie`, `fallback_no_valid_programs` or
    /// `prompt_baseline`.
    pub decided_by: String,
    pub supported_votes: usize,
    pub refuted_votes: usize,
    pub failed_programs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One line of `traces.jsonl`: a sampled program and its execution.
///
/// A sample that never ran has no steps, no label and no failure; it carries
/// `diagnostics` (did not parse) or `generation_error` (was never produced)
/// instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub sample_index: usize,
    #[serde(flatten)]
    pub trace: ExecutionTrace,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ParseDiagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopMetrics {
    pub claims: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub claims: usize,
    pub accuracy: f64,
    #[serde(flatten)]
    pub f1: MacroF1,
    pub per_hop: BTreeMap<String, HopMetrics>,
    pub decided_by: BTreeMap<String, usize>,
    pub failed_programs: usize,
    pub claims_with_errors: usize,
}

pub fn compute_metrics(predictions: &[PredictionRecord]) -> Result<RunMetrics, MetricsError> {
    let preds: Vec<_> = predictions.iter().map(|p| p.predicted_label).collect();
    let golds: Vec<_> = predictions.iter().map(|p| p.gold_label).collect();
    let f1 = macro_f1(&preds, &golds)?;

    let mut by_hop: BTreeMap<u32, (Vec<VeracityLabel>, Vec<VeracityLabel>)> = BTreeMap::new();
    let mut decided_by = BTreeMap::new();
    for p in predictions {
        if let Some(h) = p.hops {
            let e = by_hop.entry(h).or_default();
            e.0.push(p.predicted_label);
            e.1.push(p.gold_label);
        }
        *decided_by.entry(p.decided_by.clone()).or_insert(0) += 1;
    }
    let mut per_hop = BTreeMap::new();
    for (hop, (p, g)) in by_hop {
        per_hop.insert(
            format!("{hop}-hop"),
            HopMetrics {
                claims: p.len(),
                accuracy: accuracy(&p, &g),
                macro_f1: macro_f1(&p, &g)?.macro_f1,
            },
        );
    }
    Ok(RunMetrics {
        claims: predictions.len(),
        accuracy: accuracy(&preds, &golds),
        f1,
        per_hop,
        decided_by,
        failed_programs: predictions.iter().map(|p| p.failed_programs).sum(),
        claims_with_errors: predictions.iter().filter(|p| p.error.is_some()).count(),
    })
}

/// Everything a run needs besides the dataset.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub config: &'a RunConfig,
    pub generator: &'a dyn CompletionClient,
    pub handler: &'a dyn SubTaskHandler,
    /// Client for prompt-style baselines.
    pub baseline_client: Option<&'a dyn CompletionClient>,
    pub exemplars: &'a ExemplarSet,
    pub index: Option<&'a Bm25Index>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub run_dir: PathBuf,
    pub processed: usize,
    pub resumed: usize,
    pub metrics: RunMetrics,
}

/// Output of one claim.
pub struct ClaimOutput {
    pub prediction: PredictionRecord,
    pub traces: Vec<TraceLine>,
}

impl Pipeline<'_> {
    fn gold_docs(&self, claim: &ClaimRecord) -> (Vec<EvidenceDoc>, Option<String>) {
        if !claim.evidence_docs.is_empty() {
            return (claim.evidence_docs.clone(), None);
        }
        let Some(index) = self.index else {
            return (
                Vec::new(),
                Some("gold evidence ids given but no index to look them up".into()),
            );
        };
        let docs: Vec<EvidenceDoc> = claim
            .gold_evidence_ids
            .iter()
            .filter_map(|id| index.doc_by_id(id).cloned())
            .collect();
        let missing = claim.gold_evidence_ids.len() - docs.len();
        let note =
            (missing > 0).then(|| format!("{missing} gold evidence doc(s) not found in the index"));
        (docs, note)
    }

    pub fn process_claim(&self, claim: &ClaimRecord) -> ClaimOutput {
        let mut prediction = PredictionRecord {
            claim_id: claim.claim_id.clone(),
            predicted_label: VeracityLabel::Refuted,
            gold_label: claim.gold_label,
            hops: claim.hops,
            decided_by: String::new(),
            supported_votes: 0,
            refuted_votes: 0,
            failed_programs: 0,
            anomaly: None,
            error: None,
        };

        if self.config.prompt_style != PromptStyle::Program {
            prediction.decided_by = "prompt_baseline".to_string();
            match self.baseline_client {
                Some(client) => match run_baseline(self.config.prompt_style, client, &claim.text) {
                    Ok(answer) => {
                        prediction.predicted_label = answer.label;
                        prediction.anomaly = answer.anomaly;
                    }
                    Err(e) => prediction.error = Some(e.to_string()),
                },
                None => prediction.error = Some("no client for prompt baseline".to_string()),
            }
            return ClaimOutput {
                prediction,
                traces: Vec::new(),
            };
        }

        let gold;
        let evidence = match self.config.setting {
            EvidenceSetting::ClosedBook => EvidenceMode::ClosedBook,
            EvidenceSetting::OpenBook => match self.index {
                Some(index) => EvidenceMode::OpenBook(index),
                None => {
                    prediction.error = Some("open_book run without an index".to_string());
                    EvidenceMode::ClosedBook
                }
            },
            EvidenceSetting::Gold => {
                let (docs, note) = self.gold_docs(claim);
                gold = docs;
                prediction.error = note;
                EvidenceMode::Gold(&gold)
            }
        };
        let settings = ExecSettings {
            evidence,
            per_step_k: self.config.retrieval.per_step_k,
            evidence_budget: self.config.retrieval.evidence_budget,
        };

        let samples = generate_programs(
            &self.config.generation,
            self.generator,
            self.exemplars,
            &claim.text,
        );
        let traces: Vec<TraceLine> = samples
            .iter()
            .enumerate()
            .map(|(i, sample)| {
                let unexecuted = |source: &str| ExecutionTrace {
                    claim_id: claim.claim_id.clone(),
                    program_source: source.to_string(),
                    steps: Vec::new(),
                    final_label: None,
                    failure: None,
                };
                match sample {
                    SampleOutcome::Parsed { program, .. } => TraceLine {
                        sample_index: i,
                        trace: execute(program, self.handler, claim, &settings),
                        diagnostics: Vec::new(),
                        generation_error: None,
                    },
                    SampleOutcome::Invalid { text, diagnostics } => TraceLine {
                        sample_index: i,
                        trace: unexecuted(text),
                        diagnostics: diagnostics.clone(),
                        generation_error: None,
                    },
                    SampleOutcome::Failed(e) => TraceLine {
                        sample_index: i,
                        trace: unexecuted(""),
                        diagnostics: Vec::new(),
                        generation_error: Some(e.to_string()),
                    },
                }
            })
            .collect();

        let verdicts: Vec<Option<VeracityLabel>> =
            traces.iter().map(|t| t.trace.final_label).collect();
        let agg = aggregate(
            &verdicts,
            claim,
            self.config.fallback,
            self.handler,
            &settings,
        );
        prediction.predicted_label = agg.label;
        prediction.decided_by = serde_json::to_value(agg.decided_by)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        prediction.supported_votes = agg.supported_votes;
        prediction.refuted_votes = agg.refuted_votes;
        prediction.failed_programs = agg.failed_programs;
        prediction.anomaly = agg.fallback_anomaly;
        ClaimOutput { prediction, traces }
    }
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> std::io::Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map_while(|l| serde_json::from_str(l).ok())
        .collect())
}

fn write_jsonl<T: Serialize>(out: &mut impl Write, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_predictions(path: &Path) -> std::io::Result<Vec<PredictionRecord>> {
    read_jsonl(path)
}

pub fn read_traces(path: &Path) -> std::io::Result<Vec<TraceLine>> {
    read_jsonl(path)
}

/// Drops incomplete output from an interrupted run and returns the claims
/// already predicted.
fn prepare_resume(dir: &Path) -> Result<Vec<PredictionRecord>, RunError> {
    let predictions = read_predictions(&dir.join(PREDICTIONS_FILE))?;
    let done: HashSet<&str> = predictions.iter().map(|p| p.claim_id.as_str()).collect();
    let traces: Vec<TraceLine> = read_traces(&dir.join(TRACES_FILE))?
        .into_iter()
        .filter(|t| done.contains(t.trace.claim_id.as_str()))
        .collect();
    let mut p = BufWriter::new(File::create(dir.join(PREDICTIONS_FILE))?);
    write_jsonl(&mut p, &predictions)?;
    p.flush()?;
    let mut t = BufWriter::new(File::create(dir.join(TRACES_FILE))?);
    write_jsonl(&mut t, &traces)?;
    t.flush()?;
    Ok(predictions)
}

/// Runs every claim not yet in `dir/predictions.jsonl`, appending traces and
/// predictions in dataset order, then rewrites `metrics.json`.
pub fn run_pipeline(
    pipeline: &Pipeline<'_>,
    dataset: &[ClaimRecord],
    dir: &Path,
) -> Result<RunReport, RunError> {
    fs::create_dir_all(dir)?;
    let config_text =
        toml::to_string(pipeline.config).map_err(|e| RunError::Setup(e.to_string()))?;
    fs::write(dir.join(CONFIG_FILE), config_text)?;

    let existing = prepare_resume(dir)?;
    let done: HashSet<String> = existing.iter().map(|p| p.claim_id.clone()).collect();
    let todo: Vec<&ClaimRecord> = dataset
        .iter()
        .filter(|c| !done.contains(&c.claim_id))
        .collect();

    let serial = !pipeline.handler.concurrent_safe() || !pipeline.generator.concurrent_safe();
    let workers = if serial {
        1
    } else {
        pipeline.config.workers.max(1)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Setup(e.to_string()))?;

    let open = |name: &str| -> std::io::Result<BufWriter<File>> {
        Ok(BufWriter::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join(name))?,
        ))
    };
    let mut predictions_out = open(PREDICTIONS_FILE)?;
    let mut traces_out = open(TRACES_FILE)?;

    for chunk in todo.chunks(workers * 4) {
        let outputs: Vec<ClaimOutput> = pool.install(|| {
            chunk
                .par_iter()
                .map(|c| pipeline.process_claim(c))
                .collect()
        });
        for out in &outputs {
            write_jsonl(&mut traces_out, &out.traces)?;
        }
        traces_out.flush()?;
        for out in &outputs {
            log::info!(
                "{}: {}",
                out.prediction.claim_id,
                out.prediction.predicted_label
            );
            write_jsonl(&mut predictions_out, std::slice::from_ref(&out.prediction))?;
        }
        predictions_out.flush()?;
    }

    let all = read_predictions(&dir.join(PREDICTIONS_FILE))?;
    let by_id: BTreeMap<&str, &PredictionRecord> =
        all.iter().map(|p| (p.claim_id.as_str(), p)).collect();
    let ordered: Vec<PredictionRecord> = dataset
        .iter()
        .filter_map(|c| by_id.get(c.claim_id.as_str()).map(|p| (*p).clone()))
        .collect();
    let metrics = compute_metrics(&ordered)?;
    write_metrics(&dir.join(METRICS_FILE), &metrics)?;

    Ok(RunReport {
        run_dir: dir.to_path_buf(),
        processed: todo.len(),
        resumed: dataset.len() - todo.len(),
        metrics,
    })
}

pub fn write_metrics(path: &Path, metrics: &RunMetrics) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(metrics)?;
    text.push('\n');
    fs::write(path, text)
}
