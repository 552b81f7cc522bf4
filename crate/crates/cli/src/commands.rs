use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use progfc::dsl::parse_program;
use progfc::engine::{aggregate, execute, EvidenceMode, ExecSettings, ExecutionTrace};
use progfc::eval::{
    classify_errors, compute_metrics, load_dataset, read_predictions, read_traces, run_pipeline,
    write_metrics, ClaimRecord, DatasetFormat, ErrorAnnotation, Pipeline, PredictionRecord,
    PromptStyle, RunConfig, TraceLine,
};
use progfc::generation::{generate_programs, ExemplarSet, ExemplarSetName, SampleRecord};
use progfc::handlers::{
    CannedCompletionClient, CompletionClient, HttpCompletionClient, LmHandler, MockFixture,
    MockHandler, ScriptedGenerator, SubTaskHandler,
};
use progfc::retrieval::{
    iterative_retrieve, recall_at_k, Bm25Index, Bm25Params, CorpusReader, EvidenceDoc,
};
use progfc::EvidenceSetting;
use serde::{Deserialize, Serialize};

use crate::{Command, RetrievalMode};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Index { corpus, out, k1, b } => index(&corpus, &out, Bm25Params { k1, b }),
        Command::Generate {
            dataset,
            format,
            exemplars,
            n,
            out,
            config,
            mock_generator,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(e) = exemplars {
                cfg.exemplars = e;
            }
            if let Some(n) = n {
                cfg.generation.num_programs = n;
            }
            if mock_generator.is_some() {
                cfg.mock.generator_script = mock_generator;
            }
            generate(&cfg, &load_records(&dataset, &format)?, &out)
        }
        Command::Execute {
            programs,
            dataset,
            format,
            setting,
            index,
            config,
            mock_handler,
            traces,
            predictions,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = setting {
                cfg.setting = s.parse().map_err(anyhow::Error::msg)?;
            }
            if index.is_some() {
                cfg.retrieval.index = index;
            }
            if mock_handler.is_some() {
                cfg.mock.handler_fixture = mock_handler;
            }
            execute_programs(
                &cfg,
                &load_records(&dataset, &format)?,
                &programs,
                &traces,
                &predictions,
            )
        }
        Command::Run {
            config,
            dataset,
            prompt_style,
            output_dir,
        } => {
            let mut cfg = RunConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(style) = prompt_style {
                cfg.prompt_style = style.parse().map_err(anyhow::Error::msg)?;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            run(&cfg, &dataset)
        }
        Command::Eval { predictions, out } => eval(&predictions, out.as_deref()),
        Command::RetrieveEval {
            index,
            dataset,
            format,
            k,
            mode,
            traces,
        } => retrieve_eval(
            &index,
            &load_records(&dataset, &format)?,
            k,
            mode,
            traces.as_deref(),
        ),
        Command::Errors {
            predictions,
            traces,
            annotations,
            json,
        } => errors(&predictions, &traces, annotations.as_deref(), json),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn load_records(path: &Path, format: &str) -> Result<Vec<ClaimRecord>> {
    let format: DatasetFormat = format.parse()?;
    let loaded =
        load_dataset(path, format).with_context(|| format!("reading {}", path.display()))?;
    if loaded.skipped() > 0 {
        eprintln!(
            "skipped {} record(s) with labels {:?}",
            loaded.skipped(),
            loaded.skipped_labels
        );
    }
    Ok(loaded.records)
}

fn load_exemplars(name: &str) -> Result<ExemplarSet> {
    match name.parse::<ExemplarSetName>() {
        Ok(name) => Ok(ExemplarSet::bundled(name)),
        Err(_) => Ok(ExemplarSet::load(Path::new(name))
            .with_context(|| format!("reading exemplars {name}"))?),
    }
}

fn load_index(path: Option<&Path>) -> Result<Option<Bm25Index>> {
    path.map(|p| Bm25Index::load(p).with_context(|| format!("reading index {}", p.display())))
        .transpose()
}

fn build_generator(cfg: &RunConfig) -> Result<Box<dyn CompletionClient>> {
    Ok(match &cfg.mock.generator_script {
        Some(p) => Box::new(ScriptedGenerator::load(p)?.with_seed(cfg.seed)),
        None => Box::new(HttpCompletionClient::new(cfg.generator_endpoint().clone())?),
    })
}

fn build_handler(cfg: &RunConfig) -> Result<Box<dyn SubTaskHandler>> {
    Ok(match &cfg.mock.handler_fixture {
        Some(p) => Box::new(MockHandler::new(MockFixture::load(p)?)),
        None => Box::new(LmHandler::with_params(
            HttpCompletionClient::new(cfg.endpoint.clone())?,
            cfg.setting,
            cfg.subtask.clone(),
        )),
    })
}

fn build_baseline_client(cfg: &RunConfig) -> Result<Box<dyn CompletionClient>> {
    Ok(match &cfg.mock.completions {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut map: HashMap<String, String> = serde_json::from_str(&text)?;
            let default = map.remove("*");
            let client = CannedCompletionClient::new(map);
            Box::new(match default {
                Some(d) => client.with_default(&d),
                None => client,
            })
        }
        None => Box::new(HttpCompletionClient::new(cfg.endpoint.clone())?),
    })
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn index(corpus: &Path, out: &Path, params: Bm25Params) -> Result<()> {
    let reader = BufReader::new(
        File::open(corpus).with_context(|| format!("opening {}", corpus.display()))?,
    );
    let index = Bm25Index::ingest(CorpusReader::new(reader), params)?;
    index.save(out)?;
    println!(
        "indexed {} documents, {} terms, avg length {:.2}",
        index.doc_count(),
        index.vocabulary_size(),
        index.avg_doc_length()
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProgramsLine {
    claim_id: String,
    samples: Vec<SampleRecord>,
}

fn generate(cfg: &RunConfig, records: &[ClaimRecord], out: &Path) -> Result<()> {
    let set = load_exemplars(&cfg.exemplars)?;
    let generator = build_generator(cfg)?;
    let mut parsed = 0;
    let mut total = 0;
    let lines: Vec<ProgramsLine> = records
        .iter()
        .map(|r| {
            let samples: Vec<SampleRecord> =
                generate_programs(&cfg.generation, &*generator, &set, &r.text)
                    .iter()
                    .map(|s| s.record())
                    .collect();
            total += samples.len();
            parsed += samples.iter().filter(|s| s.parse_ok).count();
            ProgramsLine {
                claim_id: r.claim_id.clone(),
                samples,
            }
        })
        .collect();
    write_lines(out, &lines)?;
    println!("{parsed}/{total} sampled programs parsed");
    Ok(())
}

fn execute_programs(
    cfg: &RunConfig,
    records: &[ClaimRecord],
    programs: &Path,
    traces_out: &Path,
    predictions_out: &Path,
) -> Result<()> {
    let reader = BufReader::new(
        File::open(programs).with_context(|| format!("opening {}", programs.display()))?,
    );
    let mut by_claim: HashMap<String, Vec<SampleRecord>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: ProgramsLine =
            serde_json::from_str(&line).with_context(|| format!("programs line {}", i + 1))?;
        by_claim.insert(p.claim_id, p.samples);
    }
    let index = load_index(cfg.retrieval.index.as_deref())?;
    if cfg.setting == EvidenceSetting::OpenBook && index.is_none() {
        bail!("open_book execution needs --index");
    }
    let handler = build_handler(cfg)?;

    let mut traces = Vec::new();
    let mut predictions = Vec::new();
    for claim in records {
        let Some(samples) = by_claim.get(&claim.claim_id) else {
            eprintln!("no programs for claim {}", claim.claim_id);
            continue;
        };
        let gold: Vec<EvidenceDoc> = if claim.evidence_docs.is_empty() {
            index
                .as_ref()
                .map(|idx| {
                    claim
                        .gold_evidence_ids
                        .iter()
                        .filter_map(|id| idx.doc_by_id(id).cloned())
                        .collect()
                })
                .unwrap_or_default()
        } else {
            claim.evidence_docs.clone()
        };
        let evidence = match (cfg.setting, &index) {
            (EvidenceSetting::Gold, _) => EvidenceMode::Gold(&gold),
            (EvidenceSetting::OpenBook, Some(idx)) => EvidenceMode::OpenBook(idx),
            _ => EvidenceMode::ClosedBook,
        };
        let settings = ExecSettings {
            evidence,
            per_step_k: cfg.retrieval.per_step_k,
            evidence_budget: cfg.retrieval.evidence_budget,
        };
        let mut verdicts = Vec::new();
        for (i, sample) in samples.iter().enumerate() {
            let outcome = sample.outcome();
            let line = match outcome.program() {
                Some(program) => TraceLine {
                    sample_index: i,
                    trace: execute(program, &*handler, claim, &settings),
                    diagnostics: Vec::new(),
                    generation_error: None,
                },
                None => TraceLine {
                    sample_index: i,
                    trace: ExecutionTrace {
                        claim_id: claim.claim_id.clone(),
                        program_source: sample.text.clone(),
                        steps: Vec::new(),
                        final_label: None,
                        failure: None,
                    },
                    diagnostics: outcome.diagnostics().to_vec(),
                    generation_error: sample.error.clone(),
                },
            };
            verdicts.push(line.trace.final_label);
            traces.push(line);
        }
        let agg = aggregate(&verdicts, claim, cfg.fallback, &*handler, &settings);
        predictions.push(PredictionRecord {
            claim_id: claim.claim_id.clone(),
            predicted_label: agg.label,
            gold_label: claim.gold_label,
            hops: claim.hops,
            decided_by: serde_json::to_value(agg.decided_by)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            supported_votes: agg.supported_votes,
            refuted_votes: agg.refuted_votes,
            failed_programs: agg.failed_programs,
            anomaly: agg.fallback_anomaly,
            error: None,
        });
    }
    write_lines(traces_out, &traces)?;
    write_lines(predictions_out, &predictions)?;
    println!(
        "executed {} program(s) for {} claim(s)",
        traces.len(),
        predictions.len()
    );
    Ok(())
}

fn run(cfg: &RunConfig, dataset: &Path) -> Result<()> {
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let loaded = load_dataset(dataset, cfg.dataset_format)
        .with_context(|| format!("reading {}", dataset.display()))?;
    if loaded.skipped() > 0 {
        eprintln!(
            "skipped {} record(s) with labels {:?}",
            loaded.skipped(),
            loaded.skipped_labels
        );
    }
    cfg.validate_dataset(&loaded.records)?;

    let index = match cfg.setting {
        EvidenceSetting::ClosedBook => None,
        _ => load_index(cfg.retrieval.index.as_deref())?,
    };
    let exemplars = load_exemplars(&cfg.exemplars)?;
    let baseline = cfg.prompt_style != PromptStyle::Program;
    let generator: Box<dyn CompletionClient> = if baseline {
        Box::new(CannedCompletionClient::default())
    } else {
        build_generator(cfg)?
    };
    let handler: Box<dyn SubTaskHandler> = if baseline {
        Box::new(MockHandler::default())
    } else {
        build_handler(cfg)?
    };
    let baseline_client = if baseline {
        Some(build_baseline_client(cfg)?)
    } else {
        None
    };

    let pipeline = Pipeline {
        config: cfg,
        generator: &*generator,
        handler: &*handler,
        baseline_client: baseline_client.as_deref(),
        exemplars: &exemplars,
        index: index.as_ref(),
    };
    let report = run_pipeline(&pipeline, &loaded.records, &cfg.run_dir())?;
    println!("run directory: {}", report.run_dir.display());
    println!(
        "claims: {} new, {} already done",
        report.processed, report.resumed
    );
    println!("macro-F1: {:.4}", report.metrics.f1.macro_f1);
    for (hop, m) in &report.metrics.per_hop {
        println!("  {hop}: {:.4} ({} claims)", m.macro_f1, m.claims);
    }
    Ok(())
}

fn eval(predictions: &Path, out: Option<&Path>) -> Result<()> {
    let preds = read_predictions(predictions)
        .with_context(|| format!("reading {}", predictions.display()))?;
    let metrics = compute_metrics(&preds)?;
    match out {
        Some(p) => write_metrics(p, &metrics)?,
        None => println!("{}", serde_json::to_string_pretty(&metrics)?),
    }
    if !metrics.f1.absent_classes.is_empty() {
        eprintln!(
            "warning: classes absent from predictions and golds: {:?}",
            metrics.f1.absent_classes
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct RecallReport {
    mode: &'static str,
    k: usize,
    claims: usize,
    recall: f64,
    per_hop: std::collections::BTreeMap<String, (usize, f64)>,
    skipped: usize,
}

fn retrieve_eval(
    index_path: &Path,
    records: &[ClaimRecord],
    k: usize,
    mode: RetrievalMode,
    traces: Option<&Path>,
) -> Result<()> {
    let index = Bm25Index::load(index_path)
        .with_context(|| format!("reading index {}", index_path.display()))?;
    let traces: HashMap<String, TraceLine> = match (mode, traces) {
        (RetrievalMode::Onestep, _) => HashMap::new(),
        (RetrievalMode::Iterative, None) => bail!("iterative mode needs --traces"),
        (RetrievalMode::Iterative, Some(p)) => {
            let mut first: HashMap<String, TraceLine> = HashMap::new();
            for t in read_traces(p).with_context(|| format!("reading {}", p.display()))? {
                if parse_program(&t.trace.program_source).is_err() {
                    continue;
                }
                let keep = first
                    .get(&t.trace.claim_id)
                    .is_none_or(|cur| t.sample_index < cur.sample_index);
                if keep {
                    first.insert(t.trace.claim_id.clone(), t);
                }
            }
            first
        }
    };

    let mut per_hop: std::collections::BTreeMap<String, (usize, f64)> = Default::default();
    let mut sum = 0.0;
    let mut n = 0;
    let mut skipped = 0;
    for claim in records {
        let result = match mode {
            RetrievalMode::Onestep => index.retrieve(&claim.text, k),
            RetrievalMode::Iterative => match traces.get(&claim.claim_id) {
                Some(t) => {
                    let program = parse_program(&t.trace.program_source).expect("filtered above");
                    iterative_retrieve(&program, &t.trace.bindings(), &index, k)
                        .combined
                        .truncated(k)
                }
                None => {
                    skipped += 1;
                    continue;
                }
            },
        };
        let Some(r) = recall_at_k(&result, &claim.gold_evidence_ids, k) else {
            skipped += 1;
            continue;
        };
        sum += r;
        n += 1;
        if let Some(h) = claim.hops {
            let e = per_hop.entry(format!("{h}-hop")).or_default();
            e.0 += 1;
            e.1 += r;
        }
    }
    for v in per_hop.values_mut() {
        v.1 /= v.0 as f64;
    }
    let report = RecallReport {
        mode: match mode {
            RetrievalMode::Onestep => "onestep",
            RetrievalMode::Iterative => "iterative",
        },
        k,
        claims: n,
        recall: if n == 0 { 0.0 } else { sum / n as f64 },
        per_hop,
        skipped,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn errors(predictions: &Path, traces: &Path, annotations: Option<&Path>, json: bool) -> Result<()> {
    let preds = read_predictions(predictions)?;
    let traces = read_traces(traces)?;
    let annotations: Vec<ErrorAnnotation> = match annotations {
        Some(p) => fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).with_context(|| format!("annotation line {}", i + 1))
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let table = classify_errors(&preds, &traces, &annotations)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&table)?);
    } else {
        print!("{table}");
    }
    let wrong = preds
        .iter()
        .filter(|p| p.predicted_label != p.gold_label)
        .count();
    if wrong == 0 {
        eprintln!("no incorrect predictions");
    }
    Ok(())
}
