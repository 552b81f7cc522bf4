//! Datasets, end-to-end runs, metrics and error analysis.

mod baseline;
mod config;
mod dataset;
mod metrics;
mod runner;
mod taxonomy;

pub use baseline::{
    baseline_template, build_baseline_prompt, extract_final_answer, run_baseline, BaselineAnswer,
};
pub use config::{ConfigError, MockConfig, PromptStyle, RetrievalConfig, RunConfig};
pub use dataset::{
    load_dataset, map_label, parse_dataset, ClaimRecord, DatasetError, DatasetFormat, LoadedDataset,
};
pub use metrics::{accuracy, macro_f1, ClassScores, MacroF1, MetricsError};
pub use runner::{
    compute_metrics, read_predictions, read_traces, run_pipeline, write_metrics, ClaimOutput,
    HopMetrics, Pipeline, PredictionRecord, RunError, RunMetrics, RunReport, TraceLine,
    CONFIG_FILE, METRICS_FILE, PREDICTIONS_FILE, TRACES_FILE,
};
pub use taxonomy::{
    classify_errors, ErrorAnnotation, ErrorCategory, ErrorRow, ErrorTable, TaxonomyError,
};
