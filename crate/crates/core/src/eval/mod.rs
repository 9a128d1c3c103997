//! Scoring, evaluation runs and comparison reports.

pub mod metrics;
pub mod report;
pub mod runner;
pub mod score;

use thiserror::Error;

use crate::datasets::SchemaError;
use crate::providers::ProviderError;

pub use metrics::{bert_f1, bert_score_tokens, cosine_similarity, harmonic_mean, BertScore, MetricError, Similarity};
pub use report::{
    load_score_fixture, relative_gain, render_gains, render_table, ApproachAggregate, ConversationFailure, EvalReport,
    Metric, RelativeGain, ReportMetadata, SubsetAggregate,
};
pub use runner::{run_eval, Approach, EvalOptions};
pub use score::{score_question, QuestionScore};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset failed validation: {0}")]
    Validation(#[from] SchemaError),
    #[error("relative gain needs a positive baseline, got {baseline}")]
    NonPositiveBaseline { baseline: f64 },
    #[error("gold rewrite is empty")]
    EmptyGold,
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("unknown approach '{0}' (expected fusion, rewrite or rewrite+gate)")]
    UnknownApproach(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}
