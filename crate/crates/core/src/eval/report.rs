//! Aggregation of per-question scores into comparison reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::runner::Approach;
use super::score::QuestionScore;
use super::EvalError;
use crate::datasets::TaskType;
use crate::providers::{EmbeddingDescriptor, ProviderDescriptor};

/// Percentage gain of `a` over baseline `b`: `100 (a - b) / b`.
pub fn relative_gain(a: f64, b: f64) -> Result<f64, EvalError> {
    if b <= 0.0 {
        return Err(EvalError::NonPositiveBaseline { baseline: b });
    }
    Ok(100.0 * (a - b) / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cosine,
    BertF1,
}

impl Metric {
    pub fn of(self, s: &QuestionScore) -> f64 {
        match self {
            Metric::Cosine => s.cosine,
            Metric::BertF1 => s.bert_f1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::BertF1 => "BERT F1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetAggregate {
    pub n: usize,
    pub mean_cosine: Option<f64>,
    pub mean_bert_f1: Option<f64>,
}

impl SubsetAggregate {
    fn of<'a>(scores: impl Iterator<Item = &'a QuestionScore>) -> Self {
        let (mut n, mut cos, mut f1) = (0usize, 0.0, 0.0);
        for s in scores {
            n += 1;
            cos += s.cosine;
            f1 += s.bert_f1;
        }
        let mean = |sum: f64| (n > 0).then(|| sum / n as f64);
        Self {
            n,
            mean_cosine: mean(cos),
            mean_bert_f1: mean(f1),
        }
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Cosine => self.mean_cosine,
            Metric::BertF1 => self.mean_bert_f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachAggregate {
    pub approach_id: String,
    #[serde(flatten)]
    pub all: SubsetAggregate,
    /// Restricted to questions at turn index > 1, when known.
    pub with_history: SubsetAggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeGain {
    pub approach_id: String,
    pub baseline_id: String,
    pub metric: Metric,
    /// Gain of the approach's mean over the baseline's mean.
    pub aggregate_gain_pct: f64,
    /// Mean over paired questions of the per-question gain.
    pub mean_per_question_gain_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationFailure {
    pub conversation_id: String,
    pub approach_id: String,
    pub turn_index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub approaches: Vec<Approach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ProviderDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedder: Option<EmbeddingDescriptor>,
    pub created_at: DateTime<Utc>,
}

impl ReportMetadata {
    pub fn new(approaches: Vec<Approach>) -> Self {
        Self {
            approaches,
            model: None,
            embedder: None,
            created_at: Utc::now(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_id: String,
    /// Row label for rendered tables; defaults to the dataset id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_type: Option<TaskType>,
    pub aggregates: Vec<ApproachAggregate>,
    pub gains: Vec<RelativeGain>,
    pub scores: Vec<QuestionScore>,
    #[serde(default)]
    pub failures: Vec<ConversationFailure>,
    pub metadata: ReportMetadata,
}

impl EvalReport {
    /// Builds a report from scores. `approach_ids` fixes the row order; ids
    /// seen only in `scores` are appended in first-seen order.
    pub fn from_scores(
        dataset_id: impl Into<String>,
        approach_ids: &[String],
        scores: Vec<QuestionScore>,
        failures: Vec<ConversationFailure>,
        metadata: ReportMetadata,
    ) -> Self {
        let mut order: Vec<String> = approach_ids.to_vec();
        for s in &scores {
            if !order.contains(&s.approach_id) {
                order.push(s.approach_id.clone());
            }
        }
        let aggregates: Vec<ApproachAggregate> = order
            .iter()
            .map(|id| {
                let mine = || scores.iter().filter(move |s| &s.approach_id == id);
                ApproachAggregate {
                    approach_id: id.clone(),
                    all: SubsetAggregate::of(mine()),
                    with_history: SubsetAggregate::of(mine().filter(|s| s.has_history == Some(true))),
                }
            })
            .collect();
        let gains = compute_gains(&aggregates, &scores);
        Self {
            dataset_id: dataset_id.into(),
            title: None,
            task_type: None,
            aggregates,
            gains,
            scores,
            failures,
            metadata,
        }
    }

    /// Aggregation-only report over a score fixture.
    pub fn from_fixture(dataset_id: impl Into<String>, scores: Vec<QuestionScore>) -> Self {
        Self::from_scores(dataset_id, &[], scores, Vec::new(), ReportMetadata::new(Vec::new()))
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn aggregate(&self, approach_id: &str) -> Option<&ApproachAggregate> {
        self.aggregates.iter().find(|a| a.approach_id == approach_id)
    }

    pub fn gain(&self, approach_id: &str, baseline_id: &str, metric: Metric) -> Option<&RelativeGain> {
        self.gains
            .iter()
            .find(|g| g.approach_id == approach_id && g.baseline_id == baseline_id && g.metric == metric)
    }

    pub fn label(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.dataset_id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn compute_gains(aggregates: &[ApproachAggregate], scores: &[QuestionScore]) -> Vec<RelativeGain> {
    let mut by_approach: HashMap<&str, HashMap<&str, &QuestionScore>> = HashMap::new();
    for s in scores {
        by_approach
            .entry(s.approach_id.as_str())
            .or_default()
            .insert(s.question_id.as_str(), s);
    }
    let mut gains = Vec::new();
    for a in aggregates {
        for b in aggregates {
            if a.approach_id == b.approach_id {
                continue;
            }
            for metric in [Metric::Cosine, Metric::BertF1] {
                let (Some(ma), Some(mb)) = (a.all.mean(metric), b.all.mean(metric)) else {
                    continue;
                };
                let Ok(aggregate_gain_pct) = relative_gain(ma, mb) else {
                    continue;
                };
                let mean_per_question_gain_pct = mean_paired_gain(
                    by_approach.get(a.approach_id.as_str()),
                    by_approach.get(b.approach_id.as_str()),
                    metric,
                );
                gains.push(RelativeGain {
                    approach_id: a.approach_id.clone(),
                    baseline_id: b.approach_id.clone(),
                    metric,
                    aggregate_gain_pct,
                    mean_per_question_gain_pct,
                });
            }
        }
    }
    gains
}

fn mean_paired_gain(
    a: Option<&HashMap<&str, &QuestionScore>>,
    b: Option<&HashMap<&str, &QuestionScore>>,
    metric: Metric,
) -> Option<f64> {
    let (a, b) = (a?, b?);
    let mut ids: Vec<&&str> = a.keys().collect();
    ids.sort();
    let gains: Vec<f64> = ids
        .into_iter()
        .filter_map(|id| {
            let (sa, sb) = (a.get(*id)?, b.get(*id)?);
            relative_gain(metric.of(sa), metric.of(sb)).ok()
        })
        .collect();
    (!gains.is_empty()).then(|| gains.iter().sum::<f64>() / gains.len() as f64)
}

pub fn approach_display_name(approach_id: &str) -> String {
    match approach_id {
        "query_fusion" => "Query Fusion".into(),
        "query_rewrite" => "Query Rewrite".into(),
        "query_rewrite+gate" => "Query Rewrite + Gate".into(),
        "query_fusion+gate" => "Query Fusion + Gate".into(),
        other => other.into(),
    }
}

fn fmt_mean(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

/// Task / Approach / Cosine Similarity / BERT F1 table over one or more
/// reports. The task label is printed on the first row of each report.
pub fn render_table(reports: &[EvalReport]) -> String {
    let headers = ["Task", "Approach", "Cosine Similarity", "BERT F1"];
    let mut rows: Vec<[String; 4]> = Vec::new();
    let mut group_starts = Vec::new();
    for r in reports {
        group_starts.push(rows.len());
        for (i, a) in r.aggregates.iter().enumerate() {
            rows.push([
                if i == 0 { r.label().to_string() } else { String::new() },
                approach_display_name(&a.approach_id),
                fmt_mean(a.all.mean_cosine),
                fmt_mean(a.all.mean_bert_f1),
            ]);
        }
    }
    let mut widths = headers.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 4]| {
        format!(
            "{:<w0$} | {:<w1$} | {:>w2$} | {:>w3$}\n",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3]
        )
    };
    let rule = format!(
        "{}-+-{}-+-{}-+-{}\n",
        "-".repeat(widths[0]),
        "-".repeat(widths[1]),
        "-".repeat(widths[2]),
        "-".repeat(widths[3])
    );
    let mut out = line(headers);
    out.push_str(&rule);
    for (i, row) in rows.iter().enumerate() {
        if i > 0 && group_starts.contains(&i) {
            out.push_str(&rule);
        }
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}

/// One line per compared pair and metric, stated as the better approach's
/// gain over the other.
pub fn render_gains(report: &EvalReport) -> String {
    let mut out = String::new();
    let position = |id: &str| report.aggregates.iter().position(|a| a.approach_id == id);
    for g in &report.gains {
        let tie_mirror = g.aggregate_gain_pct == 0.0 && position(&g.approach_id) > position(&g.baseline_id);
        if g.aggregate_gain_pct < 0.0 || tie_mirror {
            continue;
        }
        let _ = write!(
            out,
            "{}: {} over {} ({}): {:+.1}%",
            report.label(),
            approach_display_name(&g.approach_id),
            approach_display_name(&g.baseline_id),
            g.metric.label(),
            g.aggregate_gain_pct
        );
        if let Some(pq) = g.mean_per_question_gain_pct {
            let _ = write!(out, " (per-question mean {pq:+.1}%)");
        }
        out.push('\n');
    }
    out
}

/// Reads a score fixture: a JSON array of question scores.
pub fn load_score_fixture(path: impl AsRef<Path>) -> Result<Vec<QuestionScore>, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| EvalError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
