//! Replays annotated conversations through the rewrite engine.

use std::str::FromStr;

use chrono::DateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ConversationFailure, EvalReport, ReportMetadata};
use super::score::{score_question, QuestionScore};
use super::EvalError;
use crate::datasets::{Conversation, Dataset, TaskType};
use crate::engine::RewriteEngine;
use crate::model::{ConversationSession, RewriteConfig};
use crate::providers::EmbeddingProvider;

/// A named rewrite configuration under evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    pub approach_id: String,
    pub config: RewriteConfig,
}

impl Approach {
    pub fn new(approach_id: impl Into<String>, config: RewriteConfig) -> Self {
        Self {
            approach_id: approach_id.into(),
            config,
        }
    }

    pub fn fusion(task: TaskType) -> Self {
        Self::new("query_fusion", RewriteConfig::query_fusion().with_template(task.template_id()))
    }

    pub fn rewrite(task: TaskType) -> Self {
        Self::new("query_rewrite", RewriteConfig::query_rewrite().with_template(task.template_id()))
    }

    pub fn gated_rewrite(task: TaskType) -> Self {
        Self::new(
            "query_rewrite+gate",
            RewriteConfig::query_rewrite()
                .with_template(task.template_id())
                .with_gate(true),
        )
    }

    /// Parses `fusion`, `rewrite`, `rewrite+gate` (or the full approach ids)
    /// with the prompt template chosen by task type.
    pub fn parse(name: &str, task: TaskType) -> Result<Self, EvalError> {
        match name.trim() {
            "fusion" | "query_fusion" => Ok(Self::fusion(task)),
            "rewrite" | "query_rewrite" => Ok(Self::rewrite(task)),
            "rewrite+gate" | "query_rewrite+gate" => Ok(Self::gated_rewrite(task)),
            other => Err(EvalError::UnknownApproach(other.to_string())),
        }
    }

    pub fn parse_list(list: &str, task: TaskType) -> Result<Vec<Self>, EvalError> {
        list.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| Self::parse(s, task))
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Worker threads for conversation fan-out; `None` uses rayon's global pool.
    pub jobs: Option<usize>,
}

struct ConversationResult {
    scores: Vec<QuestionScore>,
    failure: Option<ConversationFailure>,
}

fn replay(
    engine: &RewriteEngine,
    embedder: &dyn EmbeddingProvider,
    conversation: &Conversation,
    approach: &Approach,
) -> ConversationResult {
    let mut session = ConversationSession::with_timestamp(conversation.conversation_id.clone(), DateTime::UNIX_EPOCH);
    let mut scores = Vec::new();
    for q in &conversation.questions {
        let fail = |error: String| ConversationFailure {
            conversation_id: conversation.conversation_id.clone(),
            approach_id: approach.approach_id.clone(),
            turn_index: q.turn_index,
            error,
        };
        let (next, outcome) =
            match engine.advance_session(&session, &q.user_query, q.response.as_deref(), &approach.config) {
                Ok(step) => step,
                Err(e) => {
                    return ConversationResult {
                        scores,
                        failure: Some(fail(e.to_string())),
                    }
                }
            };
        session = next;
        let Some(gold) = q.gold_rewrite.as_deref() else {
            continue;
        };
        match score_question(gold, &outcome.rewritten_query, embedder) {
            Ok(mut s) => {
                s.question_id = q.question_id.clone();
                s.approach_id = approach.approach_id.clone();
                s.conversation_id = Some(conversation.conversation_id.clone());
                s.turn_index = Some(q.turn_index);
                s.has_history = Some(q.has_history());
                scores.push(s);
            }
            Err(e) => {
                return ConversationResult {
                    scores,
                    failure: Some(fail(e.to_string())),
                }
            }
        }
    }
    ConversationResult { scores, failure: None }
}

/// Validates `dataset`, replays every conversation under every approach and
/// scores each question that has a gold rewrite.
///
/// A failing turn aborts that conversation for that approach only; scores
/// from earlier turns are kept and the failure is recorded in the report.
/// Output order follows approach order, then dataset order.
pub fn run_eval(
    dataset: &Dataset,
    approaches: &[Approach],
    engine: &RewriteEngine,
    embedder: &dyn EmbeddingProvider,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    dataset.validate()?;
    let units: Vec<(&Approach, &Conversation)> = approaches
        .iter()
        .flat_map(|a| dataset.conversations.iter().map(move |c| (a, c)))
        .collect();
    let work = || -> Vec<ConversationResult> {
        units
            .par_iter()
            .map(|(a, c)| replay(engine, embedder, c, a))
            .collect()
    };
    let results = match options.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| EvalError::Parse {
                path: "jobs".into(),
                message: e.to_string(),
            })?
            .install(work),
        None => work(),
    };

    let mut scores = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        scores.extend(r.scores);
        failures.extend(r.failure);
    }
    let mut metadata = ReportMetadata::new(approaches.to_vec());
    metadata.model = Some(engine.model().descriptor());
    metadata.embedder = Some(embedder.descriptor());
    let ids: Vec<String> = approaches.iter().map(|a| a.approach_id.clone()).collect();
    let mut report = EvalReport::from_scores(dataset.dataset_id.clone(), &ids, scores, failures, metadata);
    report.task_type = Some(dataset.task_type);
    Ok(report)
}

impl FromStr for TaskType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "text-qa" | "qa" => Ok(TaskType::TextQa),
            "text-to-vis" | "vis" => Ok(TaskType::TextToVis),
            other => Err(format!("unknown task type '{other}' (expected text-qa or text-to-vis)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::datasets::AnnotatedQuestion;
    use crate::providers::{HashEmbedder, IdentityMock, RuleFusionMock};

    fn tiny() -> Dataset {
        Dataset::new(
            "tiny",
            TaskType::TextToVis,
            vec![Conversation::new(
                "c1",
                vec![
                    AnnotatedQuestion::new(1, "compare orders by country").with_gold("compare orders by country"),
                    AnnotatedQuestion::new(2, "show top-5 countries as bar chart")
                        .with_gold("compare orders by top-5 countries as bar"),
                    AnnotatedQuestion::new(3, "yearly"),
                ],
            )],
        )
    }

    #[test]
    fn fusion_with_rule_mock_is_exact() {
        let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
        let r = run_eval(
            &tiny(),
            &[Approach::fusion(TaskType::TextToVis)],
            &engine,
            &HashEmbedder::default(),
            &EvalOptions::default(),
        )
        .unwrap();
        let a = r.aggregate("query_fusion").unwrap();
        assert_eq!(a.all.n, 2);
        assert_eq!(a.with_history.n, 1);
        assert!((a.all.mean_cosine.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_mock_scores_below_one() {
        let engine = RewriteEngine::new(Arc::new(IdentityMock));
        let r = run_eval(
            &tiny(),
            &[Approach::rewrite(TaskType::TextToVis)],
            &engine,
            &HashEmbedder::default(),
            &EvalOptions { jobs: Some(2) },
        )
        .unwrap();
        assert!(r.aggregate("query_rewrite").unwrap().all.mean_cosine.unwrap() < 1.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!(Approach::parse("rewrite+gate", TaskType::TextQa).unwrap().approach_id, "query_rewrite+gate");
        let l = Approach::parse_list("fusion,rewrite", TaskType::TextToVis).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l[1].config.prompt_template_id, "text-to-vis");
        assert!(Approach::parse("other", TaskType::TextQa).is_err());
    }
}
