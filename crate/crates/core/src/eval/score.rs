use serde::{Deserialize, Serialize};

use super::metrics::{bert_score_tokens, cosine_similarity};
use super::EvalError;
use crate::providers::EmbeddingProvider;

/// Score of one predicted rewrite against its gold rewrite.
///
/// Only `question_id`, `approach_id`, `cosine` and `bert_f1` are required,
/// which is also the score-fixture format used for aggregation-only runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub question_id: String,
    pub approach_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversation_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_history: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_rewrite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_rewrite: Option<String>,
    pub cosine: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bert_precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bert_recall: Option<f64>,
    pub bert_f1: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl QuestionScore {
    pub fn fixture(question_id: impl Into<String>, approach_id: impl Into<String>, cosine: f64, bert_f1: f64) -> Self {
        Self {
            question_id: question_id.into(),
            approach_id: approach_id.into(),
            conversation_id: None,
            turn_index: None,
            has_history: None,
            predicted_rewrite: None,
            gold_rewrite: None,
            cosine,
            bert_precision: None,
            bert_recall: None,
            bert_f1,
            degenerate: false,
        }
    }
}

/// Scores `predicted` against `gold` with one embedding provider: cosine
/// over sentence embeddings, BERT-style P/R/F1 over token embeddings.
pub fn score_question(
    gold: &str,
    predicted: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<QuestionScore, EvalError> {
    if gold.trim().is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let y = embedder.embed(gold)?;
    let y_hat = embedder.embed(predicted)?;
    let cosine = cosine_similarity(&y.vector, &y_hat.vector)?;
    let bert = bert_score_tokens(&embedder.embed_tokens(predicted)?, &embedder.embed_tokens(gold)?);
    Ok(QuestionScore {
        question_id: String::new(),
        approach_id: String::new(),
        conversation_id: None,
        turn_index: None,
        has_history: None,
        predicted_rewrite: Some(predicted.to_string()),
        gold_rewrite: Some(gold.to_string()),
        cosine: cosine.value,
        bert_precision: Some(bert.precision),
        bert_recall: Some(bert.recall),
        bert_f1: bert.f1,
        degenerate: cosine.degenerate || bert.degenerate || y_hat.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::HashEmbedder;

    #[test]
    fn identical_scores_one() {
        let s = score_question("compare orders by country", "compare orders by country", &HashEmbedder::default())
            .unwrap();
        assert!((s.cosine - 1.0).abs() < 1e-12);
        assert!((s.bert_f1 - 1.0).abs() < 1e-12);
        assert!(!s.degenerate);
    }

    #[test]
    fn empty_prediction_degenerate() {
        let s = score_question("compare orders", "", &HashEmbedder::default()).unwrap();
        assert!(s.degenerate);
        assert_eq!((s.cosine, s.bert_f1), (0.0, 0.0));
    }

    #[test]
    fn empty_gold_rejected() {
        assert!(matches!(
            score_question(" ", "x", &HashEmbedder::default()),
            Err(EvalError::EmptyGold)
        ));
    }

    #[test]
    fn fixture_json_shape() {
        let s: QuestionScore =
            serde_json::from_str(r#"{"question_id":"q1","approach_id":"query_fusion","cosine":0.8,"bert_f1":0.7}"#)
                .unwrap();
        assert_eq!(s, QuestionScore::fixture("q1", "query_fusion", 0.8, 0.7));
    }
}
