mod common;

use std::sync::Arc;

use qfusion::engine::RewriteEngine;
use qfusion::model::{ConversationSession, HistorySource, RewriteConfig};
use qfusion::providers::{GenerativeModelProvider, RuleFusionMock};

fn replay(model: Arc<dyn GenerativeModelProvider>) -> (Vec<String>, ConversationSession) {
    let engine = RewriteEngine::new(model);
    let config = RewriteConfig::query_fusion();
    let mut session = ConversationSession::new("revenue_chat");
    let mut out = Vec::new();
    for q in common::revenue_chat_inputs() {
        let (next, outcome) = engine.advance_fusion_session(&session, &q, None, &config).unwrap();
        out.push(outcome.rewritten_query);
        session = next;
    }
    (out, session)
}

#[test]
fn rule_mock_reproduces_every_row() {
    let (got, _) = replay(Arc::new(RuleFusionMock::default()));
    assert_eq!(got, common::revenue_chat_rewrites());
}

#[test]
fn scripted_mock_agrees() {
    let (got, _) = replay(Arc::new(common::revenue_chat_script()));
    assert_eq!(got, common::revenue_chat_rewrites());
}

#[test]
fn session_chain_holds_every_rewrite() {
    let (_, session) = replay(Arc::new(RuleFusionMock::default()));
    let chain: Vec<String> = session
        .project_history(HistorySource::RewrittenQueries)
        .into_iter()
        .map(|h| h.query)
        .collect();
    assert_eq!(chain, common::revenue_chat_rewrites());
}

#[test]
fn last_step_from_previous_rewrite() {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let rewrites = common::revenue_chat_rewrites();
    let inputs = common::revenue_chat_inputs();
    let mut session = ConversationSession::new("s");
    for (i, (q, r)) in inputs.iter().zip(&rewrites).take(9).enumerate() {
        let turn = qfusion::model::Turn::new(i + 1, q.as_str()).unwrap().with_rewritten_query(r.as_str());
        session = session.push(turn).unwrap();
    }
    let outcome = engine
        .rewrite(&session, "add revenue", &RewriteConfig::query_fusion())
        .unwrap();
    assert_eq!(
        outcome.rewritten_query,
        "compare this month pageviews and revenue by top-5 marketing channels as bar"
    );
    assert_eq!(outcome.context_used.len(), 1);
    assert_eq!(
        outcome.context_used.items[0].query,
        "compare this month pageviews by top-5 marketing channels as bar"
    );
}

#[test]
fn rewrite_preset_loses_early_context() {
    // With only the last five raw inputs, "marketing channel" is out of view
    // by the tenth question.
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let config = RewriteConfig::query_rewrite().with_template("text-to-vis");
    let mut session = ConversationSession::new("s");
    let mut last = String::new();
    for q in common::revenue_chat_inputs() {
        let (next, outcome) = engine.advance_session(&session, &q, None, &config).unwrap();
        last = outcome.rewritten_query;
        session = next;
    }
    assert!(!last.contains("marketing channel"), "{last}");
    assert_ne!(last, *common::revenue_chat_rewrites().last().unwrap());
}
