use std::sync::Arc;

use proptest::prelude::*;
use qfusion::engine::{
    build_context, classify_needs_rewrite, FixedGate, GateDecision, GateTag, HeuristicGate, RewriteEngine,
};
use qfusion::model::{
    Context, ConversationSession, HistoryEntry, HistorySource, RewriteConfig, Turn, WindowBound,
};
use qfusion::providers::{IdentityMock, RuleFusionMock};

fn session_with(n: usize, responses: bool) -> ConversationSession {
    let mut s = ConversationSession::new("p");
    for i in 1..=n {
        let mut t = Turn::new(i, format!("raw{i}x")).unwrap().with_rewritten_query(format!("fused{i}x"));
        if responses {
            t = t.with_response(format!("answer{i}x"));
        }
        s = s.push(t).unwrap();
    }
    s
}

fn history(n: usize) -> Vec<HistoryEntry> {
    (1..=n).map(|i| HistoryEntry::new(i, format!("q{i}"), None)).collect()
}

proptest! {
    #[test]
    fn window_is_trailing_slice(t in 0usize..60, k in 0usize..12, literal in any::<bool>()) {
        let bound = if literal { WindowBound::AlgorithmLiteral } else { WindowBound::LastK };
        let ctx = build_context(&history(t), k, false, bound);
        let expected = if literal { (k + 1).min(t) } else { k.min(t) };
        prop_assert_eq!(ctx.len(), expected);
        let want: Vec<usize> = (t - expected + 1..=t).collect();
        prop_assert_eq!(&ctx.source_indices, &want);
        for (item, idx) in ctx.items.iter().zip(&ctx.source_indices) {
            prop_assert_eq!(&item.query, &format!("q{idx}"));
        }
    }

    #[test]
    fn fusion_prompt_sees_only_previous_rewrite(n in 1usize..15) {
        let engine = RewriteEngine::new(Arc::new(IdentityMock));
        let session = session_with(n, true);
        let out = engine.rewrite(&session, "currentq", &RewriteConfig::query_fusion()).unwrap();
        let prompt = out.prompt.unwrap();
        let last = format!("fused{n}x");
        prop_assert!(prompt.contains(&last));
        prop_assert!(prompt.contains("currentq"));
        for i in 1..=n {
            let (raw, answer, fused) = (format!("raw{i}x"), format!("answer{i}x"), format!("fused{i}x"));
            prop_assert!(!prompt.contains(&raw));
            prop_assert!(!prompt.contains(&answer));
            prop_assert!(i == n || !prompt.contains(&fused));
        }
    }

    #[test]
    fn rewrite_prompt_sees_last_five_pairs(n in 0usize..15) {
        let engine = RewriteEngine::new(Arc::new(IdentityMock));
        let session = session_with(n, true);
        let out = engine.rewrite(&session, "currentq", &RewriteConfig::query_rewrite()).unwrap();
        let prompt = out.prompt.unwrap();
        prop_assert_eq!(out.context_used.len(), n.min(5));
        for i in 1..=n {
            let visible = i + 5 > n;
            let (raw, answer, fused) = (format!("raw{i}x"), format!("answer{i}x"), format!("fused{i}x"));
            prop_assert_eq!(prompt.contains(&raw), visible);
            prop_assert_eq!(prompt.contains(&answer), visible);
            prop_assert!(!prompt.contains(&fused));
        }
    }

    #[test]
    fn forced_self_contained_gate_is_identity(query in "\\PC*[a-z]\\PC*", n in 1usize..6) {
        let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()))
            .with_gate(Arc::new(FixedGate(GateDecision::self_contained(0.9))));
        let config = RewriteConfig::query_rewrite().with_gate(true);
        let out = engine.rewrite(&session_with(n, false), &query, &config).unwrap();
        prop_assert!(out.was_gated);
        prop_assert_eq!(out.rewritten_query.as_bytes(), query.as_bytes());
        prop_assert!(out.prompt.is_none());
    }

    #[test]
    fn empty_history_never_needs_rewrite(query in "\\PC{0,40}") {
        let d = classify_needs_rewrite(&query, &Context::empty(), &HeuristicGate::default()).unwrap();
        prop_assert!(!d.needs_rewrite);
        prop_assert_eq!(d.rationale_tag, GateTag::EmptyHistory);
    }

    #[test]
    fn rewrite_is_deterministic(n in 0usize..8, query in "[a-z]{1,8}( [a-z]{1,8}){0,4}") {
        let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
        let session = session_with(n, true);
        for config in [RewriteConfig::query_fusion(), RewriteConfig::query_rewrite()] {
            let a = engine.rewrite(&session, &query, &config).unwrap();
            let b = engine.rewrite(&session, &query, &config).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn session_json_round_trip(n in 0usize..12, responses in any::<bool>()) {
        let s = session_with(n, responses);
        let json = serde_json::to_string(&s).unwrap();
        let back: ConversationSession = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn history_projection_sizes(n in 0usize..12, missing in proptest::collection::vec(any::<bool>(), 12)) {
        let mut s = ConversationSession::new("p");
        for i in 1..=n {
            let mut t = Turn::new(i, format!("q{i}")).unwrap();
            if !missing[i - 1] {
                t = t.with_rewritten_query(format!("r{i}"));
            }
            s = s.push(t).unwrap();
        }
        prop_assert_eq!(s.project_history(HistorySource::RawInputs).len(), n);
        let present = (1..=n).filter(|i| !missing[i - 1]).count();
        prop_assert_eq!(s.project_history(HistorySource::RewrittenQueries).len(), present);
    }
}

#[test]
fn presets_validate() {
    RewriteConfig::query_rewrite().validate().unwrap();
    RewriteConfig::query_fusion().validate().unwrap();
}

#[test]
fn first_question_passes_gate() {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let config = RewriteConfig::query_rewrite().with_gate(true);
    let out = engine
        .rewrite(&ConversationSession::new("s"), "what is streaming segmentation", &config)
        .unwrap();
    assert!(out.was_gated);
    assert_eq!(out.rewritten_query, "what is streaming segmentation");
    assert_eq!(out.gate_decision.unwrap().rationale_tag, GateTag::EmptyHistory);
}

#[test]
fn heuristic_gate_examples() {
    let ctx = qfusion::engine::gate::single_item_context("compare monthly revenue by country");
    let gate = HeuristicGate::default();
    assert!(classify_needs_rewrite("what about top-5", &ctx, &gate).unwrap().needs_rewrite);
    let d = classify_needs_rewrite("compare monthly revenue by country", &ctx, &gate).unwrap();
    assert!(!d.needs_rewrite);
    assert_eq!(d.rationale_tag, GateTag::SelfContained);
}

#[test]
fn single_turn_fusion_is_model_output_on_empty_context() {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let (session, out) = engine
        .advance_fusion_session(
            &ConversationSession::new("s"),
            "compare monthly revenue by country",
            None,
            &RewriteConfig::query_fusion(),
        )
        .unwrap();
    assert!(out.context_used.is_empty());
    assert!(out.prompt.unwrap().contains("(no previous turns)"));
    assert_eq!(session.turns()[0].rewritten_query(), Some("compare monthly revenue by country"));
}

#[test]
fn gated_fusion_turn_keeps_the_chain() {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()))
        .with_gate(Arc::new(FixedGate(GateDecision::self_contained(1.0))));
    let config = RewriteConfig::query_fusion().with_gate(true);
    let s = ConversationSession::new("s");
    let (s, _) = engine.advance_fusion_session(&s, "compare orders by country", None, &config).unwrap();
    let (s, out) = engine.advance_fusion_session(&s, "show revenue by region", None, &config).unwrap();
    assert!(out.was_gated);
    assert_eq!(s.turns()[1].rewritten_query(), Some("show revenue by region"));
}
