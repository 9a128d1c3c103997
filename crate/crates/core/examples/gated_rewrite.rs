//! The needs-rewrite gate: self-contained questions skip the model, follow-ups
//! that lean on the conversation go through it.
//!
//!     cargo run --example gated_rewrite

use std::sync::Arc;

use qfusion::engine::RewriteEngine;
use qfusion::model::{ConversationSession, RewriteConfig};
use qfusion::providers::RuleFusionMock;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let config = RewriteConfig::query_rewrite().with_template("text-to-vis").with_gate(true);
    let mut session = ConversationSession::new("gate-demo");
    for query in [
        "compare monthly revenue by country",
        "show it as a line chart",
        "what about top-5",
        "compare weekly orders by region",
        "add profit",
    ] {
        let (next, out) = engine.advance_session(&session, query, None, &config)?;
        let decision = out.gate_decision.expect("gate enabled");
        println!(
            "{query:<36} {:<17} -> {}",
            format!("{:?}", decision.rationale_tag),
            if out.was_gated { "(unchanged)".to_string() } else { out.rewritten_query }
        );
        session = next;
    }
    Ok(())
}
