//! Replays a ten-turn analytics conversation with query fusion and with the
//! windowed rewrite preset, side by side.
//!
//!     cargo run --example fusion_trace

use std::sync::Arc;

use qfusion::engine::RewriteEngine;
use qfusion::model::{ConversationSession, RewriteConfig};
use qfusion::providers::RuleFusionMock;

const INPUTS: [&str; 10] = [
    "compare monthly revenue by country",
    "yearly",
    "show it as a line chart",
    "now change to marketing channel",
    "what about month over month as bar",
    "replace with pageviews",
    "show top-3",
    "what about top-5",
    "show only this month",
    "add revenue",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let fusion = RewriteConfig::query_fusion();
    let rewrite = RewriteConfig::query_rewrite().with_template("text-to-vis");

    let mut fused = ConversationSession::new("fusion");
    let mut windowed = ConversationSession::new("rewrite");
    for (i, input) in INPUTS.iter().enumerate() {
        let (next, f) = engine.advance_fusion_session(&fused, input, None, &fusion)?;
        let (next_w, w) = engine.advance_session(&windowed, input, None, &rewrite)?;
        fused = next;
        windowed = next_w;
        println!("{:>2}. {input}", i + 1);
        println!("    fusion:  {}", f.rewritten_query);
        if w.rewritten_query != f.rewritten_query {
            println!("    rewrite: {}  (k=5 raw history)", w.rewritten_query);
        }
    }
    Ok(())
}
