//! Calls a chat-completion endpoint through the HTTP provider.
//!
//! Set QFUSION_BASE_URL (and optionally QFUSION_MODEL and QFUSION_API_KEY)
//! to send a real request; otherwise the request body is printed.
//!
//!     QFUSION_BASE_URL=http://localhost:8080 cargo run --example http_provider

use std::sync::Arc;

use qfusion::engine::RewriteEngine;
use qfusion::model::{ConversationSession, RewriteConfig, Turn};
use qfusion::providers::{HttpProvider, HttpProviderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base_url = std::env::var("QFUSION_BASE_URL").ok();
    let model = std::env::var("QFUSION_MODEL").unwrap_or_else(|_| "gpt-4o-mini".into());
    let mut config = HttpProviderConfig::new(base_url.clone().unwrap_or("http://localhost:8080".into()), model);
    config.params.insert("temperature".into(), 0.0.into());
    if std::env::var_os("QFUSION_API_KEY").is_some() {
        config.auth_env_var = Some("QFUSION_API_KEY".into());
    }
    let provider = HttpProvider::new(config)?;

    let session = ConversationSession::new("http")
        .push(Turn::new(1, "compare yearly revenue by country")?.with_rewritten_query("compare yearly revenue by country"))?;
    if base_url.is_none() {
        println!("{}", serde_json::to_string_pretty(&provider.request_body("<rendered prompt>"))?);
        return Ok(());
    }
    let engine = RewriteEngine::new(Arc::new(provider));
    let out = engine.rewrite(&session, "show it as a line chart", &RewriteConfig::query_fusion())?;
    println!("{}", out.rewritten_query);
    Ok(())
}
