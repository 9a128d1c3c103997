//! Registers a custom prompt template and renders it for a short history.
//!
//!     cargo run --example custom_template

use std::collections::BTreeMap;
use std::sync::Arc;

use qfusion::engine::{PromptTemplate, RewriteEngine, TemplateRegistry};
use qfusion::model::{ConversationSession, RewriteConfig, Turn};
use qfusion::providers::IdentityMock;

const BODY: &str = "{{instructions}}

Conversation so far:
{{context}}

{{query}}
Standalone question:";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let metadata = BTreeMap::from([(
        "instructions".to_string(),
        "Rewrite the last support question so it can be searched without the chat.".to_string(),
    )]);
    let mut templates = TemplateRegistry::builtin();
    templates.insert(PromptTemplate::new("support-search", BODY, metadata)?);

    let session = ConversationSession::new("support")
        .push(
            Turn::new(1, "how do I export an audience")?
                .with_response("Open the audience, then choose Export from the menu."),
        )?;
    let engine = RewriteEngine::new(Arc::new(IdentityMock)).with_templates(templates);
    let config = RewriteConfig::query_rewrite().with_template("support-search");
    let out = engine.rewrite(&session, "can I schedule it", &config)?;
    println!("{}", out.prompt.unwrap_or_default());
    Ok(())
}
