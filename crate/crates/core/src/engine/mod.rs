//! The parameterized rewrite procedure.
//!
//! A rewrite projects the session history (raw inputs or earlier rewrites),
//! keeps a trailing window of `k` items, renders the configured prompt with
//! that context and the current query, and calls the model once. The two
//! presets in [`RewriteConfig`] recover the history-window rewrite and the
//! recursive fusion approach.

pub mod context;
pub mod gate;
pub mod prompt;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConversationSession, Context, ModelError, RewriteConfig, Turn};
use crate::providers::{GenerativeModelProvider, ProviderError};

pub use context::build_context;
pub use gate::{
    classify_needs_rewrite, CueLexicon, FixedGate, GateClassifier, GateDecision, GateTag,
    HeuristicGate, ModelGate,
};
pub use prompt::{parse_transcript, render_prompt, PromptError, PromptTemplate, TemplateRegistry};

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("turn {turn_index} has no rewritten query; fusion needs the full rewrite chain")]
    MissingRewrittenHistory { turn_index: usize },
    #[error("fusion session advance requires a rewritten-query history source")]
    NotFusionConfig,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl RewriteError {
    pub fn is_provider(&self) -> bool {
        matches!(self, RewriteError::Provider(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteOutcome {
    pub original_query: String,
    pub rewritten_query: String,
    pub was_gated: bool,
    pub context_used: Context,
    pub config_used: RewriteConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_decision: Option<GateDecision>,
    /// The rendered prompt; absent when the gate short-circuited the model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
}

/// Stateless rewrite engine. All conversation state lives in the
/// [`ConversationSession`] passed to each call.
#[derive(Clone)]
pub struct RewriteEngine {
    model: Arc<dyn GenerativeModelProvider>,
    gate: Arc<dyn GateClassifier>,
    templates: TemplateRegistry,
}

impl RewriteEngine {
    /// Engine with the built-in templates and the heuristic gate.
    pub fn new(model: Arc<dyn GenerativeModelProvider>) -> Self {
        Self {
            model,
            gate: Arc::new(HeuristicGate::default()),
            templates: TemplateRegistry::builtin(),
        }
    }

    pub fn with_gate(mut self, gate: Arc<dyn GateClassifier>) -> Self {
        self.gate = gate;
        self
    }

    pub fn with_templates(mut self, templates: TemplateRegistry) -> Self {
        self.templates = templates;
        self
    }

    pub fn model(&self) -> &Arc<dyn GenerativeModelProvider> {
        &self.model
    }

    pub fn templates(&self) -> &TemplateRegistry {
        &self.templates
    }

    /// Rewrites `query` given the session so far. The session itself is not
    /// modified; see [`advance_session`](Self::advance_session).
    pub fn rewrite(
        &self,
        session: &ConversationSession,
        query: &str,
        config: &RewriteConfig,
    ) -> Result<RewriteOutcome, RewriteError> {
        if query.trim().is_empty() {
            return Err(ModelError::EmptyQuery.into());
        }
        config.validate()?;
        if config.is_fusion() {
            if let Some(t) = session.turns().iter().find(|t| t.rewritten_query().is_none()) {
                return Err(RewriteError::MissingRewrittenHistory {
                    turn_index: t.index(),
                });
            }
        }

        let history = session.project_history(config.history_source);
        let context = build_context(&history, config.k, config.include_responses, config.window_bound);

        let mut gate_decision = None;
        if config.gate_enabled {
            let decision = classify_needs_rewrite(query, &context, self.gate.as_ref())?;
            gate_decision = Some(decision);
            if !decision.needs_rewrite {
                return Ok(RewriteOutcome {
                    original_query: query.to_string(),
                    rewritten_query: query.to_string(),
                    was_gated: true,
                    context_used: context,
                    config_used: config.clone(),
                    gate_decision,
                    prompt: None,
                });
            }
        }

        let template = self.templates.get(&config.prompt_template_id)?;
        let prompt = render_prompt(template, &context, query)?;
        let raw = self.model.generate(&prompt)?;
        let rewritten = clean_model_output(&raw);
        if rewritten.is_empty() {
            return Err(ProviderError::Malformed {
                detail: "model returned an empty rewrite".into(),
                raw_body: raw,
            }
            .into());
        }
        Ok(RewriteOutcome {
            original_query: query.to_string(),
            rewritten_query: rewritten.to_string(),
            was_gated: false,
            context_used: context,
            config_used: config.clone(),
            gate_decision,
            prompt: Some(prompt),
        })
    }

    /// Rewrites `query`, then appends it as the next turn with the rewrite
    /// stored on it. Works for any config; fusion callers should prefer
    /// [`advance_fusion_session`](Self::advance_fusion_session).
    pub fn advance_session(
        &self,
        session: &ConversationSession,
        query: &str,
        response: Option<&str>,
        config: &RewriteConfig,
    ) -> Result<(ConversationSession, RewriteOutcome), RewriteError> {
        let outcome = self.rewrite(session, query, config)?;
        let mut turn = Turn::new(session.next_index(), query)?
            .with_rewritten_query(outcome.rewritten_query.clone());
        if let Some(r) = response {
            turn = turn.with_response(r);
        }
        Ok((session.append(turn)?, outcome))
    }

    /// One step of recursive fusion: the new turn's rewrite becomes the
    /// history for the next step. A gated turn stores its original query as
    /// the rewrite so the chain is never broken.
    pub fn advance_fusion_session(
        &self,
        session: &ConversationSession,
        query: &str,
        response: Option<&str>,
        config: &RewriteConfig,
    ) -> Result<(ConversationSession, RewriteOutcome), RewriteError> {
        if !config.is_fusion() {
            return Err(RewriteError::NotFusionConfig);
        }
        self.advance_session(session, query, response, config)
    }
}

const QUOTE_PAIRS: [(char, char); 6] = [
    ('"', '"'),
    ('\'', '\''),
    ('`', '`'),
    ('\u{201c}', '\u{201d}'),
    ('\u{2018}', '\u{2019}'),
    ('\u{ab}', '\u{bb}'),
];

/// Trims whitespace and any matching pairs of surrounding quotes.
pub fn clean_model_output(raw: &str) -> &str {
    let mut s = raw.trim();
    loop {
        let mut chars = s.chars();
        let (Some(first), Some(last)) = (chars.next(), chars.next_back()) else {
            return s;
        };
        if QUOTE_PAIRS.contains(&(first, last)) {
            s = s[first.len_utf8()..s.len() - last.len_utf8()].trim();
        } else {
            return s;
        }
    }
}
