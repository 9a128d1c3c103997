//! Needs-rewrite gate: decides whether a query depends on the conversation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{Context, ContextItem};
use crate::providers::{GenerativeModelProvider, ProviderError};

use super::prompt::{render_prompt, PromptTemplate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateTag {
    PronounReference,
    Elliptical,
    SelfContained,
    ModelJudged,
    EmptyHistory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub needs_rewrite: bool,
    pub confidence: f64,
    pub rationale_tag: GateTag,
}

impl GateDecision {
    pub fn empty_history() -> Self {
        Self {
            needs_rewrite: false,
            confidence: 1.0,
            rationale_tag: GateTag::EmptyHistory,
        }
    }

    pub fn self_contained(confidence: f64) -> Self {
        Self {
            needs_rewrite: false,
            confidence,
            rationale_tag: GateTag::SelfContained,
        }
    }
}

pub trait GateClassifier: Send + Sync {
    /// Called only with a non-empty context.
    fn classify(&self, query: &str, context: &Context) -> Result<GateDecision, ProviderError>;
}

impl<T: GateClassifier + ?Sized> GateClassifier for Arc<T> {
    fn classify(&self, query: &str, context: &Context) -> Result<GateDecision, ProviderError> {
        (**self).classify(query, context)
    }
}

/// With an empty context there is nothing to resolve, so the answer is
/// always `EmptyHistory`; otherwise the classifier decides.
pub fn classify_needs_rewrite(
    query: &str,
    context: &Context,
    classifier: &dyn GateClassifier,
) -> Result<GateDecision, ProviderError> {
    if context.is_empty() {
        return Ok(GateDecision::empty_history());
    }
    classifier.classify(query, context)
}

/// Word lists driving [`HeuristicGate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueLexicon {
    pub pronouns: Vec<String>,
    /// Nouns that turn "this"/"that" into a time expression ("this month").
    pub time_nouns: Vec<String>,
    pub fragment_prefixes: Vec<String>,
    /// Verbs that only make sense as an edit of an earlier request.
    pub relative_verbs: Vec<String>,
    /// Queries with fewer tokens than this are treated as fragments.
    pub min_tokens: usize,
}

fn strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for CueLexicon {
    fn default() -> Self {
        Self {
            pronouns: strings(&["it", "its", "that", "this", "them", "they", "those", "these"]),
            time_nouns: strings(&[
                "hour", "day", "week", "weekend", "month", "quarter", "year", "morning", "evening",
                "time",
            ]),
            fragment_prefixes: strings(&[
                "what about",
                "how about",
                "and what about",
                "what if",
                "same for",
                "same but",
                "instead",
                "and",
            ]),
            relative_verbs: strings(&[
                "add", "remove", "replace", "change", "switch", "drop", "include", "exclude", "also",
            ]),
            min_tokens: 3,
        }
    }
}

/// Offline cue-lexicon classifier.
#[derive(Debug, Clone, Default)]
pub struct HeuristicGate {
    pub lexicon: CueLexicon,
}

impl HeuristicGate {
    pub fn new(lexicon: CueLexicon) -> Self {
        Self { lexicon }
    }

    fn tokens(query: &str) -> Vec<String> {
        query
            .split_whitespace()
            .map(|t| {
                t.trim_matches(|c: char| !c.is_alphanumeric() && c != '-')
                    .to_lowercase()
            })
            .filter(|t| !t.is_empty())
            .collect()
    }

    /// Decision for `query` ignoring whether any history exists.
    pub fn judge(&self, query: &str) -> GateDecision {
        let lex = &self.lexicon;
        let tokens = Self::tokens(query);
        let joined = tokens.join(" ");

        let pronoun_hit = tokens.iter().enumerate().any(|(i, t)| {
            if !lex.pronouns.contains(t) {
                return false;
            }
            let next_is_time = tokens
                .get(i + 1)
                .is_some_and(|n| lex.time_nouns.iter().any(|tn| n.trim_end_matches('s') == tn));
            !((t == "this" || t == "that") && next_is_time)
        });
        if pronoun_hit {
            return GateDecision {
                needs_rewrite: true,
                confidence: 0.9,
                rationale_tag: GateTag::PronounReference,
            };
        }

        let fragment = lex
            .fragment_prefixes
            .iter()
            .any(|p| joined == *p || joined.starts_with(&format!("{p} ")));
        let relative = tokens.first().is_some_and(|t| lex.relative_verbs.contains(t));
        if fragment || relative || tokens.len() < lex.min_tokens {
            let confidence = if fragment { 0.85 } else if relative { 0.8 } else { 0.7 };
            return GateDecision {
                needs_rewrite: true,
                confidence,
                rationale_tag: GateTag::Elliptical,
            };
        }
        GateDecision::self_contained(0.6)
    }
}

impl GateClassifier for HeuristicGate {
    fn classify(&self, query: &str, _context: &Context) -> Result<GateDecision, ProviderError> {
        Ok(self.judge(query))
    }
}

/// Always returns the same decision. Useful for tests and ablations.
#[derive(Debug, Clone, Copy)]
pub struct FixedGate(pub GateDecision);

impl GateClassifier for FixedGate {
    fn classify(&self, _query: &str, _context: &Context) -> Result<GateDecision, ProviderError> {
        Ok(self.0)
    }
}

const MODEL_GATE_TEMPLATE: &str = "{{instructions}}\n\n{{context}}\n{{query}}\n\nAnswer yes or no.";

/// Asks a generative model whether the query needs the conversation.
pub struct ModelGate {
    model: Arc<dyn GenerativeModelProvider>,
    template: PromptTemplate,
}

impl ModelGate {
    pub fn new(model: Arc<dyn GenerativeModelProvider>) -> Self {
        let template = PromptTemplate::new(
            "needs-rewrite-gate",
            MODEL_GATE_TEMPLATE,
            [(
                "instructions".to_string(),
                "Decide whether the latest user message can only be understood together with the \
                 earlier conversation."
                    .to_string(),
            )]
            .into_iter()
            .collect(),
        )
        .expect("static gate template");
        Self { model, template }
    }
}

impl GateClassifier for ModelGate {
    fn classify(&self, query: &str, context: &Context) -> Result<GateDecision, ProviderError> {
        let prompt = render_prompt(&self.template, context, query).map_err(|e| {
            ProviderError::Config(format!("gate prompt: {e}"))
        })?;
        let answer = self.model.generate(&prompt)?;
        let first = answer
            .split(|c: char| !c.is_alphabetic())
            .find(|w| !w.is_empty())
            .unwrap_or("")
            .to_lowercase();
        let needs_rewrite = match first.as_str() {
            "yes" => true,
            "no" => false,
            _ => {
                return Err(ProviderError::Malformed {
                    detail: "gate answer is neither yes nor no".into(),
                    raw_body: answer,
                })
            }
        };
        Ok(GateDecision {
            needs_rewrite,
            confidence: 1.0,
            rationale_tag: GateTag::ModelJudged,
        })
    }
}

/// Convenience for building a one-item context in tests and examples.
pub fn single_item_context(query: &str) -> Context {
    Context {
        items: vec![ContextItem {
            query: query.to_string(),
            response: None,
        }],
        source_indices: vec![1],
    }
}
