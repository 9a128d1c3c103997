//! Conversation domain types: turns, sessions, rewrite configurations and
//! the context handed to the model.
//!
//! All types are plain values. Mutating operations return a new value and
//! leave the receiver untouched, so sessions can be shared freely across
//! threads.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("turn index {found} does not follow {expected_after} (expected {})", expected_after + 1)]
    IndexGap { expected_after: usize, found: usize },
    #[error("query is empty or whitespace-only")]
    EmptyQuery,
    #[error("turn index must be >= 1")]
    ZeroIndex,
    #[error("invalid rewrite config: {0}")]
    InvalidConfig(String),
}

/// One user turn of a conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTurn")]
pub struct Turn {
    index: usize,
    user_query: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rewritten_query: Option<String>,
}

#[derive(Deserialize)]
struct RawTurn {
    index: usize,
    user_query: String,
    #[serde(default)]
    response: Option<String>,
    #[serde(default)]
    rewritten_query: Option<String>,
}

impl TryFrom<RawTurn> for Turn {
    type Error = ModelError;

    fn try_from(raw: RawTurn) -> Result<Self, Self::Error> {
        let mut turn = Turn::new(raw.index, raw.user_query)?;
        turn.response = raw.response;
        turn.rewritten_query = raw.rewritten_query;
        Ok(turn)
    }
}

impl Turn {
    pub fn new(index: usize, user_query: impl Into<String>) -> Result<Self, ModelError> {
        let user_query = user_query.into();
        if index == 0 {
            return Err(ModelError::ZeroIndex);
        }
        if user_query.trim().is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        Ok(Self {
            index,
            user_query,
            response: None,
            rewritten_query: None,
        })
    }

    pub fn with_response(mut self, response: impl Into<String>) -> Self {
        self.response = Some(response.into());
        self
    }

    pub fn with_rewritten_query(mut self, rewritten: impl Into<String>) -> Self {
        self.rewritten_query = Some(rewritten.into());
        self
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn user_query(&self) -> &str {
        &self.user_query
    }

    pub fn response(&self) -> Option<&str> {
        self.response.as_deref()
    }

    pub fn rewritten_query(&self) -> Option<&str> {
        self.rewritten_query.as_deref()
    }
}

/// Ordered turn history of a single conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSession")]
pub struct ConversationSession {
    session_id: String,
    #[serde(default = "epoch")]
    created_at: DateTime<Utc>,
    turns: Vec<Turn>,
}

#[derive(Deserialize)]
struct RawSession {
    session_id: String,
    #[serde(default = "epoch")]
    created_at: DateTime<Utc>,
    #[serde(default)]
    turns: Vec<Turn>,
}

fn epoch() -> DateTime<Utc> {
    DateTime::<Utc>::UNIX_EPOCH
}

impl TryFrom<RawSession> for ConversationSession {
    type Error = ModelError;

    fn try_from(raw: RawSession) -> Result<Self, Self::Error> {
        let mut session = ConversationSession::with_timestamp(raw.session_id, raw.created_at);
        for turn in raw.turns {
            session = session.append(turn)?;
        }
        Ok(session)
    }
}

impl ConversationSession {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self::with_timestamp(session_id, Utc::now())
    }

    pub fn with_timestamp(session_id: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        Self {
            session_id: session_id.into(),
            created_at,
            turns: Vec::new(),
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn last_index(&self) -> usize {
        self.turns.last().map_or(0, Turn::index)
    }

    /// Index the next appended turn must carry.
    pub fn next_index(&self) -> usize {
        self.last_index() + 1
    }

    /// Returns a new session with `turn` appended.
    pub fn append(&self, turn: Turn) -> Result<Self, ModelError> {
        self.clone().push(turn)
    }

    /// Consuming variant of [`append`](Self::append).
    pub fn push(mut self, turn: Turn) -> Result<Self, ModelError> {
        if turn.user_query.trim().is_empty() {
            return Err(ModelError::EmptyQuery);
        }
        if turn.index != self.next_index() {
            return Err(ModelError::IndexGap {
                expected_after: self.last_index(),
                found: turn.index,
            });
        }
        self.turns.push(turn);
        Ok(self)
    }

    /// Drops all turns, keeping the identifier. Used when a conversation
    /// switches topic and the fusion chain should start over.
    pub fn reset(&self) -> Self {
        Self {
            session_id: self.session_id.clone(),
            created_at: self.created_at,
            turns: Vec::new(),
        }
    }

    /// Projects the turn list onto the history the rewrite window slides
    /// over.
    ///
    /// `RawInputs` yields every turn's user query with its response.
    /// `RewrittenQueries` yields only the stored rewrites, never a response,
    /// and skips turns that have none.
    pub fn project_history(&self, source: HistorySource) -> Vec<HistoryEntry> {
        match source {
            HistorySource::RawInputs => self
                .turns
                .iter()
                .map(|t| HistoryEntry {
                    turn_index: t.index,
                    query: t.user_query.clone(),
                    response: t.response.clone(),
                })
                .collect(),
            HistorySource::RewrittenQueries => self
                .turns
                .iter()
                .filter_map(|t| {
                    t.rewritten_query.as_ref().map(|r| HistoryEntry {
                        turn_index: t.index,
                        query: r.clone(),
                        response: None,
                    })
                })
                .collect(),
        }
    }
}

/// One (query, response) pair of projected history, tagged with the turn
/// it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub turn_index: usize,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
}

impl HistoryEntry {
    pub fn new(turn_index: usize, query: impl Into<String>, response: Option<String>) -> Self {
        Self {
            turn_index,
            query: query.into(),
            response,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HistorySource {
    RawInputs,
    RewrittenQueries,
}

/// How many history items a window of length `k` admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindowBound {
    /// The final `min(k, t)` items.
    #[default]
    LastK,
    /// Items `max(1, t-k) ..= t`, i.e. up to `k + 1` items.
    AlgorithmLiteral,
}

impl WindowBound {
    /// Number of items a window of length `k` keeps out of `available`.
    pub fn window_len(self, k: usize, available: usize) -> usize {
        match self {
            WindowBound::LastK => k.min(available),
            WindowBound::AlgorithmLiteral => k.saturating_add(1).min(available),
        }
    }
}

/// Parameters of the generic rewrite procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteConfig {
    pub k: usize,
    pub history_source: HistorySource,
    pub include_responses: bool,
    pub prompt_template_id: String,
    #[serde(default)]
    pub gate_enabled: bool,
    #[serde(default)]
    pub window_bound: WindowBound,
}

pub const TEXT_QA_TEMPLATE: &str = "text-qa";
pub const TEXT_TO_VIS_TEMPLATE: &str = "text-to-vis";

impl RewriteConfig {
    /// History-window rewrite: the last five user queries together with the
    /// assistant's responses.
    pub fn query_rewrite() -> Self {
        Self {
            k: 5,
            history_source: HistorySource::RawInputs,
            include_responses: true,
            prompt_template_id: TEXT_QA_TEMPLATE.to_string(),
            gate_enabled: false,
            window_bound: WindowBound::LastK,
        }
    }

    /// Recursive fusion: only the previous rewritten query, no responses.
    pub fn query_fusion() -> Self {
        Self {
            k: 1,
            history_source: HistorySource::RewrittenQueries,
            include_responses: false,
            prompt_template_id: TEXT_TO_VIS_TEMPLATE.to_string(),
            gate_enabled: false,
            window_bound: WindowBound::LastK,
        }
    }

    pub fn with_gate(mut self, enabled: bool) -> Self {
        self.gate_enabled = enabled;
        self
    }

    pub fn with_template(mut self, template_id: impl Into<String>) -> Self {
        self.prompt_template_id = template_id.into();
        self
    }

    pub fn with_window_bound(mut self, bound: WindowBound) -> Self {
        self.window_bound = bound;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn is_fusion(&self) -> bool {
        self.history_source == HistorySource::RewrittenQueries
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.history_source == HistorySource::RewrittenQueries && self.include_responses {
            return Err(ModelError::InvalidConfig(
                "rewritten-query history cannot include responses".into(),
            ));
        }
        if self.prompt_template_id.trim().is_empty() {
            return Err(ModelError::InvalidConfig("prompt_template_id is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextItem {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
}

/// The ordered history items given to the model, most recent last.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub items: Vec<ContextItem>,
    pub source_indices: Vec<usize>,
}

impl Context {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn most_recent(&self) -> Option<&ContextItem> {
        self.items.last()
    }
}
