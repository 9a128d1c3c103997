//! Prompt templates and the transcript format used to lay out context.
//!
//! Templates are plain text with `{{instructions}}`, `{{context}}` and
//! `{{query}}` placeholders. The context block is rendered as labeled lines
//! so that offline mocks can recover the structure from the prompt text:
//!
//! ```text
//! [-2] user: compare monthly revenue by country
//! [-2] assistant: Here is the chart.
//! [-1] user: yearly
//! [now] user: show it as a line chart
//! ```
//!
//! `[-r]` is the recency of a context item (`-1` is the most recent turn).
//! Continuation lines of multi-line text are prefixed with `   | `.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Context, ContextItem};

pub const CURRENT_LABEL: &str = "[now] user: ";
pub const EMPTY_CONTEXT_MARKER: &str = "(no previous turns)";
const CONTINUATION: &str = "   | ";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("template '{template_id}' references unknown placeholder '{{{{{name}}}}}'")]
    UnknownPlaceholder { template_id: String, name: String },
    #[error("template '{0}' has no {{{{query}}}} placeholder")]
    MissingQueryPlaceholder(String),
    #[error("query is empty")]
    EmptyQuery,
    #[error("unknown template id '{0}'")]
    UnknownTemplate(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid template manifest {path}: {detail}")]
    Manifest { path: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub template_id: String,
    pub body: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([^{}\s]*)\s*\}\}").expect("static regex"))
}

const KNOWN_PLACEHOLDERS: [&str; 3] = ["instructions", "context", "query"];

impl PromptTemplate {
    /// Builds a template, rejecting unknown placeholders and bodies that
    /// never mention the query.
    pub fn new(
        template_id: impl Into<String>,
        body: impl Into<String>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, PromptError> {
        let template = Self {
            template_id: template_id.into(),
            body: body.into(),
            metadata,
        };
        template.check()?;
        Ok(template)
    }

    fn check(&self) -> Result<(), PromptError> {
        let mut has_query = false;
        for cap in placeholder_re().captures_iter(&self.body) {
            let name = &cap[1];
            if !KNOWN_PLACEHOLDERS.contains(&name) {
                return Err(PromptError::UnknownPlaceholder {
                    template_id: self.template_id.clone(),
                    name: name.to_string(),
                });
            }
            has_query |= name == "query";
        }
        if !has_query {
            return Err(PromptError::MissingQueryPlaceholder(self.template_id.clone()));
        }
        Ok(())
    }

    pub fn instructions(&self) -> &str {
        self.metadata.get("instructions").map_or("", String::as_str)
    }

    pub fn default_approach(&self) -> Option<&str> {
        self.metadata.get("default_approach").map(String::as_str)
    }
}

/// Renders `template` for `query` given `context`. Pure and deterministic.
pub fn render_prompt(
    template: &PromptTemplate,
    context: &Context,
    query: &str,
) -> Result<String, PromptError> {
    if query.trim().is_empty() {
        return Err(PromptError::EmptyQuery);
    }
    template.check()?;
    let context_block = render_context(context);
    let query_block = labeled(CURRENT_LABEL, query);
    let rendered = placeholder_re().replace_all(&template.body, |cap: &regex::Captures<'_>| {
        match &cap[1] {
            "instructions" => template.instructions().to_string(),
            "context" => context_block.clone(),
            // check() guarantees only "query" remains
            _ => query_block.clone(),
        }
    });
    Ok(rendered.into_owned())
}

fn labeled(label: &str, text: &str) -> String {
    let mut lines = text.trim().lines();
    let mut out = format!("{label}{}", lines.next().unwrap_or(""));
    for line in lines {
        out.push('\n');
        out.push_str(CONTINUATION);
        out.push_str(line);
    }
    out
}

fn render_context(context: &Context) -> String {
    if context.is_empty() {
        return EMPTY_CONTEXT_MARKER.to_string();
    }
    let n = context.items.len();
    let mut blocks = Vec::with_capacity(n);
    for (pos, item) in context.items.iter().enumerate() {
        let recency = n - pos;
        let mut block = labeled(&format!("[-{recency}] user: "), &item.query);
        if let Some(resp) = &item.response {
            block.push('\n');
            block.push_str(&labeled(&format!("[-{recency}] assistant: "), resp));
        }
        blocks.push(block);
    }
    blocks.join("\n")
}

/// Conversation structure recovered from a rendered prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub context: Vec<ContextItem>,
    pub query: Option<String>,
}

enum Slot {
    User,
    Assistant,
    Current,
}

/// Inverse of the context/query rendering: scans a prompt for labeled lines.
/// Unlabeled template text is ignored.
pub fn parse_transcript(prompt: &str) -> Transcript {
    static LABEL: OnceLock<Regex> = OnceLock::new();
    let label = LABEL.get_or_init(|| {
        Regex::new(r"^\[(?:-\d+|now)\] (user|assistant): ").expect("static regex")
    });
    let mut transcript = Transcript::default();
    let mut last: Option<Slot> = None;
    for line in prompt.lines() {
        if let Some(rest) = line.strip_prefix(CONTINUATION) {
            let target = match last {
                Some(Slot::User) => transcript.context.last_mut().map(|i| &mut i.query),
                Some(Slot::Assistant) => transcript
                    .context
                    .last_mut()
                    .and_then(|i| i.response.as_mut()),
                Some(Slot::Current) => transcript.query.as_mut(),
                None => None,
            };
            if let Some(t) = target {
                t.push('\n');
                t.push_str(rest);
                continue;
            }
        }
        if let Some(q) = line.strip_prefix(CURRENT_LABEL) {
            transcript.query = Some(q.to_string());
            last = Some(Slot::Current);
            continue;
        }
        match label.captures(line) {
            Some(cap) => {
                let text = line[cap[0].len()..].to_string();
                if &cap[1] == "user" {
                    transcript.context.push(ContextItem {
                        query: text,
                        response: None,
                    });
                    last = Some(Slot::User);
                } else if let Some(item) = transcript.context.last_mut() {
                    item.response = Some(text);
                    last = Some(Slot::Assistant);
                }
            }
            None => last = None,
        }
    }
    transcript
}

#[derive(Debug, Deserialize)]
struct Manifest {
    #[serde(rename = "template", default)]
    templates: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    id: String,
    path: String,
    #[serde(flatten)]
    metadata: BTreeMap<String, String>,
}

/// Templates addressable by id.
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: HashMap<String, PromptTemplate>,
}

const BUILTIN_MANIFEST: &str = include_str!("../../templates/manifest.toml");

fn builtin_body(path: &str) -> Option<&'static str> {
    match path {
        "text_qa.txt" => Some(include_str!("../../templates/text_qa.txt")),
        "text_to_vis.txt" => Some(include_str!("../../templates/text_to_vis.txt")),
        _ => None,
    }
}

impl TemplateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The `text-qa` and `text-to-vis` templates compiled into the crate.
    pub fn builtin() -> Self {
        Self::from_manifest_str(BUILTIN_MANIFEST, "<builtin>", |p| {
            builtin_body(p).map(str::to_string).ok_or_else(|| PromptError::Manifest {
                path: "<builtin>".into(),
                detail: format!("no embedded body for {p}"),
            })
        })
        .expect("builtin templates are valid")
    }

    /// Loads a TOML manifest of `[[template]]` entries; `path` values are
    /// resolved relative to the manifest's directory.
    pub fn load_manifest(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| PromptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_manifest_str(&text, &path.display().to_string(), |p| {
            let full = dir.join(p);
            fs::read_to_string(&full).map_err(|source| PromptError::Io {
                path: full.display().to_string(),
                source,
            })
        })
    }

    fn from_manifest_str(
        text: &str,
        origin: &str,
        read_body: impl Fn(&str) -> Result<String, PromptError>,
    ) -> Result<Self, PromptError> {
        let manifest: Manifest = toml::from_str(text).map_err(|e| PromptError::Manifest {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        let mut registry = Self::new();
        for entry in manifest.templates {
            let body = read_body(&entry.path)?;
            registry.insert(PromptTemplate::new(entry.id, body, entry.metadata)?);
        }
        Ok(registry)
    }

    pub fn insert(&mut self, template: PromptTemplate) {
        self.templates.insert(template.template_id.clone(), template);
    }

    pub fn get(&self, template_id: &str) -> Result<&PromptTemplate, PromptError> {
        self.templates
            .get(template_id)
            .ok_or_else(|| PromptError::UnknownTemplate(template_id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        let mut ids: Vec<_> = self.templates.keys().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }
}
