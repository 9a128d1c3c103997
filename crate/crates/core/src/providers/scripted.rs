use serde::{Deserialize, Serialize};

use super::{GenerativeModelProvider, ProviderDescriptor, ProviderError};

/// Matches a rendered prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PromptMatcher {
    /// Every listed substring must occur.
    All { contains: Vec<String> },
    /// Matches any prompt.
    Any {},
}

impl PromptMatcher {
    pub fn contains(needle: impl Into<String>) -> Self {
        PromptMatcher::All {
            contains: vec![needle.into()],
        }
    }

    pub fn all<I, S>(needles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PromptMatcher::All {
            contains: needles.into_iter().map(Into::into).collect(),
        }
    }

    pub fn matches(&self, prompt: &str) -> bool {
        match self {
            PromptMatcher::All { contains } => contains.iter().all(|n| prompt.contains(n.as_str())),
            PromptMatcher::Any {} => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub matcher: PromptMatcher,
    pub response: String,
}

/// Canned responses chosen by the first entry whose matcher fires.
///
/// In strict mode a prompt no entry matches is an error; otherwise the
/// fallback response is returned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedMock {
    pub script: Vec<ScriptEntry>,
    #[serde(default = "default_strict")]
    pub strict: bool,
    #[serde(default)]
    pub fallback: String,
}

fn default_strict() -> bool {
    true
}

impl ScriptedMock {
    pub fn strict(script: Vec<ScriptEntry>) -> Self {
        Self {
            script,
            strict: true,
            fallback: String::new(),
        }
    }

    pub fn lenient(script: Vec<ScriptEntry>, fallback: impl Into<String>) -> Self {
        Self {
            script,
            strict: false,
            fallback: fallback.into(),
        }
    }

    /// Answers every prompt with `response`.
    pub fn always(response: impl Into<String>) -> Self {
        Self::strict(vec![ScriptEntry {
            matcher: PromptMatcher::Any {},
            response: response.into(),
        }])
    }

    pub fn push(&mut self, matcher: PromptMatcher, response: impl Into<String>) {
        self.script.push(ScriptEntry {
            matcher,
            response: response.into(),
        });
    }
}

impl GenerativeModelProvider for ScriptedMock {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        match self.script.iter().find(|e| e.matcher.matches(prompt)) {
            Some(entry) => Ok(entry.response.clone()),
            None if self.strict => Err(ProviderError::NoScriptMatch),
            None => Ok(self.fallback.clone()),
        }
    }

    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            provider_id: "scripted-mock".into(),
            model_name: format!("script[{}]", self.script.len()),
            deterministic: true,
        }
    }
}
