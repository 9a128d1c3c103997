//! Annotated conversation corpora.
//!
//! On disk a dataset is line-delimited JSON, one conversation per line:
//!
//! ```text
//! {"conversation_id":"c1","task_type":"TEXT_TO_VIS","questions":[{"turn_index":1,"user_query":"...","gold_rewrite":"..."}]}
//! ```
//!
//! An optional JSON manifest names the data file and declares the corpus
//! statistics the validator must reproduce.

pub mod generate;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_synthetic, GenerationProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskType {
    TextQa,
    TextToVis,
}

impl TaskType {
    pub fn label(self) -> &'static str {
        match self {
            TaskType::TextQa => "Text-based Q&A",
            TaskType::TextToVis => "Text-to-Vis",
        }
    }

    pub fn template_id(self) -> &'static str {
        match self {
            TaskType::TextQa => crate::model::TEXT_QA_TEMPLATE,
            TaskType::TextToVis => crate::model::TEXT_TO_VIS_TEMPLATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedQuestion {
    #[serde(default, skip_serializing)]
    pub question_id: String,
    pub turn_index: usize,
    pub user_query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    /// `None` when annotators marked the rewrite as not needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_rewrite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_id: Option<String>,
}

impl AnnotatedQuestion {
    pub fn new(turn_index: usize, user_query: impl Into<String>) -> Self {
        Self {
            question_id: String::new(),
            turn_index,
            user_query: user_query.into(),
            response: None,
            gold_rewrite: None,
            intent: None,
            topic_id: None,
        }
    }

    pub fn with_gold(mut self, gold: impl Into<String>) -> Self {
        self.gold_rewrite = Some(gold.into());
        self
    }

    pub fn with_response(mut self, response: impl Into<String>) -> Self {
        self.response = Some(response.into());
        self
    }

    pub fn with_intent(mut self, intent: impl Into<String>) -> Self {
        self.intent = Some(intent.into());
        self
    }

    pub fn has_history(&self) -> bool {
        self.turn_index > 1
    }
}

pub fn question_id(conversation_id: &str, turn_index: usize) -> String {
    format!("{conversation_id}#{turn_index}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub conversation_id: String,
    pub questions: Vec<AnnotatedQuestion>,
}

impl Conversation {
    /// Builds a conversation, assigning question ids.
    pub fn new(conversation_id: impl Into<String>, mut questions: Vec<AnnotatedQuestion>) -> Self {
        let conversation_id = conversation_id.into();
        for q in &mut questions {
            q.question_id = question_id(&conversation_id, q.turn_index);
        }
        Self {
            conversation_id,
            questions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatLength {
    pub min: usize,
    pub max: usize,
}

impl fmt::Display for ChatLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.min == self.max {
            write!(f, "{}", self.min)
        } else {
            write!(f, "{}-{}", self.min, self.max)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredStats {
    pub n_questions: usize,
    pub n_with_history: usize,
    pub chat_length: ChatLength,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_question_types: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_questions: usize,
    pub n_with_history: usize,
    /// `None` for a dataset without conversations.
    pub chat_length: Option<ChatLength>,
    pub n_distinct_intents: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub dataset_id: String,
    pub task_type: TaskType,
    pub conversations: Vec<Conversation>,
    pub declared_stats: Option<DeclaredStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaIssue {
    /// 1-based line of the data file, when known.
    pub line: Option<usize>,
    pub conversation_id: Option<String>,
    pub message: String,
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(c) = &self.conversation_id {
            write!(f, "conversation '{c}': ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} schema violation(s):\n{}", .issues.len(), render_issues(.issues))]
pub struct SchemaError {
    pub issues: Vec<SchemaIssue>,
}

fn render_issues(issues: &[SchemaIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    conversation_id: String,
    task_type: TaskType,
    questions: Vec<AnnotatedQuestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub task_type: TaskType,
    /// Data file, relative to the manifest.
    pub data: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_stats: Option<DeclaredStats>,
}

impl Dataset {
    pub fn new(dataset_id: impl Into<String>, task_type: TaskType, conversations: Vec<Conversation>) -> Self {
        Self {
            dataset_id: dataset_id.into(),
            task_type,
            conversations,
            declared_stats: None,
        }
    }

    pub fn questions(&self) -> impl Iterator<Item = (&Conversation, &AnnotatedQuestion)> {
        self.conversations
            .iter()
            .flat_map(|c| c.questions.iter().map(move |q| (c, q)))
    }

    pub fn compute_stats(&self) -> DatasetStats {
        let n_questions = self.questions().count();
        let n_with_history = self.questions().filter(|(_, q)| q.has_history()).count();
        let lengths = self.conversations.iter().map(|c| c.questions.len());
        let chat_length = lengths.clone().min().zip(lengths.max()).map(|(min, max)| ChatLength { min, max });
        let intents: BTreeSet<&str> = self
            .questions()
            .filter_map(|(_, q)| q.intent.as_deref())
            .collect();
        DatasetStats {
            n_questions,
            n_with_history,
            chat_length,
            n_distinct_intents: intents.len(),
        }
    }

    /// Collects every invariant violation instead of stopping at the first.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for conv in &self.conversations {
            let issue = |message: String| SchemaIssue {
                line: None,
                conversation_id: Some(conv.conversation_id.clone()),
                message,
            };
            if conv.conversation_id.trim().is_empty() {
                issues.push(issue("empty conversation_id".into()));
            }
            if !seen.insert(conv.conversation_id.as_str()) {
                issues.push(issue("duplicate conversation_id".into()));
            }
            if conv.questions.is_empty() {
                issues.push(issue("conversation has no questions".into()));
            }
            for (pos, q) in conv.questions.iter().enumerate() {
                if q.turn_index != pos + 1 {
                    issues.push(issue(format!(
                        "question {}: turn_index {} where {} was expected (indices must be consecutive from 1)",
                        pos + 1,
                        q.turn_index,
                        pos + 1
                    )));
                }
                if q.user_query.trim().is_empty() {
                    issues.push(issue(format!("turn {}: empty user_query", q.turn_index)));
                }
                if q.gold_rewrite.as_deref().is_some_and(|g| g.trim().is_empty()) {
                    issues.push(issue(format!(
                        "turn {}: gold_rewrite is present but empty (omit it to mark N/A)",
                        q.turn_index
                    )));
                }
            }
        }
        if let Some(declared) = &self.declared_stats {
            issues.extend(self.check_declared(declared));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(SchemaError { issues })
        }
    }

    fn check_declared(&self, declared: &DeclaredStats) -> Vec<SchemaIssue> {
        let stats = self.compute_stats();
        let mut out = Vec::new();
        let mut mismatch = |what: &str, declared: String, computed: String| {
            out.push(SchemaIssue {
                line: None,
                conversation_id: None,
                message: format!("declared {what} {declared} but dataset has {computed}"),
            })
        };
        if stats.n_questions != declared.n_questions {
            mismatch("n_questions", declared.n_questions.to_string(), stats.n_questions.to_string());
        }
        if stats.n_with_history != declared.n_with_history {
            mismatch(
                "n_with_history",
                declared.n_with_history.to_string(),
                stats.n_with_history.to_string(),
            );
        }
        if let Some(len) = stats.chat_length {
            let range = declared.chat_length;
            if len.min < range.min || len.max > range.max {
                mismatch("chat length", range.to_string(), len.to_string());
            }
        }
        if let Some(types) = declared.n_question_types {
            if types != stats.n_distinct_intents {
                mismatch("n_question_types", types.to_string(), stats.n_distinct_intents.to_string());
            }
        }
        out
    }

    /// Writes the line-delimited data file.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        let io_err = |source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = Vec::new();
        for conv in &self.conversations {
            let record = Record {
                conversation_id: conv.conversation_id.clone(),
                task_type: self.task_type,
                questions: conv.questions.clone(),
            };
            serde_json::to_writer(&mut out, &record).expect("records serialize");
            out.push(b'\n');
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(io_err)
    }

    /// Writes the manifest plus a data file with the same stem and a
    /// `.jsonl` extension next to it. The manifest carries the
    /// dataset's declared stats (or its computed stats when none are set).
    pub fn save_with_manifest(&self, manifest_path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let manifest_path = manifest_path.as_ref();
        let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
        let stem = manifest_path
            .file_stem()
            .map_or_else(|| self.dataset_id.clone(), |s| s.to_string_lossy().into_owned());
        let data = format!("{stem}.jsonl");
        self.save(dir.join(&data))?;
        let declared = self.declared_stats.clone().or_else(|| {
            let s = self.compute_stats();
            s.chat_length.map(|chat_length| DeclaredStats {
                n_questions: s.n_questions,
                n_with_history: s.n_with_history,
                chat_length,
                n_question_types: Some(s.n_distinct_intents),
            })
        });
        let manifest = DatasetManifest {
            dataset_id: self.dataset_id.clone(),
            task_type: self.task_type,
            data,
            declared_stats: declared,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(manifest_path, text + "\n").map_err(|source| DatasetError::Io {
            path: manifest_path.to_path_buf(),
            source,
        })
    }
}

fn is_manifest(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Loads and validates a dataset from a `.jsonl` data file or a `.json`
/// manifest. Schema violations are reported together with their line
/// numbers.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    if is_manifest(path) {
        let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| DatasetError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let data_path = dir.join(&manifest.data);
        let (mut dataset, lines) = read_records(&data_path, manifest.dataset_id, Some(manifest.task_type))?;
        dataset.declared_stats = manifest.declared_stats;
        validate_with_lines(&dataset, &lines)?;
        Ok(dataset)
    } else {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        let (dataset, lines) = read_records(path, id, None)?;
        validate_with_lines(&dataset, &lines)?;
        Ok(dataset)
    }
}

fn validate_with_lines(dataset: &Dataset, lines: &[(usize, String)]) -> Result<(), SchemaError> {
    let extra: Vec<SchemaIssue> = lines
        .iter()
        .filter(|(_, msg)| !msg.is_empty())
        .map(|(line, msg)| SchemaIssue {
            line: Some(*line),
            conversation_id: None,
            message: msg.clone(),
        })
        .collect();
    let mut issues = match dataset.validate() {
        Ok(()) => Vec::new(),
        Err(e) => e.issues,
    };
    // attach line numbers: record i of the dataset came from lines[i]
    for issue in &mut issues {
        if let Some(cid) = &issue.conversation_id {
            if let Some(pos) = dataset.conversations.iter().position(|c| &c.conversation_id == cid) {
                issue.line = lines.get(pos).map(|(l, _)| *l);
            }
        }
    }
    issues.extend(extra);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(SchemaError { issues })
    }
}

/// Returns the dataset plus, per record, its line number and any
/// record-level issue (e.g. mixed task types).
fn read_records(
    path: &Path,
    dataset_id: String,
    task_type: Option<TaskType>,
) -> Result<(Dataset, Vec<(usize, String)>), DatasetError> {
    let file = fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut conversations = Vec::new();
    let mut lines = Vec::new();
    let mut task = task_type;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        let expected = *task.get_or_insert(record.task_type);
        let note = if record.task_type != expected {
            format!("task_type {:?} differs from dataset task_type {:?}", record.task_type, expected)
        } else {
            String::new()
        };
        lines.push((line_no, note));
        conversations.push(Conversation::new(record.conversation_id, record.questions));
    }
    let dataset = Dataset::new(dataset_id, task.unwrap_or(TaskType::TextQa), conversations);
    Ok((dataset, lines))
}
