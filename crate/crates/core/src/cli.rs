//! The `qfusion` command line.
//!
//! Exit codes: 0 success, 1 configuration or dataset validation error,
//! 2 model provider error, 3 bad input.

use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::DateTime;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::datasets::{generate_synthetic, load_dataset, DatasetError, GenerationProfile, TaskType};
use crate::engine::{RewriteEngine, RewriteError, RewriteOutcome, TemplateRegistry};
use crate::eval::{
    load_score_fixture, render_gains, render_table, run_eval, Approach, EvalError, EvalOptions, EvalReport,
    ReportMetadata,
};
use crate::model::{ConversationSession, ModelError, RewriteConfig};
use crate::providers::{
    GenerativeModelProvider, HashEmbedder, HttpProvider, HttpProviderConfig, IdentityMock, ProviderError,
    RuleFusionMock, ScriptedMock,
};

pub const CONFIG_ENV_VAR: &str = "QFUSION_CONFIG";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Provider(String),
    Input(String),
    /// Stdout was closed by the reader, as in `qfusion ... | head`.
    OutputClosed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Provider(_) => 2,
            CliError::Input(_) => 3,
            CliError::OutputClosed => 0,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Provider(m) => write!(f, "provider error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::OutputClosed => write!(f, "output closed"),
        }
    }
}

impl From<RewriteError> for CliError {
    fn from(e: RewriteError) -> Self {
        match e {
            RewriteError::Provider(p) => CliError::Provider(p.to_string()),
            RewriteError::Model(ModelError::EmptyQuery) => CliError::Input("query is empty".into()),
            RewriteError::Prompt(p) => CliError::Config(p.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Validation(_) | EvalError::UnknownApproach(_) => CliError::Config(e.to_string()),
            EvalError::Provider(p) => CliError::Provider(p.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Schema(_) => CliError::Config(e.to_string()),
            DatasetError::Io { .. } | DatasetError::Parse { .. } => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qfusion", version, about = "Conversational query rewriting and fusion")]
pub struct Cli {
    /// Config file; falls back to $QFUSION_CONFIG, then ~/.config/qfusion/config.toml.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite one query given an optional saved session.
    Rewrite(RewriteArgs),
    /// Rewrite queries read line by line from stdin.
    Chat(ChatArgs),
    /// Evaluate approaches on a dataset, or aggregate score fixtures.
    Eval(EvalArgs),
    /// Validate, summarize or generate datasets.
    #[command(subcommand)]
    Dataset(DatasetCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MockKind {
    /// Echo the current query.
    Identity,
    /// Rule-based analytics question fusion.
    Rule,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Use an offline mock model instead of an HTTP provider.
    #[arg(long, value_enum)]
    pub mock: Option<MockKind>,
    /// Use a scripted mock loaded from a JSON script file.
    #[arg(long, conflicts_with = "mock")]
    pub script: Option<PathBuf>,
    /// HTTP provider config (.toml or .json).
    #[arg(long)]
    pub provider_config: Option<PathBuf>,
    /// Prompt template manifest.
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ApproachArgs {
    /// fusion, rewrite or rewrite+gate; defaults from the template.
    #[arg(long)]
    pub approach: Option<String>,
    /// Prompt template id.
    #[arg(long)]
    pub template: Option<String>,
    /// Override the history window size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Skip the model for queries judged self-contained.
    #[arg(long)]
    pub gate: bool,
}

#[derive(Debug, Args)]
pub struct RewriteArgs {
    #[command(flatten)]
    pub approach: ApproachArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Saved session JSON to use as history.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// The new user query to rewrite.
    #[arg(long)]
    pub query: String,
    /// Print the context items and gate decision to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct ChatArgs {
    #[command(flatten)]
    pub approach: ApproachArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Saved session JSON to continue from.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Write the session JSON here on exit.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Print the context items and gate decision to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset (.jsonl data file or .json manifest).
    #[arg(long, required_unless_present = "scores", conflicts_with = "scores")]
    pub dataset: Option<PathBuf>,
    /// Score fixture files (JSON arrays of per-question scores); repeatable.
    #[arg(long, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    /// Row labels, one per dataset or score fixture.
    #[arg(long)]
    pub title: Vec<String>,
    /// Comma-separated approaches (fusion, rewrite, rewrite+gate).
    #[arg(long)]
    pub approaches: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Write the machine-readable report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Worker threads; defaults to the number of processors.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCommand {
    /// Check a dataset against the schema and its declared statistics.
    Validate { path: PathBuf },
    /// Print question counts and chat lengths.
    Stats {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Write a seeded synthetic dataset.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// text-qa or text-to-vis
    #[arg(long)]
    pub task: TaskType,
    #[arg(long, default_value_t = 20)]
    pub conversations: usize,
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    #[arg(long, default_value_t = 10)]
    pub max_len: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Data file to write; a `.json` path writes a manifest plus data file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings read from the config file. Relative paths resolve against the
/// file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub provider: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub approach: Option<String>,
    #[serde(default)]
    pub verbose: bool,
}

impl CliConfig {
    /// Finds and loads the config. An explicitly named file (flag or env
    /// var) must exist; the per-user default is optional. Every path the
    /// config mentions is checked here.
    pub fn discover(flag: Option<&Path>) -> Result<Self, CliError> {
        let explicit = flag
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
        let path = match explicit {
            Some(p) => {
                if !p.is_file() {
                    return Err(CliError::Config(format!("config file {} does not exist", p.display())));
                }
                p
            }
            None => match default_config_path() {
                Some(p) if p.is_file() => p,
                _ => return Ok(Self::default()),
            },
        };
        Self::load(&path)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: CliConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.provider, &mut config.templates].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                return Err(CliError::Config(format!(
                    "{} names {}, which does not exist",
                    path.display(),
                    p.display()
                )));
            }
        }
        Ok(config)
    }
}

fn default_config_path() -> Option<PathBuf> {
    let home = std::env::var_os("HOME")?;
    Some(PathBuf::from(home).join(".config/qfusion/config.toml"))
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} {} does not exist", path.display())))
    }
}

fn build_model(args: &ModelArgs, config: &CliConfig) -> Result<Arc<dyn GenerativeModelProvider>, CliError> {
    if let Some(kind) = args.mock {
        return Ok(match kind {
            MockKind::Identity => Arc::new(IdentityMock),
            MockKind::Rule => Arc::new(RuleFusionMock::default()),
        });
    }
    if let Some(path) = &args.script {
        require_file(path, "script")?;
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mock: ScriptedMock =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Ok(Arc::new(mock));
    }
    let path = args.provider_config.as_ref().or(config.provider.as_ref()).ok_or_else(|| {
        CliError::Config("no model configured; pass --mock, --script or --provider-config".into())
    })?;
    require_file(path, "provider config")?;
    let provider_config = HttpProviderConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?;
    let provider = HttpProvider::new(provider_config).map_err(|e| match e {
        ProviderError::Auth(m) => CliError::Config(m),
        other => CliError::Config(other.to_string()),
    })?;
    Ok(Arc::new(provider))
}

fn build_templates(args: &ModelArgs, config: &CliConfig) -> Result<TemplateRegistry, CliError> {
    match args.templates.as_ref().or(config.templates.as_ref()) {
        Some(path) => {
            require_file(path, "template manifest")?;
            TemplateRegistry::load_manifest(path).map_err(|e| CliError::Config(e.to_string()))
        }
        None => Ok(TemplateRegistry::builtin()),
    }
}

/// Resolves the rewrite config. Without an explicit approach, the
/// template's declared default applies (fusion for text-to-vis, rewrite for
/// text-QA).
fn resolve_config(
    args: &ApproachArgs,
    config: &CliConfig,
    templates: &TemplateRegistry,
) -> Result<RewriteConfig, CliError> {
    let template_id = args
        .template
        .clone()
        .unwrap_or_else(|| TaskType::TextToVis.template_id().to_string());
    let template = templates.get(&template_id).map_err(|e| CliError::Config(e.to_string()))?;
    let approach = args
        .approach
        .clone()
        .or_else(|| config.approach.clone())
        .or_else(|| template.default_approach().map(str::to_string))
        .unwrap_or_else(|| "fusion".into());
    let mut rc = match approach.as_str() {
        "fusion" | "query_fusion" => RewriteConfig::query_fusion(),
        "rewrite" | "query_rewrite" => RewriteConfig::query_rewrite(),
        "rewrite+gate" | "query_rewrite+gate" => RewriteConfig::query_rewrite().with_gate(true),
        other => {
            return Err(CliError::Config(format!(
                "unknown approach '{other}' (expected fusion, rewrite or rewrite+gate)"
            )))
        }
    }
    .with_template(template_id);
    if args.gate {
        rc = rc.with_gate(true);
    }
    if let Some(k) = args.k {
        rc = rc.with_k(k);
    }
    rc.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(rc)
}

fn load_session(path: Option<&Path>) -> Result<ConversationSession, CliError> {
    let Some(path) = path else {
        return Ok(ConversationSession::with_timestamp("cli", DateTime::UNIX_EPOCH));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn describe_outcome(outcome: &RewriteOutcome) -> String {
    let mut s = String::new();
    if outcome.context_used.is_empty() {
        s.push_str("context: (none)\n");
    }
    for (item, idx) in outcome.context_used.items.iter().zip(&outcome.context_used.source_indices) {
        s.push_str(&format!("context[{idx}]: {}\n", item.query));
        if let Some(r) = &item.response {
            s.push_str(&format!("context[{idx}] response: {r}\n"));
        }
    }
    match &outcome.gate_decision {
        Some(d) => s.push_str(&format!(
            "gate: needs_rewrite={} confidence={:.2} ({:?}){}\n",
            d.needs_rewrite,
            d.confidence,
            d.rationale_tag,
            if outcome.was_gated { ", model skipped" } else { "" }
        )),
        None => s.push_str("gate: off\n"),
    }
    s
}

fn cmd_rewrite(args: &RewriteArgs, config: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if args.query.trim().is_empty() {
        return Err(CliError::Input("query is empty".into()));
    }
    let templates = build_templates(&args.model, config)?;
    let rc = resolve_config(&args.approach, config, &templates)?;
    let model = build_model(&args.model, config)?;
    let session = load_session(args.history.as_deref())?;
    let engine = RewriteEngine::new(model).with_templates(templates);
    let outcome = engine.rewrite(&session, &args.query, &rc)?;
    if args.verbose || config.verbose {
        eprint!("{}", describe_outcome(&outcome));
    }
    writeln!(out, "{}", outcome.rewritten_query).map_err(io_err)?;
    Ok(())
}

fn io_err(e: io::Error) -> CliError {
    if e.kind() == io::ErrorKind::BrokenPipe {
        return CliError::OutputClosed;
    }
    CliError::Input(e.to_string())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ChatOptions {
    /// Print a `> ` prompt before each line.
    pub prompt: bool,
    /// Print context and gate details to the error stream.
    pub verbose: bool,
}

/// Reads one query per line. Blank lines are skipped and `:reset` clears
/// the session. Provider errors are reported and the session continues.
pub fn chat_loop(
    engine: &RewriteEngine,
    rc: &RewriteConfig,
    mut session: ConversationSession,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
    options: ChatOptions,
) -> Result<ConversationSession, CliError> {
    let mut line = String::new();
    loop {
        if options.prompt {
            write!(out, "> ").map_err(io_err)?;
            out.flush().map_err(io_err)?;
        }
        line.clear();
        if input.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        let query = line.trim();
        if query.is_empty() {
            continue;
        }
        if query == ":reset" {
            session = session.reset();
            continue;
        }
        match engine.advance_session(&session, query, None, rc) {
            Ok((next, outcome)) => {
                if options.verbose {
                    write!(err, "{}", describe_outcome(&outcome)).map_err(io_err)?;
                }
                writeln!(out, "{}", outcome.rewritten_query).map_err(io_err)?;
                session = next;
            }
            Err(e) => writeln!(err, "error: {e}").map_err(io_err)?,
        }
    }
    Ok(session)
}

fn cmd_chat(args: &ChatArgs, config: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let templates = build_templates(&args.model, config)?;
    let rc = resolve_config(&args.approach, config, &templates)?;
    let model = build_model(&args.model, config)?;
    let session = load_session(args.history.as_deref())?;
    let engine = RewriteEngine::new(model).with_templates(templates);
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let session = chat_loop(
        &engine,
        &rc,
        session,
        &mut stdin.lock(),
        out,
        &mut io::stderr(),
        ChatOptions {
            prompt: interactive,
            verbose: args.verbose || config.verbose,
        },
    )?;
    if let Some(path) = &args.save {
        let json = serde_json::to_string_pretty(&session).expect("session serializes");
        fs::write(path, json + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs, config: &CliConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let reports = if let Some(path) = &args.dataset {
        let dataset = load_dataset(path).map_err(|e| match e {
            DatasetError::Schema(s) => CliError::Config(format!("dataset failed validation: {s}")),
            other => other.into(),
        })?;
        let approaches = Approach::parse_list(args.approaches.as_deref().unwrap_or("fusion,rewrite"), dataset.task_type)?;
        let templates = build_templates(&args.model, config)?;
        let model = build_model(&args.model, config)?;
        let engine = RewriteEngine::new(model).with_templates(templates);
        let mut report = run_eval(
            &dataset,
            &approaches,
            &engine,
            &HashEmbedder::default(),
            &EvalOptions { jobs: args.jobs },
        )?;
        report.title = args.title.first().cloned();
        vec![report]
    } else {
        let keep: Option<Vec<String>> = args.approaches.as_deref().map(|list| {
            list.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| match s.trim() {
                    "fusion" => "query_fusion".to_string(),
                    "rewrite" => "query_rewrite".to_string(),
                    "rewrite+gate" => "query_rewrite+gate".to_string(),
                    other => other.to_string(),
                })
                .collect()
        });
        let mut reports = Vec::new();
        for (i, path) in args.scores.iter().enumerate() {
            let mut scores = load_score_fixture(path)?;
            if let Some(keep) = &keep {
                scores.retain(|s| keep.contains(&s.approach_id));
            }
            let id = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let ids = keep.clone().unwrap_or_default();
            let mut report = EvalReport::from_scores(id, &ids, scores, Vec::new(), ReportMetadata::new(Vec::new()));
            report.title = args.title.get(i).cloned();
            reports.push(report);
        }
        reports
    };

    write!(out, "{}", render_table(&reports)).map_err(io_err)?;
    let gains: String = reports.iter().map(render_gains).collect();
    if !gains.is_empty() {
        write!(out, "\n{gains}").map_err(io_err)?;
    }
    for r in &reports {
        for f in &r.failures {
            eprintln!(
                "warning: {} / {} aborted at turn {}: {}",
                f.conversation_id, f.approach_id, f.turn_index, f.error
            );
        }
    }
    if let Some(path) = &args.report {
        let json = if reports.len() == 1 {
            reports[0].to_json()
        } else {
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        };
        fs::write(path, json + "\n").map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_dataset(command: &DatasetCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        DatasetCommand::Validate { path } => {
            let dataset = load_dataset(path)?;
            let stats = dataset.compute_stats();
            writeln!(
                out,
                "{}: ok ({} conversations, {} questions)",
                path.display(),
                dataset.conversations.len(),
                stats.n_questions
            )
            .map_err(io_err)?;
        }
        DatasetCommand::Stats { paths } => {
            let mut rows = vec![[
                "Dataset".to_string(),
                "# Questions".into(),
                "# Questions with Chat History".into(),
                "Chat Length".into(),
                "# Question Types".into(),
            ]];
            for path in paths {
                let d = load_dataset(path)?;
                let s = d.compute_stats();
                rows.push([
                    d.dataset_id.clone(),
                    s.n_questions.to_string(),
                    s.n_with_history.to_string(),
                    s.chat_length.map_or_else(|| "-".into(), |c| c.to_string()),
                    match s.n_distinct_intents {
                        0 => "-".to_string(),
                        n => n.to_string(),
                    },
                ]);
            }
            let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
            for row in &rows {
                let cells: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (cell, w))| if i == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                    .collect();
                writeln!(out, "{}", cells.join(" | ").trim_end()).map_err(io_err)?;
            }
        }
        DatasetCommand::Generate(g) => {
            if g.min_len == 0 || g.min_len > g.max_len {
                return Err(CliError::Input(format!(
                    "invalid length range {}..{}",
                    g.min_len, g.max_len
                )));
            }
            let profile = GenerationProfile::new(g.task, g.conversations, (g.min_len, g.max_len), g.seed);
            let dataset = generate_synthetic(&profile);
            if g.out.extension().is_some_and(|e| e == "json") {
                dataset.save_with_manifest(&g.out)?;
            } else {
                dataset.save(&g.out)?;
            }
            let s = dataset.compute_stats();
            writeln!(
                out,
                "wrote {} ({} conversations, {} questions)",
                g.out.display(),
                dataset.conversations.len(),
                s.n_questions
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Runs a parsed command, writing primary output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Command::Dataset(d) = &cli.command {
        return cmd_dataset(d, out);
    }
    let config = CliConfig::discover(cli.config.as_deref())?;
    match &cli.command {
        Command::Rewrite(a) => cmd_rewrite(a, &config, out),
        Command::Chat(a) => cmd_chat(a, &config, out),
        Command::Eval(a) => cmd_eval(a, &config, out),
        Command::Dataset(_) => unreachable!("handled above"),
    }
}

/// Entry point for the binary: parses arguments, runs, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) | Err(CliError::OutputClosed) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("qfusion: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approach_args(approach: Option<&str>, template: Option<&str>) -> ApproachArgs {
        ApproachArgs {
            approach: approach.map(str::to_string),
            template: template.map(str::to_string),
            k: None,
            gate: false,
        }
    }

    #[test]
    fn template_picks_default_approach() {
        let t = TemplateRegistry::builtin();
        let c = CliConfig::default();
        assert!(resolve_config(&approach_args(None, None), &c, &t).unwrap().is_fusion());
        assert!(!resolve_config(&approach_args(None, Some("text-qa")), &c, &t).unwrap().is_fusion());
        let forced = resolve_config(&approach_args(Some("fusion"), Some("text-qa")), &c, &t).unwrap();
        assert!(forced.is_fusion());
        assert_eq!(forced.prompt_template_id, "text-qa");
        assert!(resolve_config(&approach_args(Some("nope"), None), &c, &t).is_err());
    }

    #[test]
    fn chat_loop_skips_blank_and_resets() {
        let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
        let rc = RewriteConfig::query_fusion();
        let mut input = io::Cursor::new("compare revenue by country\n\n  \nyearly\n:reset\nyearly\n");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let session = chat_loop(
            &engine,
            &rc,
            ConversationSession::new("t"),
            &mut input,
            &mut out,
            &mut err,
            ChatOptions::default(),
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "compare revenue by country\ncompare yearly revenue by country\nyearly\n"
        );
        assert_eq!(session.len(), 1);
    }

    #[test]
    fn missing_config_file_is_config_error() {
        let e = CliConfig::discover(Some(Path::new("/nonexistent/qfusion.toml"))).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
