//! A small edit grammar over analytics questions of the form
//!
//! ```text
//! <verb> [<time>] <metric> [and <metric>...] [by [top-N] <dimension>] [as <chart>]
//! ```
//!
//! Follow-ups such as "yearly", "show top-3", "replace with pageviews" or
//! "what about month over month as bar" are parsed into [`Edit`]s and
//! applied to the previous question. [`RuleFusionMock`] wraps this as a
//! deterministic generative model: it folds every context item of the
//! prompt into a running question and then applies the current query.

use serde::{Deserialize, Serialize};

use super::{GenerativeModelProvider, ProviderDescriptor, ProviderError};
use crate::engine::prompt::parse_transcript;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EditKind {
    ReplaceGranularity,
    SetChartType,
    ReplaceDimension,
    ReplaceMetric,
    AddMetric,
    SetTopK,
    SetTimeFilter,
}

impl EditKind {
    pub const ALL: [EditKind; 7] = [
        EditKind::ReplaceGranularity,
        EditKind::SetChartType,
        EditKind::ReplaceDimension,
        EditKind::ReplaceMetric,
        EditKind::AddMetric,
        EditKind::SetTopK,
        EditKind::SetTimeFilter,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EditKind::ReplaceGranularity => "replace_granularity",
            EditKind::SetChartType => "set_chart_type",
            EditKind::ReplaceDimension => "replace_dimension",
            EditKind::ReplaceMetric => "replace_metric",
            EditKind::AddMetric => "add_metric",
            EditKind::SetTopK => "set_top_k",
            EditKind::SetTimeFilter => "set_time_filter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edit {
    Granularity(String),
    TimeFilter(String),
    Chart(String),
    Dimension(String),
    Metric(String),
    AddMetric(String),
    TopK(u32),
}

impl Edit {
    pub fn kind(&self) -> EditKind {
        match self {
            Edit::Granularity(_) => EditKind::ReplaceGranularity,
            Edit::TimeFilter(_) => EditKind::SetTimeFilter,
            Edit::Chart(_) => EditKind::SetChartType,
            Edit::Dimension(_) => EditKind::ReplaceDimension,
            Edit::Metric(_) => EditKind::ReplaceMetric,
            Edit::AddMetric(_) => EditKind::AddMetric,
            Edit::TopK(_) => EditKind::SetTopK,
        }
    }
}

fn strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

/// Vocabulary of the edit grammar. All entries are lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub granularities: Vec<String>,
    pub time_filters: Vec<String>,
    pub metrics: Vec<String>,
    pub dimensions: Vec<String>,
    /// (surface form, canonical form)
    pub charts: Vec<(String, String)>,
    pub add_verbs: Vec<String>,
    pub leading_fillers: Vec<String>,
    pub trailing_fillers: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let charts = [
            ("bar", "bar"),
            ("bars", "bar"),
            ("bar chart", "bar"),
            ("bar graph", "bar"),
            ("line", "line chart"),
            ("line chart", "line chart"),
            ("line graph", "line chart"),
            ("pie", "pie chart"),
            ("pie chart", "pie chart"),
            ("table", "table"),
            ("scatter", "scatter plot"),
            ("scatter plot", "scatter plot"),
            ("area", "area chart"),
            ("area chart", "area chart"),
            ("stacked bar", "stacked bar"),
            ("histogram", "histogram"),
            ("heatmap", "heatmap"),
            ("map", "map"),
        ];
        Self {
            granularities: strings(&[
                "hourly",
                "daily",
                "weekly",
                "monthly",
                "quarterly",
                "yearly",
                "day over day",
                "week over week",
                "month over month",
                "quarter over quarter",
                "year over year",
            ]),
            time_filters: strings(&[
                "today",
                "yesterday",
                "this week",
                "last week",
                "this month",
                "last month",
                "this quarter",
                "last quarter",
                "this year",
                "last year",
                "last 7 days",
                "last 30 days",
                "last 90 days",
                "year to date",
            ]),
            metrics: strings(&[
                "revenue",
                "pageviews",
                "orders",
                "sales",
                "visits",
                "sessions",
                "profit",
                "conversions",
                "signups",
                "clicks",
                "bounce rate",
                "average order value",
                "units sold",
                "active users",
            ]),
            dimensions: strings(&[
                "country",
                "marketing channel",
                "region",
                "device",
                "browser",
                "product",
                "product category",
                "city",
                "campaign",
                "customer segment",
                "store",
                "traffic source",
            ]),
            charts: charts
                .iter()
                .map(|(s, c)| (s.to_string(), c.to_string()))
                .collect(),
            add_verbs: strings(&["also add", "also show", "add", "include", "plus"]),
            leading_fillers: strings(&[
                "now",
                "then",
                "ok",
                "okay",
                "and",
                "please",
                "can you",
                "what about",
                "how about",
                "show me",
                "show",
                "give me",
                "display",
                "plot",
                "it",
                "only",
                "just",
                "change it to",
                "change to",
                "change",
                "switch to",
                "switch",
                "replace it with",
                "replace with",
                "replace",
                "make it",
                "use",
                "with",
                "to",
                "by",
                "for",
                "instead",
            ]),
            trailing_fillers: strings(&["instead", "please", "too", "only"]),
        }
    }
}

impl Lexicon {
    fn chart(&self, surface: &str) -> Option<&str> {
        self.charts
            .iter()
            .find(|(s, _)| s == surface)
            .map(|(_, c)| c.as_str())
    }

    fn is_metric(&self, phrase: &str) -> bool {
        self.metrics.iter().any(|m| m == phrase)
    }

    fn dimension(&self, phrase: &str) -> Option<String> {
        if self.dimensions.iter().any(|d| d == phrase) {
            return Some(phrase.to_string());
        }
        let singular = singularize(phrase);
        self.dimensions.contains(&singular)
            .then_some(singular)
    }

    fn time_phrases(&self) -> impl Iterator<Item = &String> {
        self.granularities.iter().chain(self.time_filters.iter())
    }
}

fn map_last_word(phrase: &str, f: impl Fn(&str) -> String) -> String {
    match phrase.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", f(last)),
        None => f(phrase),
    }
}

fn pluralize(phrase: &str) -> String {
    map_last_word(phrase, |w| {
        let consonant_y = w.ends_with('y')
            && !w[..w.len() - 1].ends_with(['a', 'e', 'i', 'o', 'u']);
        if consonant_y {
            format!("{}ies", &w[..w.len() - 1])
        } else if w.ends_with(['s', 'x']) || w.ends_with("ch") || w.ends_with("sh") {
            format!("{w}es")
        } else {
            format!("{w}s")
        }
    })
}

fn singularize(phrase: &str) -> String {
    map_last_word(phrase, |w| {
        if let Some(stem) = w.strip_suffix("ies") {
            format!("{stem}y")
        } else if w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes") || w.ends_with("sses") {
            w[..w.len() - 2].to_string()
        } else if let Some(stem) = w.strip_suffix('s').filter(|s| !s.ends_with('s')) {
            stem.to_string()
        } else {
            w.to_string()
        }
    })
}

fn parse_top_k(token: &str) -> Option<u32> {
    token
        .strip_prefix("top-")
        .or_else(|| token.strip_prefix("top"))
        .and_then(|n| n.parse().ok())
        .filter(|n| *n > 0)
}

fn normalize(text: &str) -> Vec<String> {
    text.trim()
        .trim_end_matches(['?', '.', '!'])
        .replace(',', " , ")
        .split_whitespace()
        .map(str::to_lowercase)
        .collect()
}

fn starts_with_phrase(tokens: &[String], phrase: &str) -> Option<usize> {
    let words: Vec<&str> = phrase.split(' ').collect();
    (tokens.len() >= words.len() && tokens.iter().zip(&words).all(|(t, w)| t == w))
        .then_some(words.len())
}

/// Splits "top-3 marketing channels" / "top 3 ..." into (k, rest).
fn split_top_k(tokens: &[String]) -> Option<(u32, &[String])> {
    let first = tokens.first()?;
    if let Some(k) = parse_top_k(first) {
        return Some((k, &tokens[1..]));
    }
    if first == "top" {
        let k = tokens.get(1)?.parse().ok().filter(|k| *k > 0)?;
        return Some((k, &tokens[2..]));
    }
    None
}

/// A parsed analytics question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticsQuestion {
    pub verb: String,
    pub time: Option<String>,
    pub metrics: Vec<String>,
    pub dimension: Option<String>,
    pub top_k: Option<u32>,
    pub chart: Option<String>,
}

impl AnalyticsQuestion {
    pub fn new(verb: &str, metric: &str) -> Self {
        Self {
            verb: verb.to_string(),
            time: None,
            metrics: vec![metric.to_string()],
            dimension: None,
            top_k: None,
            chart: None,
        }
    }

    /// Parses a question; `None` if it has no metric.
    pub fn parse(text: &str, lexicon: &Lexicon) -> Option<Self> {
        let verb = text.split_whitespace().next()?.to_string();
        let tokens = normalize(text);
        let rest = tokens.get(1..)?;

        let (body, chart) = match rest.iter().rposition(|t| t == "as") {
            Some(i) => {
                let mut chart = &rest[i + 1..];
                if chart.first().is_some_and(|t| t == "a" || t == "an") {
                    chart = &chart[1..];
                }
                (&rest[..i], (!chart.is_empty()).then(|| chart.join(" ")))
            }
            None => (rest, None),
        };

        let (pre, dimension, top_k) = match body.iter().rposition(|t| t == "by") {
            Some(i) => {
                let after = &body[i + 1..];
                let (top_k, dim) = match split_top_k(after) {
                    Some((k, dim)) => (Some(k), singularize(&dim.join(" "))),
                    None => (None, after.join(" ")),
                };
                if dim.is_empty() {
                    return None;
                }
                (&body[..i], Some(dim), top_k)
            }
            None => (body, None, None),
        };

        let mut time = None;
        let mut metric_tokens = pre;
        let longest = lexicon
            .time_phrases()
            .filter_map(|p| starts_with_phrase(pre, p).map(|n| (n, p)))
            .max_by_key(|(n, _)| *n);
        if let Some((n, phrase)) = longest {
            time = Some(phrase.clone());
            metric_tokens = &pre[n..];
        }

        let metrics = split_list(metric_tokens);
        if metrics.is_empty() {
            return None;
        }
        Some(Self {
            verb,
            time,
            metrics,
            dimension,
            top_k,
            chart,
        })
    }

    pub fn render(&self) -> String {
        let mut parts = vec![self.verb.clone()];
        if let Some(t) = &self.time {
            parts.push(t.clone());
        }
        parts.push(join_metrics(&self.metrics));
        if let Some(d) = &self.dimension {
            parts.push("by".into());
            match self.top_k {
                Some(k) => parts.push(format!("top-{k} {}", pluralize(d))),
                None => parts.push(d.clone()),
            }
        }
        if let Some(c) = &self.chart {
            parts.push(format!("as {c}"));
        }
        parts.join(" ")
    }

    /// Applies `edits` in order. `None` when an edit does not fit the
    /// question (top-k without a dimension).
    pub fn apply(&self, edits: &[Edit]) -> Option<Self> {
        let mut q = self.clone();
        for edit in edits {
            match edit {
                Edit::Granularity(t) | Edit::TimeFilter(t) => q.time = Some(t.clone()),
                Edit::Chart(c) => q.chart = Some(c.clone()),
                Edit::Dimension(d) => q.dimension = Some(d.clone()),
                Edit::Metric(m) => q.metrics = vec![m.clone()],
                Edit::AddMetric(m) => {
                    if !q.metrics.contains(m) {
                        q.metrics.push(m.clone());
                    }
                }
                Edit::TopK(k) => {
                    q.dimension.as_ref()?;
                    q.top_k = Some(*k);
                }
            }
        }
        Some(q)
    }
}

/// Splits "a , b and c" into its items.
fn split_list(tokens: &[String]) -> Vec<String> {
    tokens
        .split(|t| t == "and" || t == ",")
        .filter(|part| !part.is_empty())
        .map(|part| part.join(" "))
        .collect()
}

fn join_metrics(metrics: &[String]) -> String {
    match metrics {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn classify_phrase(tokens: &[String], lexicon: &Lexicon) -> Option<Vec<Edit>> {
    if tokens.is_empty() {
        return Some(Vec::new());
    }
    let phrase = tokens.join(" ");
    if lexicon.granularities.contains(&phrase) {
        return Some(vec![Edit::Granularity(phrase)]);
    }
    if lexicon.time_filters.contains(&phrase) {
        return Some(vec![Edit::TimeFilter(phrase)]);
    }
    if let Some((k, rest)) = split_top_k(tokens) {
        let mut edits = Vec::new();
        if !rest.is_empty() {
            edits.push(Edit::Dimension(lexicon.dimension(&rest.join(" "))?));
        }
        edits.push(Edit::TopK(k));
        return Some(edits);
    }
    if lexicon.is_metric(&phrase) {
        return Some(vec![Edit::Metric(phrase)]);
    }
    lexicon.dimension(&phrase).map(|d| vec![Edit::Dimension(d)])
}

/// Parses a follow-up into edits. `None` if any part is not understood.
pub fn parse_followup(followup: &str, lexicon: &Lexicon) -> Option<Vec<Edit>> {
    let mut tokens = normalize(followup);
    if tokens.is_empty() {
        return None;
    }

    let mut add_verbs: Vec<&String> = lexicon.add_verbs.iter().collect();
    add_verbs.sort_by_key(|v| std::cmp::Reverse(v.len()));
    for verb in add_verbs {
        if let Some(n) = starts_with_phrase(&tokens, verb) {
            let edits: Option<Vec<Edit>> = split_list(&tokens[n..])
                .into_iter()
                .map(|m| lexicon.is_metric(&m).then_some(Edit::AddMetric(m)))
                .collect();
            return edits.filter(|e| !e.is_empty());
        }
    }

    let mut fillers: Vec<&String> = lexicon.leading_fillers.iter().collect();
    fillers.sort_by_key(|f| std::cmp::Reverse(f.len()));
    'strip: loop {
        for f in &fillers {
            if let Some(n) = starts_with_phrase(&tokens, f) {
                tokens.drain(..n);
                continue 'strip;
            }
        }
        break;
    }
    while tokens
        .last()
        .is_some_and(|t| lexicon.trailing_fillers.contains(t))
    {
        tokens.pop();
    }

    let (left, chart) = match tokens.iter().rposition(|t| t == "as") {
        Some(i) => {
            let mut c = &tokens[i + 1..];
            if c.first().is_some_and(|t| t == "a" || t == "an") {
                c = &c[1..];
            }
            let canonical = lexicon.chart(&c.join(" "))?;
            (&tokens[..i], Some(Edit::Chart(canonical.to_string())))
        }
        None => {
            // "line chart", "pie" without "as"
            let phrase = tokens.join(" ");
            if let Some(c) = lexicon.chart(&phrase).filter(|_| !lexicon.is_metric(&phrase)) {
                return Some(vec![Edit::Chart(c.to_string())]);
            }
            (&tokens[..], None)
        }
    };

    let mut edits = classify_phrase(left, lexicon)?;
    edits.extend(chart);
    (!edits.is_empty()).then_some(edits)
}

/// Merges `followup` into `base`.
///
/// An empty follow-up returns `base`; an empty base, an unparseable base or
/// a follow-up outside the grammar returns the follow-up unchanged.
pub fn rule_fuse_with(base: &str, followup: &str, lexicon: &Lexicon) -> String {
    let followup = followup.trim();
    let base = base.trim();
    if followup.is_empty() {
        return base.to_string();
    }
    if base.is_empty() {
        return followup.to_string();
    }
    parse_followup(followup, lexicon)
        .and_then(|edits| AnalyticsQuestion::parse(base, lexicon)?.apply(&edits))
        .map(|q| q.render())
        .unwrap_or_else(|| followup.to_string())
}

/// [`rule_fuse_with`] using the default lexicon.
pub fn rule_fuse(base: &str, followup: &str) -> String {
    rule_fuse_with(base, followup, &Lexicon::default())
}

/// Deterministic generative model backed by the edit grammar.
#[derive(Debug, Clone, Default)]
pub struct RuleFusionMock {
    pub lexicon: Lexicon,
}

impl RuleFusionMock {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon }
    }
}

impl GenerativeModelProvider for RuleFusionMock {
    fn generate(&self, prompt: &str) -> Result<String, ProviderError> {
        let transcript = parse_transcript(prompt);
        let query = transcript.query.ok_or_else(|| ProviderError::Malformed {
            detail: "prompt has no current-query line".into(),
            raw_body: prompt.to_string(),
        })?;
        let base = transcript
            .context
            .iter()
            .fold(String::new(), |acc, item| rule_fuse_with(&acc, &item.query, &self.lexicon));
        Ok(rule_fuse_with(&base, &query, &self.lexicon))
    }

    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor {
            provider_id: "rule-fusion-mock".into(),
            model_name: "analytics-edit-grammar".into(),
            deterministic: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_change_keeps_chart() {
        assert_eq!(
            rule_fuse("compare yearly revenue by country as line chart", "now change to marketing channel"),
            "compare yearly revenue by marketing channel as line chart"
        );
    }

    #[test]
    fn top_k_update() {
        let r3 = rule_fuse(
            "compare month over month pageviews by marketing channel as bar",
            "show top-3",
        );
        assert_eq!(r3, "compare month over month pageviews by top-3 marketing channels as bar");
        assert_eq!(
            rule_fuse(&r3, "what about top-5"),
            "compare month over month pageviews by top-5 marketing channels as bar"
        );
    }

    #[test]
    fn empty_followup_returns_base() {
        assert_eq!(rule_fuse("compare x by y", ""), "compare x by y");
        assert_eq!(rule_fuse("anything at all", "   "), "anything at all");
    }

    #[test]
    fn unrecognized_followup_echoes() {
        assert_eq!(
            rule_fuse("compare revenue by country", "how many orders shipped late"),
            "how many orders shipped late"
        );
        assert_eq!(rule_fuse("", "yearly"), "yearly");
        assert_eq!(rule_fuse("yearly", "show top-3"), "show top-3");
    }

    #[test]
    fn short_conversation_example() {
        assert_eq!(
            rule_fuse("Compare orders by country", "Show top-5 countries as bar chart"),
            "Compare orders by top-5 countries as bar"
        );
    }

    #[test]
    fn multi_metric_rendering() {
        let q = rule_fuse("compare revenue and orders by region", "add profit");
        assert_eq!(q, "compare revenue, orders and profit by region");
        let parsed = AnalyticsQuestion::parse(&q, &Lexicon::default()).unwrap();
        assert_eq!(parsed.metrics, vec!["revenue", "orders", "profit"]);
    }

    #[test]
    fn top_k_without_dimension_is_not_applicable() {
        assert_eq!(rule_fuse("show revenue", "top-5"), "top-5");
    }

    #[test]
    fn plural_forms() {
        assert_eq!(pluralize("country"), "countries");
        assert_eq!(pluralize("marketing channel"), "marketing channels");
        assert_eq!(pluralize("browser"), "browsers");
        assert_eq!(pluralize("day"), "days");
        assert_eq!(singularize("countries"), "country");
        assert_eq!(singularize("marketing channels"), "marketing channel");
        assert_eq!(singularize("traffic sources"), "traffic source");
    }

    #[test]
    fn parse_render_round_trip() {
        let lex = Lexicon::default();
        for q in [
            "compare this month pageviews and revenue by top-5 marketing channels as bar",
            "compare monthly revenue by country",
            "show revenue",
            "compare year over year sales by top-10 cities as table",
        ] {
            assert_eq!(AnalyticsQuestion::parse(q, &lex).unwrap().render(), q);
        }
    }
}
