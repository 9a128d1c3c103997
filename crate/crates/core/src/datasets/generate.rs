//! Seeded synthetic corpora.
//!
//! Text-to-vis conversations start from a random analytics question and
//! apply random edits from the fusion grammar; each gold rewrite is the
//! grammar's fusion of the previous gold with the new follow-up, so a
//! perfect fuser reproduces every gold exactly. Text-QA conversations are
//! built from question/answer/follow-up templates.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotatedQuestion, Conversation, Dataset, TaskType};
use crate::providers::rule_fusion::{rule_fuse_with, AnalyticsQuestion, EditKind, Lexicon};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationProfile {
    pub task_type: TaskType,
    pub n_conversations: usize,
    /// Inclusive range of questions per conversation.
    pub length_range: (usize, usize),
    pub edit_vocabulary: Vec<EditKind>,
    pub seed: u64,
    /// Exact per-conversation lengths; overrides `n_conversations` and
    /// `length_range` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
}

impl GenerationProfile {
    pub fn new(task_type: TaskType, n_conversations: usize, length_range: (usize, usize), seed: u64) -> Self {
        Self {
            task_type,
            n_conversations,
            length_range,
            edit_vocabulary: EditKind::ALL.to_vec(),
            seed,
            lengths: None,
        }
    }

    pub fn with_lengths(mut self, lengths: Vec<usize>) -> Self {
        self.n_conversations = lengths.len();
        self.lengths = Some(lengths);
        self
    }

    pub fn with_vocabulary(mut self, vocabulary: Vec<EditKind>) -> Self {
        self.edit_vocabulary = vocabulary;
        self
    }
}

pub fn generate_synthetic(profile: &GenerationProfile) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let lengths: Vec<usize> = match &profile.lengths {
        Some(l) => l.clone(),
        None => {
            let (lo, hi) = profile.length_range;
            let (lo, hi) = (lo.max(1), hi.max(lo.max(1)));
            (0..profile.n_conversations)
                .map(|_| rng.random_range(lo..=hi))
                .collect()
        }
    };
    let lexicon = Lexicon::default();
    let conversations = lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let id = format!("syn-{:04}", i + 1);
            let questions = match profile.task_type {
                TaskType::TextToVis => vis_conversation(&mut rng, len, &profile.edit_vocabulary, &lexicon),
                TaskType::TextQa => qa_conversation(&mut rng, len),
            };
            Conversation::new(id, questions)
        })
        .collect();
    let dataset_id = match profile.task_type {
        TaskType::TextToVis => format!("synthetic-vis-{}", profile.seed),
        TaskType::TextQa => format!("synthetic-qa-{}", profile.seed),
    };
    Dataset::new(dataset_id, profile.task_type, conversations)
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty choice")
}

fn pick_other<'a>(rng: &mut ChaCha8Rng, items: &'a [String], current: Option<&str>) -> Option<&'a String> {
    let candidates: Vec<&String> = items.iter().filter(|i| Some(i.as_str()) != current).collect();
    candidates.choose(rng).copied()
}

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

/// Produces a follow-up phrase for `kind` that changes `q`, or `None` if the
/// edit cannot change it.
fn followup(rng: &mut ChaCha8Rng, kind: EditKind, q: &AnalyticsQuestion, lex: &Lexicon) -> Option<String> {
    let phrase = match kind {
        EditKind::ReplaceGranularity => {
            let g = pick_other(rng, &lex.granularities, q.time.as_deref())?;
            let forms = [g.to_string(), format!("what about {g}"), format!("make it {g}"), format!("now {g}")];
            pick(rng, &forms).clone()
        }
        EditKind::SetTimeFilter => {
            let f = pick_other(rng, &lex.time_filters, q.time.as_deref())?;
            let forms = [format!("show only {f}"), format!("only {f}"), format!("what about {f}")];
            pick(rng, &forms).clone()
        }
        EditKind::SetChartType => {
            let surfaces: Vec<&(String, String)> = lex
                .charts
                .iter()
                .filter(|(_, c)| Some(c.as_str()) != q.chart.as_deref())
                .collect();
            let (s, _) = *surfaces.choose(rng)?;
            let forms = [
                format!("show it as {} {s}", article(s)),
                format!("as {s}"),
                format!("now as {} {s}", article(s)),
            ];
            pick(rng, &forms).clone()
        }
        EditKind::ReplaceDimension => {
            let d = pick_other(rng, &lex.dimensions, q.dimension.as_deref())?;
            let forms = [format!("now change to {d}"), format!("by {d}"), format!("switch to {d}")];
            pick(rng, &forms).clone()
        }
        EditKind::ReplaceMetric => {
            let current = (q.metrics.len() == 1).then(|| q.metrics[0].as_str());
            let m = pick_other(rng, &lex.metrics, current)?;
            let forms = [format!("replace with {m}"), format!("show {m} instead"), format!("switch to {m}")];
            pick(rng, &forms).clone()
        }
        EditKind::AddMetric => {
            if q.metrics.len() >= 3 {
                return None;
            }
            let fresh: Vec<&String> = lex.metrics.iter().filter(|m| !q.metrics.contains(m)).collect();
            let m = fresh.choose(rng)?;
            let forms = [format!("add {m}"), format!("also show {m}"), format!("include {m}")];
            pick(rng, &forms).clone()
        }
        EditKind::SetTopK => {
            let ks: Vec<u32> = [3, 5, 10, 20].into_iter().filter(|k| Some(*k) != q.top_k).collect();
            let k = ks.choose(rng)?;
            let forms = [format!("show top-{k}"), format!("what about top-{k}"), format!("only top {k}")];
            pick(rng, &forms).clone()
        }
    };
    Some(phrase)
}

fn vis_conversation(
    rng: &mut ChaCha8Rng,
    len: usize,
    vocabulary: &[EditKind],
    lex: &Lexicon,
) -> Vec<AnnotatedQuestion> {
    let mut base = AnalyticsQuestion::new(pick(rng, &["compare", "show"]), pick(rng, &lex.metrics));
    if rng.random_bool(0.7) {
        base.time = Some(pick(rng, &lex.granularities).clone());
    }
    base.dimension = Some(pick(rng, &lex.dimensions).clone());
    let first = base.render();
    let mut questions = vec![AnnotatedQuestion::new(1, first.clone())
        .with_gold(first.clone())
        .with_intent("new_question")];
    let mut gold = first;
    let vocabulary = if vocabulary.is_empty() { &EditKind::ALL[..] } else { vocabulary };
    for turn in 2..=len {
        let current = AnalyticsQuestion::parse(&gold, lex).expect("generated golds parse");
        let (kind, phrase) = loop {
            let kind = *pick(rng, vocabulary);
            if let Some(p) = followup(rng, kind, &current, lex) {
                break (kind, p);
            }
        };
        gold = rule_fuse_with(&gold, &phrase, lex);
        questions.push(
            AnnotatedQuestion::new(turn, phrase)
                .with_gold(gold.clone())
                .with_intent(kind.label()),
        );
    }
    questions
}

const FEATURES: [&str; 10] = [
    "streaming segmentation",
    "batch segmentation",
    "audience export",
    "data retention",
    "identity stitching",
    "scheduled reports",
    "alert rules",
    "dashboard sharing",
    "schema mapping",
    "consent policies",
];

/// (follow-up, gold, intent); `{f}` is the current feature, `{g}` another.
const QA_FOLLOWUPS: [(&str, &str, &str); 7] = [
    ("how does it differ from {g}", "how does {f} differ from {g}", "comparison"),
    ("how do I enable it", "how do I enable {f}", "how_to"),
    ("what are its limits", "what are the limits of {f}", "definition"),
    ("can I schedule it", "can I schedule {f}", "how_to"),
    ("who can access it", "who can access {f}", "definition"),
    ("does it work with {g}", "does {f} work with {g}", "comparison"),
    ("what about {g}", "what is {g}", "definition"),
];

fn qa_conversation(rng: &mut ChaCha8Rng, len: usize) -> Vec<AnnotatedQuestion> {
    let mut feature = *pick(rng, &FEATURES);
    let (opening, intent) = *pick(
        rng,
        &[
            ("what is {f}", "definition"),
            ("how do I set up {f}", "how_to"),
            ("where can I find {f}", "how_to"),
        ],
    );
    let first = opening.replace("{f}", feature);
    let mut questions = vec![AnnotatedQuestion::new(1, first.clone())
        .with_gold(first)
        .with_response(answer(feature))
        .with_intent(intent)];
    for turn in 2..=len {
        let other = *FEATURES
            .iter()
            .filter(|f| **f != feature)
            .collect::<Vec<_>>()
            .choose(rng)
            .expect("several features");
        let (q, g, intent) = *pick(rng, &QA_FOLLOWUPS);
        let query = q.replace("{g}", other);
        let gold = g.replace("{f}", feature).replace("{g}", other);
        if q.starts_with("what about") {
            feature = other;
        }
        questions.push(
            AnnotatedQuestion::new(turn, query)
                .with_gold(gold)
                .with_response(answer(feature))
                .with_intent(intent),
        );
    }
    questions
}

fn answer(feature: &str) -> String {
    format!("{feature} is configured from its settings page; see the {feature} guide for details.")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = GenerationProfile::new(TaskType::TextToVis, 4, (3, 8), 7);
        assert_eq!(generate_synthetic(&p), generate_synthetic(&p));
        let q = GenerationProfile::new(TaskType::TextToVis, 4, (3, 8), 8);
        assert_ne!(generate_synthetic(&p), generate_synthetic(&q));
    }

    #[test]
    fn profile_counts() {
        let d = generate_synthetic(&GenerationProfile::new(TaskType::TextToVis, 5, (10, 10), 1));
        let s = d.compute_stats();
        assert_eq!((s.n_questions, s.n_with_history), (50, 45));
        d.validate().unwrap();
    }

    #[test]
    fn every_followup_changes_the_gold() {
        let d = generate_synthetic(&GenerationProfile::new(TaskType::TextToVis, 30, (2, 10), 3));
        for c in &d.conversations {
            for w in c.questions.windows(2) {
                assert_ne!(w[0].gold_rewrite, w[1].gold_rewrite, "{:?}", w[1]);
                assert_ne!(w[1].gold_rewrite.as_deref(), Some(w[1].user_query.as_str()));
            }
        }
    }

    #[test]
    fn qa_has_three_intents_and_responses() {
        let d = generate_synthetic(
            &GenerationProfile::new(TaskType::TextQa, 0, (2, 5), 11).with_lengths(vec![5, 5, 4, 4]),
        );
        assert!(d.questions().all(|(_, q)| q.response.is_some() && q.gold_rewrite.is_some()));
        assert!(d.compute_stats().n_distinct_intents <= 3);
    }
}
