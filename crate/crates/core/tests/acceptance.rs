//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qfusion::datasets::{generate_synthetic, load_dataset, GenerationProfile, TaskType};
use qfusion::engine::{
    build_context, classify_needs_rewrite, FixedGate, GateDecision, GateTag, HeuristicGate, RewriteEngine,
};
use qfusion::eval::{
    bert_f1, cosine_similarity, harmonic_mean, load_score_fixture, run_eval, Approach, EvalOptions, EvalReport,
    Metric,
};
use qfusion::model::{Context, ConversationSession, HistoryEntry, RewriteConfig, Turn, WindowBound};
use qfusion::providers::{EmbeddingProvider, GenerativeModelProvider, HashEmbedder, RuleFusionMock};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn fusion_trace(model: Arc<dyn GenerativeModelProvider>) -> Result<usize, String> {
    let engine = RewriteEngine::new(model);
    let config = RewriteConfig::query_fusion();
    let expected = common::revenue_chat_rewrites();
    let mut session = ConversationSession::new("revenue_chat");
    let mut matched = 0;
    for (i, q) in common::revenue_chat_inputs().iter().enumerate() {
        let (next, out) = engine
            .advance_fusion_session(&session, q, None, &config)
            .map_err(|e| format!("row {}: {e}", i + 1))?;
        ensure!(
            out.rewritten_query == expected[i],
            "row {}: got {:?}, want {:?}",
            i + 1,
            out.rewritten_query,
            expected[i]
        );
        matched += 1;
        session = next;
    }
    Ok(matched)
}

fn golden_fusion_trace() -> Outcome {
    let start = Instant::now();
    let rule = fusion_trace(Arc::new(RuleFusionMock::default()))?;
    let scripted = fusion_trace(Arc::new(common::revenue_chat_script()))?;
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("rule mock {rule}/10, scripted mock {scripted}/10 in {elapsed:?}"))
}

fn context_window_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0_47E7);
    for case in 0..1000 {
        let t = rng.random_range(1..=50usize);
        let k = rng.random_range(0..=10usize);
        let literal = rng.random_bool(0.5);
        let bound = if literal { WindowBound::AlgorithmLiteral } else { WindowBound::LastK };
        let history: Vec<HistoryEntry> = (1..=t)
            .map(|i| HistoryEntry::new(i, format!("q{i}-{}", rng.random::<u32>()), Some(format!("r{i}"))))
            .collect();
        let ctx = build_context(&history, k, true, bound);
        let size = if literal { (k + 1).min(t) } else { k.min(t) };
        ensure!(ctx.len() == size, "case {case}: t={t} k={k} {bound:?}: size {} != {size}", ctx.len());
        let slice = &history[t - size..];
        for (j, (item, idx)) in ctx.items.iter().zip(&ctx.source_indices).enumerate() {
            ensure!(
                *idx == slice[j].turn_index && item.query == slice[j].query && item.response == slice[j].response,
                "case {case}: item {j} is turn {idx}, expected turn {}",
                slice[j].turn_index
            );
        }
        ensure!(
            ctx.source_indices.windows(2).all(|w| w[0] < w[1]),
            "case {case}: indices not ascending"
        );
    }
    Ok("1000 random cases over both bounds".into())
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        if v.iter().any(|x| x.abs() > 1e-3) {
            return v;
        }
    }
}

const WORDS: [&str; 24] = [
    "compare", "revenue", "orders", "country", "region", "monthly", "yearly", "bar", "line", "chart", "top", "5",
    "pageviews", "channel", "show", "only", "this", "month", "by", "as", "what", "about", "sessions", "profit",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=8);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn metric_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3E7_81C5);
    let e = HashEmbedder::default();
    let mut disjoint_checked = 0;
    for case in 0..1000 {
        let d = rng.random_range(2..=32);
        let (a, b) = (random_vec(&mut rng, d), random_vec(&mut rng, d));
        let ab = cosine_similarity(&a, &b).map_err(|e| e.to_string())?.value;
        let ba = cosine_similarity(&b, &a).map_err(|e| e.to_string())?.value;
        ensure!(ab == ba, "case {case}: asymmetric {ab} vs {ba}");
        ensure!((-1.0..=1.0).contains(&ab), "case {case}: out of range {ab}");
        let s = rng.random_range(0.01..100.0);
        let scaled: Vec<f64> = b.iter().map(|x| x * s).collect();
        let abs = cosine_similarity(&a, &scaled).unwrap().value;
        ensure!((abs - ab).abs() < 1e-9, "case {case}: not scale invariant");
        let aa = cosine_similarity(&a, &a).unwrap().value;
        ensure!((aa - 1.0).abs() < 1e-12, "case {case}: self cosine {aa}");
        // Remove a's component from b to get an orthogonal vector.
        let proj = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / a.iter().map(|x| x * x).sum::<f64>();
        let orth: Vec<f64> = b.iter().zip(&a).map(|(y, x)| y - proj * x).collect();
        if orth.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            let o = cosine_similarity(&a, &orth).unwrap().value;
            ensure!(o.abs() < 1e-9, "case {case}: orthogonal cosine {o}");
        }

        let (t1, t2) = (random_text(&mut rng), random_text(&mut rng));
        let same = bert_f1(&t1, &t1, &e).map_err(|e| e.to_string())?;
        ensure!(same.f1 == 1.0, "case {case}: bert_f1(a, a) = {}", same.f1);
        let pair = bert_f1(&t1, &t2, &e).unwrap();
        ensure!(
            (pair.f1 - harmonic_mean(pair.precision, pair.recall)).abs() < 1e-12
                && (pair.precision + pair.recall == 0.0
                    || (pair.f1 - 2.0 * pair.precision * pair.recall / (pair.precision + pair.recall)).abs()
                        < 1e-12),
            "case {case}: harmonic mean identity"
        );
        ensure!((0.0..=1.0).contains(&pair.f1), "case {case}: f1 out of range");

        // Token-disjoint texts whose buckets are verified not to collide.
        let left: BTreeSet<&str> = (0..3).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
        let right: BTreeSet<&str> = WORDS.iter().copied().filter(|w| !left.contains(w)).take(3).collect();
        let lb: BTreeSet<usize> = left.iter().map(|t| e.bucket_of(t)).collect();
        let rb: BTreeSet<usize> = right.iter().map(|t| e.bucket_of(t)).collect();
        if lb.is_disjoint(&rb) {
            let l = left.iter().copied().collect::<Vec<_>>().join(" ");
            let r = right.iter().copied().collect::<Vec<_>>().join(" ");
            let f = bert_f1(&l, &r, &e).unwrap();
            ensure!(f.f1 == 0.0, "case {case}: disjoint {l:?} / {r:?} gave f1 {}", f.f1);
            let c = cosine_similarity(&e.embed(&l).unwrap().vector, &e.embed(&r).unwrap().vector).unwrap();
            ensure!(c.value == 0.0, "case {case}: disjoint cosine {}", c.value);
            disjoint_checked += 1;
        }
    }
    ensure!(disjoint_checked >= 900, "only {disjoint_checked} collision-free disjoint pairs");
    Ok(format!("1000 cases, {disjoint_checked} collision-free disjoint pairs"))
}

fn fixture_report(name: &str) -> Result<EvalReport, String> {
    let scores = load_score_fixture(common::fixture(&format!("scores/{name}"))).map_err(|e| e.to_string())?;
    Ok(EvalReport::from_fixture(name, scores))
}

fn check_means(r: &EvalReport, approach: &str, cos: f64, f1: f64) -> Result<(), String> {
    let a = r.aggregate(approach).ok_or(format!("{}: no {approach}", r.dataset_id))?;
    let (c, f) = (a.all.mean_cosine.unwrap_or(f64::NAN), a.all.mean_bert_f1.unwrap_or(f64::NAN));
    ensure!(
        (c - cos).abs() <= 0.001 && (f - f1).abs() <= 0.001,
        "{} {approach}: {c:.4}/{f:.4}, want {cos}/{f1}",
        r.dataset_id
    );
    Ok(())
}

fn gain(r: &EvalReport, a: &str, b: &str, m: Metric) -> Result<f64, String> {
    r.gain(a, b, m)
        .map(|g| g.aggregate_gain_pct)
        .ok_or(format!("{}: no gain {a} over {b}", r.dataset_id))
}

fn reporting_fixture() -> Outcome {
    let qa = fixture_report("text_qa.json")?;
    let long = fixture_report("vis_long.json")?;
    let short = fixture_report("vis_short.json")?;
    check_means(&qa, "query_fusion", 0.826, 0.751)?;
    check_means(&qa, "query_rewrite", 0.859, 0.828)?;
    check_means(&long, "query_fusion", 0.820, 0.773)?;
    check_means(&long, "query_rewrite", 0.760, 0.734)?;
    check_means(&short, "query_fusion", 0.925, 0.856)?;
    check_means(&short, "query_rewrite", 0.857, 0.837)?;

    let (fu, rw) = ("query_fusion", "query_rewrite");
    let stated = [
        (gain(&qa, rw, fu, Metric::Cosine)?, 3.9),
        (gain(&qa, rw, fu, Metric::BertF1)?, 9.8),
        (gain(&long, fu, rw, Metric::Cosine)?, 7.6),
        (gain(&long, fu, rw, Metric::BertF1)?, 5.2),
    ];
    for (got, want) in stated {
        ensure!(got > 0.0, "gain sign: {got:.2}% (stated {want}%)");
        ensure!((got - want).abs() <= 1.0, "gain {got:.2}% not within 1pp of {want}%");
    }
    for m in [Metric::Cosine, Metric::BertF1] {
        ensure!(gain(&short, fu, rw, m)? > 0.0, "short vis: fusion should win on {m:?}");
    }
    let shown: Vec<String> = stated.iter().map(|(g, _)| format!("{g:.2}%")).collect();
    Ok(format!("fixture means within 0.001, gains {}", shown.join(" / ")))
}

struct Arbitrary;

impl GenerativeModelProvider for Arbitrary {
    fn generate(&self, _prompt: &str) -> Result<String, qfusion::providers::ProviderError> {
        Ok("model output that must never appear".into())
    }

    fn descriptor(&self) -> qfusion::providers::ProviderDescriptor {
        qfusion::providers::ProviderDescriptor {
            provider_id: "arbitrary".into(),
            model_name: "arbitrary".into(),
            deterministic: true,
        }
    }
}

fn random_query(rng: &mut ChaCha8Rng) -> String {
    const CHARS: &[char] = &['a', 'z', 'Q', ' ', '-', '?', '"', '\'', 'é', '漢', '\t', '5', ',', '.', '😀'];
    loop {
        let n = rng.random_range(1..=40);
        let s: String = (0..n).map(|_| *CHARS.choose(rng).unwrap()).collect();
        if !s.trim().is_empty() {
            return s;
        }
    }
}

fn gate_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6A7E);
    let engine = RewriteEngine::new(Arc::new(Arbitrary))
        .with_gate(Arc::new(FixedGate(GateDecision::self_contained(1.0))));
    let heuristic = HeuristicGate::default();
    for case in 0..500 {
        let mut session = ConversationSession::new("g");
        for i in 1..=rng.random_range(1..=6) {
            session = session
                .push(Turn::new(i, random_text(&mut rng)).unwrap().with_rewritten_query(random_text(&mut rng)))
                .unwrap();
        }
        let query = random_query(&mut rng);
        for config in [RewriteConfig::query_rewrite(), RewriteConfig::query_fusion()] {
            let out = engine
                .rewrite(&session, &query, &config.with_gate(true))
                .map_err(|e| format!("case {case}: {e}"))?;
            ensure!(
                out.was_gated && out.rewritten_query.as_bytes() == query.as_bytes(),
                "case {case}: {query:?} became {:?}",
                out.rewritten_query
            );
        }
        let d = classify_needs_rewrite(&query, &Context::empty(), &heuristic).unwrap();
        ensure!(
            !d.needs_rewrite && d.rationale_tag == GateTag::EmptyHistory,
            "case {case}: empty history gave {d:?}"
        );
    }
    Ok("500 random queries byte-identical; empty history never rewrites".into())
}

fn synthetic_eval() -> Outcome {
    let start = Instant::now();
    let d = generate_synthetic(&GenerationProfile::new(TaskType::TextToVis, 20, (10, 10), 7));
    let s = d.compute_stats();
    ensure!(s.n_questions == 200, "generated {} questions", s.n_questions);
    let engine = RewriteEngine::new(Arc::new(RuleFusionMock::default()));
    let r = run_eval(
        &d,
        &[Approach::fusion(d.task_type), Approach::rewrite(d.task_type)],
        &engine,
        &HashEmbedder::default(),
        &EvalOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let f = &r.aggregate("query_fusion").unwrap().all;
    let w = &r.aggregate("query_rewrite").unwrap().all;
    let (fc, ff) = (f.mean_cosine.unwrap(), f.mean_bert_f1.unwrap());
    let (wc, wf) = (w.mean_cosine.unwrap(), w.mean_bert_f1.unwrap());
    ensure!(f.n == 200 && r.failures.is_empty(), "n={} failures={:?}", f.n, r.failures);
    ensure!(format!("{fc:.3}") == "1.000" && format!("{ff:.3}") == "1.000", "fusion {fc}/{ff}");
    ensure!(wc < fc || wf < ff, "rewrite {wc}/{wf} not below fusion");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("fusion {fc:.3}/{ff:.3}, rewrite {wc:.3}/{wf:.3} in {elapsed:?}"))
}

fn brute_force(path: &Path) -> (usize, usize) {
    let mut n = 0;
    let mut hist = 0;
    for line in fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for q in v["questions"].as_array().unwrap() {
            n += 1;
            hist += usize::from(q["turn_index"].as_u64().unwrap() > 1);
        }
    }
    (n, hist)
}

fn dataset_stats() -> Outcome {
    let t1 = load_dataset(common::fixture("revenue_chat.json")).map_err(|e| e.to_string())?;
    let s = t1.compute_stats();
    ensure!((s.n_questions, s.n_with_history) == (10, 9), "revenue chat stats {s:?}");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xDA7A);
    for case in 0..100 {
        let task = if rng.random_bool(0.5) { TaskType::TextToVis } else { TaskType::TextQa };
        let lo = rng.random_range(1..=6);
        let profile = GenerationProfile::new(task, rng.random_range(0..=12), (lo, lo + rng.random_range(0..=8)), rng.random());
        let path = dir.path().join(format!("d{case}.jsonl"));
        generate_synthetic(&profile).save(&path).map_err(|e| e.to_string())?;
        let loaded = load_dataset(&path).map_err(|e| format!("case {case}: {e}"))?;
        let s = loaded.compute_stats();
        let bf = brute_force(&path);
        ensure!((s.n_questions, s.n_with_history) == bf, "case {case}: {s:?} vs brute force {bf:?}");
    }
    Ok("revenue chat fixture (10, 9); 100 random datasets agree with brute-force counts".into())
}

fn main() {
    let criteria: [(&str, Check); 7] = [
        ("golden fusion trace", golden_fusion_trace),
        ("context-window suite", context_window_suite),
        ("metric invariants", metric_invariants),
        ("reporting fixture", reporting_fixture),
        ("gate identity", gate_identity),
        ("self-consistent synthetic eval", synthetic_eval),
        ("dataset stats", dataset_stats),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
