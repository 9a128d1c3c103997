//! Cosine similarity and token-level BERT-style F1 between a gold rewrite
//! and a few candidates, using the built-in hashing embedder.
//!
//!     cargo run --example metrics

use qfusion::eval::score_question;
use qfusion::providers::HashEmbedder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let embedder = HashEmbedder::default();
    let gold = "compare this month pageviews and revenue by top-5 marketing channels as bar";
    for candidate in [
        gold,
        "compare this month pageviews by top-5 marketing channels as bar",
        "compare month over month pageviews and revenue by top-5 marketing channels as bar",
        "add revenue",
        "",
    ] {
        let s = score_question(gold, candidate, &embedder)?;
        println!(
            "cos {:.3}  P {:.3}  R {:.3}  F1 {:.3}{}  {candidate:?}",
            s.cosine,
            s.bert_precision.unwrap_or(0.0),
            s.bert_recall.unwrap_or(0.0),
            s.bert_f1,
            if s.degenerate { " (degenerate)" } else { "" },
        );
    }
    Ok(())
}
