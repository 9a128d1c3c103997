//! Aggregates precomputed per-question scores into a comparison table.
//!
//!     cargo run --example report_from_scores

use std::path::Path;

use qfusion::eval::{load_score_fixture, render_gains, render_table, EvalReport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scores");
    let mut reports = Vec::new();
    for (file, title) in [
        ("text_qa.json", "Text-based Q&A"),
        ("vis_long.json", "Text-to-Vis (long conv.)"),
        ("vis_short.json", "Text-to-Vis (short conv.)"),
    ] {
        let scores = load_score_fixture(dir.join(file))?;
        reports.push(EvalReport::from_fixture(file, scores).with_title(title));
    }
    print!("{}", render_table(&reports));
    println!();
    for r in &reports {
        print!("{}", render_gains(r));
    }
    Ok(())
}
