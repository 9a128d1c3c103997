//! Shows which history items each window bound hands to the model.
//!
//!     cargo run --example window_bounds

use qfusion::engine::build_context;
use qfusion::model::{HistoryEntry, WindowBound};

fn main() {
    let history: Vec<HistoryEntry> = (1..=10)
        .map(|i| HistoryEntry::new(i, format!("question {i}"), Some(format!("answer {i}"))))
        .collect();
    for k in [0, 1, 5, 12] {
        for bound in [WindowBound::LastK, WindowBound::AlgorithmLiteral] {
            let ctx = build_context(&history, k, true, bound);
            println!("k={k:<2} {bound:<16?} -> turns {:?}", ctx.source_indices);
        }
    }
}
