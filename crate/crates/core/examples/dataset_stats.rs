//! Generates a small text-QA corpus, writes it with a manifest, reloads it
//! and prints its statistics.
//!
//!     cargo run --example dataset_stats

use qfusion::datasets::{generate_synthetic, load_dataset, GenerationProfile, TaskType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = GenerationProfile::new(TaskType::TextQa, 0, (2, 5), 11).with_lengths(vec![5, 5, 4, 4]);
    let dataset = generate_synthetic(&profile);

    let dir = tempfile::tempdir()?;
    let manifest = dir.path().join("support_qa.json");
    dataset.save_with_manifest(&manifest)?;
    let loaded = load_dataset(&manifest)?;
    assert_eq!(loaded.conversations, dataset.conversations);

    let stats = loaded.compute_stats();
    println!("questions:              {}", stats.n_questions);
    println!("with chat history:      {}", stats.n_with_history);
    println!("chat length:            {}", stats.chat_length.map(|c| c.to_string()).unwrap_or_default());
    println!("distinct intents:       {}", stats.n_distinct_intents);

    let first = &loaded.conversations[0];
    println!("\n{}:", first.conversation_id);
    for q in &first.questions {
        println!("  {}. {:<36} -> {}", q.turn_index, q.user_query, q.gold_rewrite.as_deref().unwrap_or("N/A"));
    }
    Ok(())
}
