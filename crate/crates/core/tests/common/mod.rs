#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use qfusion::providers::ScriptedMock;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn lines(name: &str) -> Vec<String> {
    fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

/// The ten user inputs of the revenue/pageviews conversation.
pub fn revenue_chat_inputs() -> Vec<String> {
    lines("revenue_chat_inputs.txt")
}

/// The fused question after each input.
pub fn revenue_chat_rewrites() -> Vec<String> {
    lines("revenue_chat_rewrites.txt")
}

pub fn revenue_chat_script() -> ScriptedMock {
    serde_json::from_str(&fs::read_to_string(fixture("revenue_chat_script.json")).unwrap()).unwrap()
}
