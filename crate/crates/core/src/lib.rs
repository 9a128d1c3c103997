//! Conversational query rewriting and query fusion.
//!
//! A follow-up question in a chat ("what about top-5") is turned into a
//! standalone one that a downstream retriever or chart generator can answer
//! without the conversation. Two strategies are provided:
//!
//! * query rewrite feeds the last `k` raw turns (questions and answers) to
//!   the model;
//! * query fusion feeds only the previous rewritten query and asks the model
//!   to merge the new question into it.
//!
//! [`engine::RewriteEngine`] runs either strategy against any
//! [`providers::GenerativeModelProvider`], [`eval`] scores rewrites against gold
//! annotations and [`datasets`] loads, validates and generates corpora.

pub mod cli;
pub mod datasets;
pub mod engine;
pub mod eval;
pub mod model;
pub mod providers;
