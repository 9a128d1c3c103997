//! Similarity metrics between a gold rewrite and a predicted one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::providers::{EmbeddingProvider, ProviderError, TokenEmbeddings};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub value: f64,
    /// Set when either vector is all zeros; `value` is then 0.
    pub degenerate: bool,
}

/// `y . y_hat / (|y| |y_hat|)`, clamped to [-1, 1].
pub fn cosine_similarity(y: &[f64], y_hat: &[f64]) -> Result<Similarity, MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::DimensionMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    let (mut dot, mut ny, mut nh) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(y_hat) {
        dot += a * b;
        ny += a * a;
        nh += b * b;
    }
    if ny == 0.0 || nh == 0.0 {
        return Ok(Similarity {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Similarity {
        value: (dot / (ny.sqrt() * nh.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

impl BertScore {
    fn zero() -> Self {
        Self {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
            degenerate: true,
        }
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Greedy soft token matching over precomputed token embeddings.
///
/// Precision averages, over candidate tokens, the best cosine to any
/// reference token; recall does the same from the reference side. No idf
/// weighting or baseline rescaling. Negative best matches count as 0 so
/// scores stay in [0, 1].
pub fn bert_score_tokens(candidate: &TokenEmbeddings, reference: &TokenEmbeddings) -> BertScore {
    let (c, r) = (&candidate.vectors, &reference.vectors);
    if c.is_empty() || r.is_empty() {
        return BertScore::zero();
    }
    let sim: Vec<Vec<f64>> = c
        .iter()
        .map(|cv| {
            r.iter()
                .map(|rv| cosine_similarity(cv, rv).map_or(0.0, |s| s.value))
                .collect()
        })
        .collect();
    let precision = sim
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0))
        .sum::<f64>()
        / c.len() as f64;
    let recall = (0..r.len())
        .map(|j| sim.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max).max(0.0))
        .sum::<f64>()
        / r.len() as f64;
    let (precision, recall) = (precision.min(1.0), recall.min(1.0));
    BertScore {
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
        degenerate: false,
    }
}

pub fn bert_f1(
    candidate: &str,
    reference: &str,
    embedder: &dyn EmbeddingProvider,
) -> Result<BertScore, ProviderError> {
    let c = embedder.embed_tokens(candidate)?;
    let r = embedder.embed_tokens(reference)?;
    Ok(bert_score_tokens(&c, &r))
}
