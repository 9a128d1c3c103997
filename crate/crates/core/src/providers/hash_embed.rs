use super::{Embedding, EmbeddingDescriptor, EmbeddingProvider, ProviderError, TokenEmbeddings};

pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_SEED: u64 = 0x51_f0_5e_ed;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Deterministic bag-of-tokens embedder.
///
/// Text is lowercased and split on anything that is not alphanumeric. Each
/// token is hashed (seeded FNV-1a) into one of `dimension` buckets; bucket
/// counts are L2-normalized. Token vectors are the one-hot bucket vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    dimension: usize,
    seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION, DEFAULT_SEED)
    }
}

impl HashEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension >= 1, "embedding dimension must be >= 1");
        Self { dimension, seed }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn tokenize(text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    pub fn bucket_of(&self, token: &str) -> usize {
        let mut h = FNV_OFFSET ^ self.seed;
        for b in token.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(FNV_PRIME);
        }
        (h % self.dimension as u64) as usize
    }

    pub fn hash_embed(&self, text: &str) -> Embedding {
        let mut v = vec![0.0; self.dimension];
        let tokens = Self::tokenize(text);
        for t in &tokens {
            v[self.bucket_of(t)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Embedding {
            vector: v,
            degenerate: tokens.is_empty(),
        }
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, text: &str) -> Result<Embedding, ProviderError> {
        Ok(self.hash_embed(text))
    }

    fn embed_tokens(&self, text: &str) -> Result<TokenEmbeddings, ProviderError> {
        let tokens = Self::tokenize(text);
        let vectors = tokens
            .iter()
            .map(|t| {
                let mut v = vec![0.0; self.dimension];
                v[self.bucket_of(t)] = 1.0;
                v
            })
            .collect();
        Ok(TokenEmbeddings { tokens, vectors })
    }

    fn descriptor(&self) -> EmbeddingDescriptor {
        EmbeddingDescriptor {
            provider_id: format!("hash-embed(seed={:#x})", self.seed),
            dimension: self.dimension,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_invariant() {
        let e = HashEmbedder::default();
        assert_eq!(e.hash_embed("a b"), e.hash_embed("b a"));
        assert_eq!(e.hash_embed("Revenue, by Country!"), e.hash_embed("revenue by country"));
    }

    #[test]
    fn empty_text_is_flagged_zero() {
        let e = HashEmbedder::default().hash_embed("  ?! ");
        assert!(e.degenerate);
        assert!(e.vector.iter().all(|x| *x == 0.0));
        assert_eq!(e.vector.len(), DEFAULT_DIMENSION);
    }

    #[test]
    fn unit_norm() {
        let e = HashEmbedder::default().hash_embed("compare revenue revenue by country");
        let n: f64 = e.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn token_vectors_one_hot() {
        let t = HashEmbedder::default().embed_tokens("top-5 countries").unwrap();
        assert_eq!(t.tokens, vec!["top", "5", "countries"]);
        for v in &t.vectors {
            assert_eq!(v.iter().filter(|x| **x == 1.0).count(), 1);
        }
    }
}
