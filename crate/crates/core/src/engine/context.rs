use crate::model::{Context, ContextItem, HistoryEntry, WindowBound};

/// Selects the trailing window of `history` that the model will see.
///
/// `LastK` keeps the final `min(k, t)` entries. `AlgorithmLiteral` keeps
/// entries `max(1, t-k) ..= t` (1-based), which is one more than `k` once
/// the history is long enough. Responses are dropped unless
/// `include_responses` is set. Order is preserved, most recent last.
pub fn build_context(
    history: &[HistoryEntry],
    k: usize,
    include_responses: bool,
    bound: WindowBound,
) -> Context {
    let take = bound.window_len(k, history.len());
    let window = &history[history.len() - take..];
    let items = window
        .iter()
        .map(|e| ContextItem {
            query: e.query.clone(),
            response: if include_responses {
                e.response.clone()
            } else {
                None
            },
        })
        .collect();
    Context {
        items,
        source_indices: window.iter().map(|e| e.turn_index).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(n: usize) -> Vec<HistoryEntry> {
        (1..=n)
            .map(|i| HistoryEntry::new(i, format!("q{i}"), Some(format!("r{i}"))))
            .collect()
    }

    #[test]
    fn last_k_of_ten() {
        let c = build_context(&history(10), 5, true, WindowBound::LastK);
        assert_eq!(c.source_indices, vec![6, 7, 8, 9, 10]);
        assert_eq!(c.items[0].query, "q6");
        assert_eq!(c.items[4].response.as_deref(), Some("r10"));
    }

    #[test]
    fn literal_bound_of_ten() {
        let c = build_context(&history(10), 5, true, WindowBound::AlgorithmLiteral);
        assert_eq!(c.source_indices, vec![5, 6, 7, 8, 9, 10]);
    }

    #[test]
    fn window_exceeds_history() {
        for bound in [WindowBound::LastK, WindowBound::AlgorithmLiteral] {
            let c = build_context(&history(2), 5, true, bound);
            assert_eq!(c.source_indices, vec![1, 2]);
        }
    }

    #[test]
    fn zero_window_is_empty() {
        assert!(build_context(&history(7), 0, true, WindowBound::LastK).is_empty());
        assert!(build_context(&[], 3, true, WindowBound::AlgorithmLiteral).is_empty());
    }

    #[test]
    fn responses_dropped_when_excluded() {
        let c = build_context(&history(3), 2, false, WindowBound::LastK);
        assert!(c.items.iter().all(|i| i.response.is_none()));
    }
}
