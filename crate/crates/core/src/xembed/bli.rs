use crate::error::{Error, Result};
use crate::numkit::cosine;
use crate::types::EmbeddingSpace;

/// Brute-force cosine nearest neighbour of `query` among `candidates`
/// (indices into `space`). Ties go to the earlier candidate.
pub fn nearest_neighbor(query: &[f64], space: &EmbeddingSpace, candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &c in candidates {
        let sim = cosine(query, space.matrix().row(c));
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((c, sim));
        }
    }
    best.map(|(c, _)| c)
}

/// Fraction of `(query, gold)` pairs whose cosine nearest neighbour among
/// all gold-side tokens of `target_space` is the gold token.
///
/// Pairs with an out-of-vocabulary side are skipped; the candidate set is
/// every token appearing on the gold side of `pairs`.
pub fn precision_at_1(
    query_space: &EmbeddingSpace,
    target_space: &EmbeddingSpace,
    pairs: &[(String, String)],
) -> Result<f64> {
    let mut candidates: Vec<usize> = pairs
        .iter()
        .filter_map(|(_, g)| target_space.vocab().index_of(g))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let mut hits = 0usize;
    let mut total = 0usize;
    for (q, g) in pairs {
        let (Some(qv), Some(gi)) = (query_space.lookup(q), target_space.vocab().index_of(g)) else {
            continue;
        };
        total += 1;
        if nearest_neighbor(qv, target_space, &candidates) == Some(gi) {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(hits as f64 / total as f64)
}
