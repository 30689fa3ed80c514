//! Exhaustive parent-set optimization.

use crate::dags::all_subsets;

/// Highest-scoring subset of `candidates` with at most `max_size` members,
/// with every subset's score.
pub fn best_subset<F: FnMut(&[usize]) -> f64>(candidates: &[usize], max_size: usize, mut score: F) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for set in all_subsets(candidates).into_iter().filter(|s| s.len() <= max_size) {
        let s = score(&set);
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((set, s));
        }
    }
    best.expect("the empty set is always a candidate")
}
