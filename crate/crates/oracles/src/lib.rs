//! Reference computations for tests.
//!
//! Everything here is written for obviousness rather than speed and shares
//! no code with `arcconf-core`: data come in as plain columns of state
//! indices, marginal likelihoods are built from one-step predictive
//! probabilities or numerical integration instead of log-gamma closed forms,
//! and searches are exhaustive.

pub mod counting;
pub mod dags;
pub mod diff;
pub mod grid;
pub mod quadrature;
pub mod sequential;
pub mod subsets;

/// `ln Σ exp(x)` with the maximum factored out.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Parent values of `row` as a tuple key.
pub(crate) fn parent_key(parents: &[&[usize]], row: usize) -> Vec<usize> {
    parents.iter().map(|col| col[row]).collect()
}
