//! Whole-graph enumeration for small ordered networks.

use crate::log_sum_exp;
use crate::sequential::family_term;

/// Every subset of `items`, in bitmask order.
pub fn all_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0u64..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

/// Every DAG consistent with `order`, as a parent list per node.
pub fn all_ordered_dags(order: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let n = order.len();
    let mut dags = vec![vec![Vec::new(); n]];
    for (pos, &node) in order.iter().enumerate() {
        let choices = all_subsets(&order[..pos]);
        dags = dags
            .into_iter()
            .flat_map(|dag| {
                choices.iter().map(move |ps| {
                    let mut d = dag.clone();
                    d[node] = ps.clone();
                    d
                })
            })
            .collect();
    }
    dags
}

/// Unnormalized log posterior `|G| ln κ + ln P(D | G)` of one DAG.
pub fn log_posterior(columns: &[Vec<usize>], arities: &[usize], dag: &[Vec<usize>], ess: f64, kappa: f64) -> f64 {
    dag.iter()
        .enumerate()
        .map(|(node, ps)| ps.len() as f64 * kappa.ln() + family_term(columns, arities, node, ps, ess))
        .sum()
}

/// Posterior expectation of the number of arcs shared with `reference`,
/// summing over every DAG consistent with `order`.
pub fn expected_shared_arcs(
    columns: &[Vec<usize>],
    arities: &[usize],
    order: &[usize],
    ess: f64,
    kappa: f64,
    reference: &[(usize, usize)],
) -> f64 {
    let dags = all_ordered_dags(order);
    let logs: Vec<f64> = dags.iter().map(|d| log_posterior(columns, arities, d, ess, kappa)).collect();
    let z = log_sum_exp(&logs);
    dags.iter()
        .zip(&logs)
        .map(|(dag, lp)| {
            let shared = reference.iter().filter(|&&(p, c)| dag[c].contains(&p)).count();
            (lp - z).exp() * shared as f64
        })
        .sum()
}

/// Posterior over parent sets of `node` drawn from `candidates` with at most
/// `k` members, listed with their probabilities.
pub fn parent_set_posterior(
    columns: &[Vec<usize>],
    arities: &[usize],
    node: usize,
    candidates: &[usize],
    k: usize,
    ess: f64,
    kappa: f64,
) -> Vec<(Vec<usize>, f64)> {
    let sets: Vec<Vec<usize>> = all_subsets(candidates).into_iter().filter(|s| s.len() <= k).collect();
    let logs: Vec<f64> = sets
        .iter()
        .map(|s| s.len() as f64 * kappa.ln() + family_term(columns, arities, node, s, ess))
        .collect();
    let z = log_sum_exp(&logs);
    sets.into_iter().zip(logs).map(|(s, l)| (s, (l - z).exp())).collect()
}
