//! BDeu marginal likelihoods as products of one-step predictive probabilities.

use std::collections::HashMap;

use crate::parent_key;

/// Log marginal likelihood of one family under BDeu with equivalent sample
/// size `ess`, accumulated row by row: each row contributes
/// `(N_jk + α/(q r)) / (N_j + α/q)` from the counts of the rows before it.
pub fn bdeu_family(child: &[usize], arity: usize, parents: &[&[usize]], parent_arities: &[usize], ess: f64) -> f64 {
    let q: usize = parent_arities.iter().product();
    let a_j = ess / q as f64;
    let a_jk = a_j / arity as f64;
    let mut seen: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut total = 0.0;
    for (row, &y) in child.iter().enumerate() {
        let cell = seen.entry(parent_key(parents, row)).or_insert_with(|| vec![0; arity]);
        let n_j: usize = cell.iter().sum();
        total += ((cell[y] as f64 + a_jk) / (n_j as f64 + a_j)).ln();
        cell[y] += 1;
    }
    total
}

/// Family term for `node` with the given parents, looked up from full columns.
pub fn family_term(columns: &[Vec<usize>], arities: &[usize], node: usize, parents: &[usize], ess: f64) -> f64 {
    let cols: Vec<&[usize]> = parents.iter().map(|&p| columns[p].as_slice()).collect();
    let ars: Vec<usize> = parents.iter().map(|&p| arities[p]).collect();
    bdeu_family(&columns[node], arities[node], &cols, &ars, ess)
}
