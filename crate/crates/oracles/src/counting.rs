//! Maximum-likelihood CPT scores by direct counting.

use std::collections::HashMap;

use crate::parent_key;

/// `Σ_rows ln P̂(y | parents)` with `P̂` the empirical conditional frequency.
pub fn cpt_max_loglik(child: &[usize], parents: &[&[usize]]) -> f64 {
    let mut joint: HashMap<(Vec<usize>, usize), usize> = HashMap::new();
    let mut margin: HashMap<Vec<usize>, usize> = HashMap::new();
    for (row, &y) in child.iter().enumerate() {
        let key = parent_key(parents, row);
        *joint.entry((key.clone(), y)).or_default() += 1;
        *margin.entry(key).or_default() += 1;
    }
    (0..child.len())
        .map(|row| {
            let key = parent_key(parents, row);
            (joint[&(key.clone(), child[row])] as f64 / margin[&key] as f64).ln()
        })
        .sum()
}

/// BIC with `q (r − 1)` free parameters and `ln n` per half parameter.
pub fn bic_cpt(child: &[usize], arity: usize, parents: &[&[usize]], parent_arities: &[usize]) -> f64 {
    let q: usize = parent_arities.iter().product();
    let d = (q * (arity - 1)) as f64;
    cpt_max_loglik(child, parents) - 0.5 * d * (child.len() as f64).ln()
}
