//! Random problem instances.

use arcconf_core::synth::CptNetwork;
use arcconf_core::{Dag, Dataset, VarOrder};
use rand::Rng;

pub fn dataset(columns: Vec<Vec<usize>>, arities: Vec<usize>) -> Dataset {
    let n = arities.len();
    Dataset::from_columns(columns, arities, None, (0..n).collect()).unwrap()
}

pub fn columns(data: &Dataset) -> Vec<Vec<usize>> {
    (0..data.n_vars()).map(|v| data.column(v).iter().map(|&x| x as usize).collect()).collect()
}

pub fn binary_columns<R: Rng>(rng: &mut R, vars: usize, n: usize) -> Vec<Vec<usize>> {
    (0..vars).map(|_| (0..n).map(|_| rng.random_range(0..2)).collect()).collect()
}

/// `m` parent columns active with random rates, then a child drawn from a
/// noisy-OR with random leak and links.
pub fn noisyor_sample<R: Rng>(rng: &mut R, m: usize, n: usize) -> Vec<Vec<usize>> {
    let rates: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..0.7)).collect();
    let links: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..0.95)).collect();
    let leak = rng.random_range(0.01..0.3);
    let mut cols = vec![Vec::with_capacity(n); m + 1];
    for _ in 0..n {
        let mut off = 1.0 - leak;
        for i in 0..m {
            let on = rng.random_bool(rates[i]);
            cols[i].push(on as usize);
            if on {
                off *= 1.0 - links[i];
            }
        }
        cols[m].push(rng.random_bool(1.0 - off) as usize);
    }
    cols
}

pub fn random_dag<R: Rng>(rng: &mut R, nodes: usize) -> Dag {
    let parents = (0..nodes).map(|i| (0..i).filter(|_| rng.random_bool(0.5)).collect()).collect();
    Dag::new(parents, VarOrder::identity(nodes)).unwrap()
}

/// Identity-ordered network: each earlier node is a parent with probability
/// `p_arc`, up to `max_parents`; conditionals come from normalized uniform
/// weights.
pub fn random_network<R: Rng>(rng: &mut R, arities: &[usize], p_arc: f64, max_parents: usize) -> CptNetwork {
    let n = arities.len();
    let parents: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut ps: Vec<usize> = (0..i).filter(|_| rng.random_bool(p_arc)).collect();
            ps.truncate(max_parents);
            ps
        })
        .collect();
    let cpts = (0..n)
        .map(|i| {
            let q: usize = parents[i].iter().map(|&p| arities[p]).product();
            (0..q)
                .map(|_| {
                    let w: Vec<f64> = (0..arities[i]).map(|_| rng.random_range(0.05..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / s).collect()
                })
                .collect()
        })
        .collect();
    let dag = Dag::new(parents, VarOrder::identity(n)).unwrap();
    CptNetwork::new((0..n).map(|i| format!("V{i}")).collect(), arities.to_vec(), dag, cpts).unwrap()
}
