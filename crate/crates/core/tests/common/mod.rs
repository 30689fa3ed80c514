#![allow(dead_code)]

use arcconf_core::{Dataset, Executor};
use proptest::prelude::*;

pub fn columns(data: &Dataset) -> Vec<Vec<usize>> {
    (0..data.n_vars()).map(|v| data.column(v).iter().map(|&x| x as usize).collect()).collect()
}

pub fn dataset(columns: Vec<Vec<usize>>, arities: Vec<usize>) -> Dataset {
    let n = arities.len();
    Dataset::from_columns(columns, arities, None, (0..n).collect()).unwrap()
}

/// Runs jobs back to front; results still come back in index order.
pub struct Reversed;

impl Executor for Reversed {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut out: Vec<T> = (0..len).rev().map(f).collect();
        out.reverse();
        out
    }
}

/// `(columns, arities)` with `vars` columns and `rows` rows.
pub fn table(vars: std::ops::RangeInclusive<usize>, rows: std::ops::RangeInclusive<usize>, max_arity: usize) -> impl Strategy<Value = (Vec<Vec<usize>>, Vec<usize>)> {
    (vars, rows).prop_flat_map(move |(v, n)| {
        prop::collection::vec(2..=max_arity, v).prop_flat_map(move |arities| {
            let cols: Vec<_> = arities.iter().map(|&a| prop::collection::vec(0..a, n)).collect();
            (cols, Just(arities))
        })
    })
}

/// A random network over `arities` with identity ordering: each earlier node
/// is a parent with probability `p_arc` (at most `max_parents`), and every
/// conditional distribution is drawn from normalized uniform weights.
pub fn random_network<R: rand::Rng>(rng: &mut R, arities: &[usize], p_arc: f64, max_parents: usize) -> arcconf_core::synth::CptNetwork {
    let n = arities.len();
    let mut parents = Vec::with_capacity(n);
    for i in 0..n {
        let mut ps: Vec<usize> = (0..i).filter(|_| rng.random_bool(p_arc)).collect();
        ps.truncate(max_parents);
        parents.push(ps);
    }
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
    let dag = arcconf_core::Dag::new(parents, arcconf_core::VarOrder::identity(n)).unwrap();
    let names = (0..n).map(|i| format!("V{i}")).collect();
    arcconf_core::synth::CptNetwork::new(names, arities.to_vec(), dag, cpts).unwrap()
}
