//! Permutation-based false discovery rate of a structure search.
//!
//! For each null replicate, every child's column is shuffled on its own
//! while all other columns stay real, and the child's parent search is rerun.
//! Arcs found that way are false by construction, so their average count
//! estimates the expected number of false arcs on the real data.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::Dataset;
use crate::rng::{derive_seed, stream};
use crate::search::{learn_structure, search_node, LearnedStructure, SearchConfig};

pub const DEFAULT_PERMUTATIONS: usize = 10;

const SWEEP_KEY: u64 = 0x5357_4545_50;

#[derive(Debug, Clone, PartialEq)]
pub struct FdrEstimate {
    pub observed_arcs: usize,
    pub null_counts: Vec<usize>,
    pub q_permutations: usize,
    pub fdr_raw: f64,
    pub fdr_clamped: f64,
    pub expected_ppv: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FdrOutcome {
    Estimate(FdrEstimate),
    /// The search found no arcs, so the rate is undefined.
    NoDiscoveries { seed: u64 },
}

impl FdrOutcome {
    pub fn estimate(&self) -> Option<&FdrEstimate> {
        match self {
            FdrOutcome::Estimate(e) => Some(e),
            FdrOutcome::NoDiscoveries { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdrRun {
    pub outcome: FdrOutcome,
    pub learned: LearnedStructure,
}

/// `((1 + Σ null) / Q) / observed`, or `None` when nothing was observed.
pub fn fdr_from_counts(observed_arcs: usize, null_counts: &[usize], seed: u64) -> Option<FdrEstimate> {
    if observed_arcs == 0 || null_counts.is_empty() {
        return None;
    }
    let q = null_counts.len();
    let total: usize = null_counts.iter().sum();
    let fdr_raw = ((1 + total) as f64 / q as f64) / observed_arcs as f64;
    let fdr_clamped = fdr_raw.min(1.0);
    Some(FdrEstimate {
        observed_arcs,
        null_counts: null_counts.to_vec(),
        q_permutations: q,
        fdr_raw,
        fdr_clamped,
        expected_ppv: 1.0 - fdr_clamped,
        seed,
    })
}

/// Copy of `data` with `node`'s column uniformly shuffled.
pub fn permute_columns_for_node<R: Rng + ?Sized>(data: &Dataset, node: usize, rng: &mut R) -> Result<Dataset> {
    data.check_node(node)?;
    let mut column = data.column(node).to_vec();
    column.shuffle(rng);
    Ok(data.with_column(node, column))
}

fn null_arcs_for_node(data: &Dataset, config: &SearchConfig, seed: u64, replicate: u64, node: usize) -> Result<usize> {
    let mut rng = stream(seed, &[replicate, node as u64]);
    let permuted = permute_columns_for_node(data, node, &mut rng)?;
    Ok(search_node(&permuted, node, config)?.parents().len())
}

/// Arcs found over all allowed children, each searched against its own
/// permuted column. Streams are keyed by `(seed, replicate, node)`.
pub fn null_arc_count<E: Executor>(
    data: &Dataset,
    config: &SearchConfig,
    seed: u64,
    replicate: u64,
    exec: &E,
) -> Result<usize> {
    config.validate(data)?;
    let children = config.children();
    let counts = exec.map_indexed(children.len(), |i| null_arcs_for_node(data, config, seed, replicate, children[i]));
    counts.into_iter().sum()
}

/// Null counts for replicates `0..q`, run as one flat parallel map.
pub fn null_counts<E: Executor>(
    data: &Dataset,
    config: &SearchConfig,
    q: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<usize>> {
    config.validate(data)?;
    let children = config.children();
    let per = children.len();
    let results = exec.map_indexed(q * per, |i| {
        null_arcs_for_node(data, config, seed, (i / per) as u64, children[i % per])
    });
    let mut out = alloc::vec![0usize; q];
    for (i, r) in results.into_iter().enumerate() {
        out[i / per] += r?;
    }
    Ok(out)
}

pub fn estimate_fdr<E: Executor>(
    data: &Dataset,
    config: &SearchConfig,
    q: usize,
    seed: u64,
    exec: &E,
) -> Result<FdrRun> {
    if q == 0 {
        return Err(Error::InvalidConfig("at least one permutation is required".into()));
    }
    let learned = learn_structure(data, config, exec)?;
    let observed = learned.dag.arc_count();
    if observed == 0 {
        return Ok(FdrRun { outcome: FdrOutcome::NoDiscoveries { seed }, learned });
    }
    let nulls = null_counts(data, config, q, seed, exec)?;
    let estimate = fdr_from_counts(observed, &nulls, seed).expect("observed arcs are nonzero");
    Ok(FdrRun { outcome: FdrOutcome::Estimate(estimate), learned })
}

/// Seed used for the sweep point with prior `kappa`.
pub fn sweep_seed(seed: u64, kappa: f64) -> u64 {
    derive_seed(seed, &[SWEEP_KEY, kappa.to_bits()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub kappa: f64,
    pub seed: u64,
    pub result: Result<FdrRun>,
}

/// One estimate per prior strength. Failures are kept per point.
pub fn fdr_sweep<E: Executor>(
    data: &Dataset,
    base: &SearchConfig,
    kappa_grid: &[f64],
    q: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<SweepPoint>> {
    if kappa_grid.is_empty() {
        return Err(Error::InvalidConfig("empty kappa grid".into()));
    }
    Ok(kappa_grid
        .iter()
        .map(|&kappa| {
            let point_seed = sweep_seed(seed, kappa);
            SweepPoint { kappa, seed: point_seed, result: estimate_fdr(data, &base.with_kappa(kappa), q, point_seed, exec) }
        })
        .collect())
}
