//! Exact Bayesian arc confidence under a BDeu prior.
//!
//! With a known ordering the posterior over DAGs factorizes into independent
//! posteriors over each node's parent set. Summing those over all subsets of
//! the candidates up to a size limit gives exact arc marginals, and the
//! expected number of true arcs in any given model is the sum of the
//! marginals of its arcs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::math::{exp, ln, LnGammaRatio};
use crate::model::{Arc, Dag, Dataset, VarOrder};
use crate::scoring::{config_indices, ScoreConfig, ScoreFamily, DEFAULT_MAX_CONFIGS};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_MAX_SUBSETS: u64 = 5_000_000;
pub const DEFAULT_KAPPA: f64 = 0.1;
pub const DEFAULT_ESS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BayesConfig {
    pub kappa: f64,
    pub ess: f64,
    /// Parent-set size limit.
    pub k: usize,
    pub max_subsets: u64,
    pub max_configs: u64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_KAPPA,
            ess: DEFAULT_ESS,
            k: DEFAULT_K,
            max_subsets: DEFAULT_MAX_SUBSETS,
            max_configs: DEFAULT_MAX_CONFIGS,
        }
    }
}

impl BayesConfig {
    pub fn new(kappa: f64, ess: f64, k: usize) -> Self {
        Self { kappa, ess, k, ..Self::default() }
    }

    pub fn from_score(score: &ScoreConfig, k: usize) -> Result<Self> {
        if score.family != ScoreFamily::BdeuExact {
            return Err(Error::InvalidConfig(format!(
                "exact parent-set posteriors need the bdeu family, got {}",
                score.family.as_str()
            )));
        }
        Ok(Self { kappa: score.kappa, ess: score.ess, k, max_configs: score.max_configs, ..Self::default() })
    }

    pub fn validate(&self) -> Result<()> {
        ScoreConfig { max_parents: None, ..ScoreConfig::bdeu(self.kappa, self.ess) }.validate()
    }
}

/// `Σ_{s ≤ k} C(m, s)`, saturating.
pub fn subset_count(m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for s in 0..=k.min(m) {
        total = total.saturating_add(c);
        c = c.saturating_mul((m - s) as u128) / (s as u128 + 1);
    }
    total
}

/// View of one enumerated parent set while its counts are populated.
pub(crate) struct Visit<'a> {
    /// Positions into the candidate list, ascending.
    pub positions: &'a [usize],
    pub log_score: f64,
    pub keys: &'a [u32],
    pub cell_counts: &'a [u32],
    pub cfg_counts: &'a [u32],
    pub a_j: f64,
    pub a_jk: f64,
    pub arity: usize,
    pub test_keys: Option<&'a [u32]>,
}

/// Depth-first enumeration of every parent set of size `≤ k`, scoring each
/// with BDeu plus `|S| ln κ`. Row configuration keys are extended
/// incrementally from the parent prefix.
pub(crate) struct Enumerator<'a> {
    data: &'a Dataset,
    test: Option<&'a Dataset>,
    node: usize,
    candidates: Vec<usize>,
    k: usize,
    ess: f64,
    ln_kappa: f64,
    max_configs: u64,
    keys: Vec<Vec<u32>>,
    test_keys: Vec<Vec<u32>>,
    cell_counts: Vec<u32>,
    cfg_counts: Vec<u32>,
    touched_cells: Vec<u32>,
    touched_cfgs: Vec<u32>,
    tables: BTreeMap<u64, (LnGammaRatio, LnGammaRatio)>,
    positions: Vec<usize>,
}

impl<'a> Enumerator<'a> {
    pub fn new(data: &'a Dataset, node: usize, config: &BayesConfig) -> Result<Self> {
        config.validate()?;
        data.check_node(node)?;
        let candidates = {
            let mut c = data.ordering().candidate_parents(node);
            c.sort_unstable();
            c
        };
        let count = subset_count(candidates.len(), config.k);
        if count > config.max_subsets as u128 {
            return Err(Error::EnumerationCapacity { subsets: count, limit: config.max_subsets });
        }
        let depth = config.k.min(candidates.len());
        let n = data.n_rows();
        Ok(Self {
            data,
            test: None,
            node,
            candidates,
            k: config.k,
            ess: config.ess,
            ln_kappa: ln(config.kappa),
            max_configs: config.max_configs,
            keys: vec![vec![0; n]; depth + 1],
            test_keys: Vec::new(),
            cell_counts: Vec::new(),
            cfg_counts: Vec::new(),
            touched_cells: Vec::new(),
            touched_cfgs: Vec::new(),
            tables: BTreeMap::new(),
            positions: Vec::new(),
        })
    }

    pub fn with_test(mut self, test: &'a Dataset) -> Self {
        let depth = self.keys.len();
        self.test_keys = vec![vec![0; test.n_rows()]; depth];
        self.test = Some(test);
        self
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn run<F: FnMut(&Visit<'_>)>(&mut self, visit: &mut F) -> Result<()> {
        self.positions.clear();
        self.score_and_visit(0, 1, visit);
        self.descend(0, 0, 1, visit)
    }

    fn descend<F: FnMut(&Visit<'_>)>(
        &mut self,
        start: usize,
        depth: usize,
        q: u64,
        visit: &mut F,
    ) -> Result<()> {
        if depth >= self.k {
            return Ok(());
        }
        for pos in start..self.candidates.len() {
            let parent = self.candidates[pos];
            let arity = self.data.arity(parent) as u64;
            let q_next = q * arity;
            if q_next > self.max_configs {
                return Err(Error::ConfigCapacity { configs: q_next as u128, limit: self.max_configs });
            }
            extend_keys(&mut self.keys, depth, self.data.column(parent), arity as u32);
            if let Some(test) = self.test {
                extend_keys(&mut self.test_keys, depth, test.column(parent), arity as u32);
            }
            self.positions.push(pos);
            self.score_and_visit(depth + 1, q_next, visit);
            self.descend(pos + 1, depth + 1, q_next, visit)?;
            self.positions.pop();
        }
        Ok(())
    }

    fn score_and_visit<F: FnMut(&Visit<'_>)>(&mut self, depth: usize, q: u64, visit: &mut F) {
        let r = self.data.arity(self.node);
        let n = self.data.n_rows();
        let cells = q as usize * r;
        if self.cell_counts.len() < cells {
            self.cell_counts.resize(cells, 0);
        }
        if self.cfg_counts.len() < q as usize {
            self.cfg_counts.resize(q as usize, 0);
        }
        let keys = &self.keys[depth];
        let child = self.data.column(self.node);
        for (&key, &y) in keys.iter().zip(child) {
            let cell = key as usize * r + y as usize;
            if self.cell_counts[cell] == 0 {
                self.touched_cells.push(cell as u32);
            }
            self.cell_counts[cell] += 1;
            if self.cfg_counts[key as usize] == 0 {
                self.touched_cfgs.push(key);
            }
            self.cfg_counts[key as usize] += 1;
        }
        let a_j = self.ess / q as f64;
        let a_jk = a_j / r as f64;
        let (cell_tab, cfg_tab) = self
            .tables
            .entry(q)
            .or_insert_with(|| (LnGammaRatio::new(a_jk, n), LnGammaRatio::new(a_j, n)));
        let mut loglik = 0.0;
        for &j in &self.touched_cfgs {
            loglik -= cfg_tab.get(self.cfg_counts[j as usize] as usize);
        }
        for &c in &self.touched_cells {
            loglik += cell_tab.get(self.cell_counts[c as usize] as usize);
        }
        let log_score = loglik + depth as f64 * self.ln_kappa;
        visit(&Visit {
            positions: &self.positions,
            log_score,
            keys,
            cell_counts: &self.cell_counts,
            cfg_counts: &self.cfg_counts,
            a_j,
            a_jk,
            arity: r,
            test_keys: self.test.map(|_| self.test_keys[depth].as_slice()),
        });
        for &c in &self.touched_cells {
            self.cell_counts[c as usize] = 0;
        }
        for &j in &self.touched_cfgs {
            self.cfg_counts[j as usize] = 0;
        }
        self.touched_cells.clear();
        self.touched_cfgs.clear();
    }
}

fn extend_keys(bufs: &mut [Vec<u32>], depth: usize, column: &[u16], arity: u32) {
    let (lo, hi) = bufs.split_at_mut(depth + 1);
    for ((out, &prev), &v) in hi[0].iter_mut().zip(&lo[depth]).zip(column) {
        *out = prev * arity + v as u32;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEntry {
    pub parents: Vec<usize>,
    pub log_score: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParentSetPosterior {
    pub node: usize,
    pub size_limit: usize,
    /// Candidate parents, ascending.
    pub candidates: Vec<usize>,
    /// Ordered by set size, then lexicographically.
    pub entries: Vec<PosteriorEntry>,
}

impl ParentSetPosterior {
    pub fn prob_of(&self, parents: &[usize]) -> Option<f64> {
        self.entries.iter().find(|e| e.parents == parents).map(|e| e.prob)
    }
}

/// Full posterior over every parent set of `node` with at most `k` members.
pub fn enumerate_parent_posteriors(
    data: &Dataset,
    node: usize,
    config: &ScoreConfig,
    k: usize,
) -> Result<ParentSetPosterior> {
    let cfg = BayesConfig::from_score(config, k)?;
    enumerate_with(data, node, &cfg)
}

pub fn enumerate_with(data: &Dataset, node: usize, cfg: &BayesConfig) -> Result<ParentSetPosterior> {
    let mut e = Enumerator::new(data, node, cfg)?;
    let candidates = e.candidates().to_vec();
    let mut entries = Vec::new();
    e.run(&mut |v: &Visit<'_>| {
        entries.push(PosteriorEntry {
            parents: v.positions.iter().map(|&p| candidates[p]).collect(),
            log_score: v.log_score,
            prob: 0.0,
        });
    })?;
    let scores: Vec<f64> = entries.iter().map(|e| e.log_score).collect();
    let norm = crate::math::log_sum_exp(&scores);
    for entry in &mut entries {
        entry.prob = exp(entry.log_score - norm);
    }
    entries.sort_by(|a, b| a.parents.len().cmp(&b.parents.len()).then_with(|| a.parents.cmp(&b.parents)));
    Ok(ParentSetPosterior { node, size_limit: cfg.k, candidates, entries })
}

/// Marginal posterior of each candidate being a parent.
pub fn arc_marginals(post: &ParentSetPosterior) -> BTreeMap<usize, f64> {
    let mut out: BTreeMap<usize, f64> = post.candidates.iter().map(|&c| (c, 0.0)).collect();
    for e in &post.entries {
        for p in &e.parents {
            *out.entry(*p).or_default() += e.prob;
        }
    }
    out
}

/// Streaming arc marginals for one node, without materializing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMarginals {
    pub node: usize,
    pub candidates: Vec<usize>,
    pub marginals: Vec<f64>,
    pub prob_empty: f64,
    pub log_normalizer: f64,
    pub subsets: u64,
}

impl NodeMarginals {
    pub fn get(&self, parent: usize) -> Option<f64> {
        self.candidates.binary_search(&parent).ok().map(|i| self.marginals[i])
    }
}

#[derive(Default)]
struct ScaledSums {
    max: f64,
    total: f64,
    per: Vec<f64>,
    empty: f64,
}

impl ScaledSums {
    fn new(len: usize) -> Self {
        Self { max: f64::NEG_INFINITY, total: 0.0, per: vec![0.0; len], empty: 0.0 }
    }

    /// Returns the linear weight of `log_score` relative to the running max.
    fn rescale_to(&mut self, log_score: f64) -> f64 {
        if log_score > self.max {
            let s = exp(self.max - log_score);
            self.total *= s;
            self.empty *= s;
            for v in &mut self.per {
                *v *= s;
            }
            self.max = log_score;
        }
        exp(log_score - self.max)
    }
}

pub fn node_marginals(data: &Dataset, node: usize, cfg: &BayesConfig) -> Result<NodeMarginals> {
    let mut e = Enumerator::new(data, node, cfg)?;
    let candidates = e.candidates().to_vec();
    let mut sums = ScaledSums::new(candidates.len());
    let mut subsets = 0u64;
    e.run(&mut |v: &Visit<'_>| {
        let w = sums.rescale_to(v.log_score);
        sums.total += w;
        if v.positions.is_empty() {
            sums.empty += w;
        }
        for &p in v.positions {
            sums.per[p] += w;
        }
        subsets += 1;
    })?;
    Ok(NodeMarginals {
        node,
        marginals: sums.per.iter().map(|v| v / sums.total).collect(),
        prob_empty: sums.empty / sums.total,
        log_normalizer: sums.max + ln(sums.total),
        candidates,
        subsets,
    })
}

/// Arc marginals for every node of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcMarginals {
    pub ordering: VarOrder,
    pub nodes: Vec<NodeMarginals>,
}

impl ArcMarginals {
    pub fn from_posteriors(ordering: VarOrder, posts: &[ParentSetPosterior]) -> Self {
        let nodes = posts
            .iter()
            .map(|p| {
                let m = arc_marginals(p);
                NodeMarginals {
                    node: p.node,
                    candidates: p.candidates.clone(),
                    marginals: p.candidates.iter().map(|c| m[c]).collect(),
                    prob_empty: p.prob_of(&[]).unwrap_or(0.0),
                    log_normalizer: crate::math::log_sum_exp(
                        &p.entries.iter().map(|e| e.log_score).collect::<Vec<_>>(),
                    ),
                    subsets: p.entries.len() as u64,
                }
            })
            .collect();
        Self { ordering, nodes }
    }

    pub fn get(&self, arc: Arc) -> Option<f64> {
        self.nodes.get(arc.child).and_then(|n| n.get(arc.parent))
    }

    /// Every `(arc, marginal)` pair, sorted by arc.
    pub fn iter(&self) -> impl Iterator<Item = (Arc, f64)> + '_ {
        self.nodes.iter().flat_map(|n| {
            n.candidates.iter().zip(&n.marginals).map(move |(&p, &m)| (Arc::new(p, n.node), m))
        })
    }
}

pub fn compute_arc_marginals<E: Executor>(data: &Dataset, cfg: &BayesConfig, exec: &E) -> Result<ArcMarginals> {
    cfg.validate()?;
    let results = exec.map_indexed(data.n_vars(), |node| node_marginals(data, node, cfg));
    let nodes = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ArcMarginals { ordering: data.ordering().clone(), nodes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesEstimate {
    pub expected_true_arcs: f64,
    pub per_arc_marginals: BTreeMap<Arc, f64>,
    pub model_arc_count: usize,
    /// Undefined for a model without arcs.
    pub expected_ppv: Option<f64>,
}

/// Posterior expected number of arcs of `g_l` present in the true structure.
pub fn expected_true_arcs(marginals: &ArcMarginals, g_l: &Dag) -> Result<BayesEstimate> {
    if g_l.ordering() != &marginals.ordering {
        return Err(Error::OrderingMismatch);
    }
    let mut per_arc_marginals = BTreeMap::new();
    let mut expected = 0.0;
    for arc in g_l.arcs() {
        let m = marginals.get(arc).ok_or(Error::ArcOutsideUniverse { parent: arc.parent, child: arc.child })?;
        expected += m;
        per_arc_marginals.insert(arc, m);
    }
    let count = per_arc_marginals.len();
    Ok(BayesEstimate {
        expected_true_arcs: expected,
        per_arc_marginals,
        model_arc_count: count,
        expected_ppv: (count > 0).then(|| expected / count as f64),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedModel {
    pub threshold: f64,
    pub dag: Dag,
    pub estimate: BayesEstimate,
}

/// For each threshold `t`, the model of all arcs with marginal `> t`.
pub fn nested_models_by_threshold(marginals: &ArcMarginals, thresholds: &[f64]) -> Result<Vec<NestedModel>> {
    for (i, &t) in thresholds.iter().enumerate() {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!("threshold {t} outside (0, 1]")));
        }
        if i > 0 && t >= thresholds[i - 1] {
            return Err(Error::InvalidConfig("thresholds must be strictly descending".into()));
        }
    }
    thresholds
        .iter()
        .map(|&t| {
            let arcs = marginals.iter().filter(|&(_, m)| m > t).map(|(a, _)| a);
            let dag = Dag::from_arcs(arcs, marginals.ordering.clone())?;
            let estimate = expected_true_arcs(marginals, &dag)?;
            Ok(NestedModel { threshold: t, dag, estimate })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationCheck {
    pub k: usize,
    pub max_abs_change: f64,
    pub worst_arc: Option<Arc>,
}

/// Largest change in any arc marginal when the size limit grows from `k` to `k + 1`.
pub fn truncation_check<E: Executor>(
    data: &Dataset,
    cfg: &BayesConfig,
    base: &ArcMarginals,
    exec: &E,
) -> Result<TruncationCheck> {
    let wider = compute_arc_marginals(data, &BayesConfig { k: cfg.k + 1, ..cfg.clone() }, exec)?;
    let mut worst = (0.0, None);
    for ((arc, a), (_, b)) in base.iter().zip(wider.iter()) {
        let d = (a - b).abs();
        if d > worst.0 {
            worst = (d, Some(arc));
        }
    }
    Ok(TruncationCheck { k: cfg.k, max_abs_change: worst.0, worst_arc: worst.1 })
}

fn check_schema(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.arities() != test.arities() {
        return Err(Error::InvalidConfig("train and test arities differ".into()));
    }
    if train.ordering() != test.ordering() {
        return Err(Error::OrderingMismatch);
    }
    Ok(())
}

/// Held-out log likelihood under a single structure with BDeu posterior
/// predictive parameters `(N_jk + α_jk) / (N_j + α_j)`.
pub fn dag_predictive_loglik(train: &Dataset, test: &Dataset, dag: &Dag, ess: f64) -> Result<f64> {
    check_schema(train, test)?;
    if dag.ordering() != train.ordering() {
        return Err(Error::OrderingMismatch);
    }
    let mut total = 0.0;
    for node in 0..train.n_vars() {
        let parents = dag.parents(node);
        let q = crate::scoring::config_count(train, parents, DEFAULT_MAX_CONFIGS)?;
        let r = train.arity(node);
        let a_j = ess / q as f64;
        let a_jk = a_j / r as f64;
        let mut cells: BTreeMap<(u32, u16), u32> = BTreeMap::new();
        let mut cfgs: BTreeMap<u32, u32> = BTreeMap::new();
        for (&key, &y) in config_indices(train, parents).iter().zip(train.column(node)) {
            *cells.entry((key, y)).or_default() += 1;
            *cfgs.entry(key).or_default() += 1;
        }
        for (&key, &y) in config_indices(test, parents).iter().zip(test.column(node)) {
            let n_jk = cells.get(&(key, y)).copied().unwrap_or(0) as f64;
            let n_j = cfgs.get(&key).copied().unwrap_or(0) as f64;
            total += ln((n_jk + a_jk) / (n_j + a_j));
        }
    }
    Ok(total)
}

/// Held-out log likelihood with each node's predictive averaged over its
/// parent-set posterior (sizes `≤ k`), evaluated row by row.
pub fn averaged_predictive_loglik<E: Executor>(
    train: &Dataset,
    test: &Dataset,
    cfg: &BayesConfig,
    exec: &E,
) -> Result<f64> {
    check_schema(train, test)?;
    let per_node = exec.map_indexed(train.n_vars(), |node| -> Result<f64> {
        let mut e = Enumerator::new(train, node, cfg)?.with_test(test);
        let y_test = test.column(node);
        let mut sums = ScaledSums::new(test.n_rows());
        e.run(&mut |v: &Visit<'_>| {
            let w = sums.rescale_to(v.log_score);
            sums.total += w;
            let test_keys = v.test_keys.expect("test keys present");
            for ((acc, &key), &y) in sums.per.iter_mut().zip(test_keys).zip(y_test) {
                let n_jk = v.cell_counts.get(key as usize * v.arity + y as usize).copied().unwrap_or(0);
                let n_j = v.cfg_counts.get(key as usize).copied().unwrap_or(0);
                *acc += w * (n_jk as f64 + v.a_jk) / (n_j as f64 + v.a_j);
            }
            let _ = v.keys;
        })?;
        Ok(sums.per.iter().map(|&a| ln(a / sums.total)).sum())
    });
    per_node.into_iter().sum()
}
