//! Greedy parent-set search under a known variable ordering.
//!
//! The structure score decomposes over nodes, so each node's parent set is
//! searched independently: start empty, apply the single-arc addition or
//! deletion that most improves the family score, stop when none strictly
//! improves it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{Dag, Dataset, VarOrder};
use crate::scoring::{family_score, FamilyScore, ScoreConfig, ScoreFamily};

/// Default parent-set cap for CPT searches.
pub const DEFAULT_CPT_MAX_PARENTS: usize = 6;

/// Restriction of the candidate parents beyond the ordering.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ParentRestriction {
    #[default]
    Unrestricted,
    /// The same pool for every child (e.g. the cause layer of a bipartite model).
    Pool(Vec<usize>),
    /// An explicit list per child; children not listed have no candidates.
    PerChild(BTreeMap<usize, Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub score: ScoreConfig,
    pub ordering: VarOrder,
    pub max_parents: Option<usize>,
    pub allowed_children: Option<Vec<usize>>,
    pub allowed_parents: ParentRestriction,
}

impl SearchConfig {
    pub fn new(score: ScoreConfig, ordering: VarOrder) -> Self {
        let max_parents = match score.family {
            ScoreFamily::BicNoisyOr => None,
            _ => Some(DEFAULT_CPT_MAX_PARENTS),
        };
        Self {
            score,
            ordering,
            max_parents,
            allowed_children: None,
            allowed_parents: ParentRestriction::Unrestricted,
        }
    }

    pub fn for_dataset(data: &Dataset, score: ScoreConfig) -> Self {
        Self::new(score, data.ordering().clone())
    }

    /// Children restricted to `children`, parents drawn only from `parents`.
    pub fn bipartite(
        score: ScoreConfig,
        ordering: VarOrder,
        parents: Vec<usize>,
        children: Vec<usize>,
    ) -> Self {
        Self {
            allowed_children: Some(children),
            allowed_parents: ParentRestriction::Pool(parents),
            ..Self::new(score, ordering)
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        let mut out = self.clone();
        out.score.kappa = kappa;
        out
    }

    pub fn effective_max_parents(&self) -> Option<usize> {
        match (self.max_parents, self.score.max_parents) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn children(&self) -> Vec<usize> {
        match &self.allowed_children {
            Some(c) => {
                let mut c = c.clone();
                c.sort_unstable();
                c.dedup();
                c
            }
            None => (0..self.ordering.len()).collect(),
        }
    }

    /// Candidate parents of `node`, ascending by index.
    pub fn candidates(&self, node: usize) -> Vec<usize> {
        let mut c: Vec<usize> = match &self.allowed_parents {
            ParentRestriction::Unrestricted => self.ordering.candidate_parents(node),
            ParentRestriction::Pool(pool) => pool
                .iter()
                .copied()
                .filter(|&p| p < self.ordering.len() && self.ordering.precedes(p, node))
                .collect(),
            ParentRestriction::PerChild(map) => map.get(&node).cloned().unwrap_or_default(),
        };
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        self.score.validate()?;
        if &self.ordering != data.ordering() {
            return Err(Error::OrderingMismatch);
        }
        let n = self.ordering.len();
        for &c in self.allowed_children.iter().flatten() {
            data.check_node(c)?;
        }
        match &self.allowed_parents {
            ParentRestriction::Unrestricted => {}
            ParentRestriction::Pool(pool) => {
                for &p in pool {
                    data.check_node(p)?;
                }
            }
            ParentRestriction::PerChild(map) => {
                for (&child, ps) in map {
                    data.check_node(child)?;
                    for &p in ps {
                        if p >= n {
                            return Err(Error::NodeOutOfRange { node: p, count: n });
                        }
                        if !self.ordering.precedes(p, child) {
                            return Err(Error::ParentOrder { parent: p, child });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add(usize),
    Delete(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParentSearch {
    pub score: FamilyScore,
    /// Family score after each accepted move, starting with the empty set.
    pub trace: Vec<f64>,
    pub moves: Vec<Move>,
}

impl ParentSearch {
    pub fn parents(&self) -> &[usize] {
        &self.score.parent_set
    }
}

/// Greedy addition/deletion search for one node's parents.
///
/// Ties between equally scoring moves go to deletions first, then to the
/// lowest parent index.
pub fn learn_parent_set(data: &Dataset, node: usize, config: &SearchConfig) -> Result<ParentSearch> {
    config.validate(data)?;
    data.check_node(node)?;
    if !config.children().contains(&node) {
        return Err(Error::InvalidConfig(format!("node {node} is not an allowed child")));
    }
    search_node(data, node, config)
}

pub(crate) fn search_node(data: &Dataset, node: usize, config: &SearchConfig) -> Result<ParentSearch> {
    let candidates = config.candidates(node);
    let cap = config.effective_max_parents().unwrap_or(usize::MAX);
    let mut current = family_score(data, node, &[], &config.score)?;
    let mut trace = alloc::vec![current.log_score];
    let mut moves = Vec::new();
    loop {
        let set = &current.parent_set;
        let mut best: Option<(Move, FamilyScore)> = None;
        let mut consider = |mv: Move, trial: Vec<usize>| -> Result<()> {
            let s = family_score(data, node, &trial, &config.score)?;
            if best.as_ref().is_none_or(|(_, b)| s.log_score > b.log_score) {
                best = Some((mv, s));
            }
            Ok(())
        };
        for &p in set {
            let trial: Vec<usize> = set.iter().copied().filter(|&x| x != p).collect();
            consider(Move::Delete(p), trial)?;
        }
        if set.len() < cap {
            for &c in candidates.iter().filter(|c| set.binary_search(c).is_err()) {
                let mut trial = set.clone();
                trial.push(c);
                trial.sort_unstable();
                consider(Move::Add(c), trial)?;
            }
        }
        match best {
            Some((mv, s)) if s.log_score > current.log_score => {
                trace.push(s.log_score);
                moves.push(mv);
                current = s;
            }
            _ => break,
        }
    }
    Ok(ParentSearch { score: current, trace, moves })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedStructure {
    pub dag: Dag,
    /// Final family score of every searched child, ascending by node.
    pub scores: Vec<FamilyScore>,
}

impl LearnedStructure {
    pub fn total_score(&self) -> f64 {
        self.scores.iter().map(|s| s.log_score).sum()
    }
}

/// Independent per-node searches assembled into a DAG.
pub fn learn_structure<E: Executor>(
    data: &Dataset,
    config: &SearchConfig,
    exec: &E,
) -> Result<LearnedStructure> {
    config.validate(data)?;
    let children = config.children();
    let results = exec.map_indexed(children.len(), |i| search_node(data, children[i], config));
    let mut parents = alloc::vec![Vec::new(); data.n_vars()];
    let mut scores = Vec::with_capacity(children.len());
    for (child, result) in children.iter().zip(results) {
        let found = result?;
        parents[*child] = found.score.parent_set.clone();
        scores.push(found.score);
    }
    Ok(LearnedStructure { dag: Dag::new(parents, config.ordering.clone())?, scores })
}
