//! Datasets, variable orderings, DAGs and arc sets.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result, Violation};

/// A total order over variables. Position in the order is precedence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl VarOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let len = order.len();
        let mut position = vec![usize::MAX; len];
        for (pos, &v) in order.iter().enumerate() {
            if v >= len || position[v] != usize::MAX {
                return Err(Error::NotPermutation { len });
            }
            position[v] = pos;
        }
        Ok(Self { order, position })
    }

    pub fn identity(len: usize) -> Self {
        Self { order: (0..len).collect(), position: (0..len).collect() }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, node: usize) -> usize {
        self.position[node]
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.position[a] < self.position[b]
    }

    /// The nodes preceding `node`, in ordering order.
    pub fn candidate_parents(&self, node: usize) -> Vec<usize> {
        self.order[..self.position[node]].to_vec()
    }
}

/// Convenience form of [`VarOrder::candidate_parents`] with a range check.
pub fn candidate_parents(node: usize, ordering: &VarOrder) -> Result<Vec<usize>> {
    if node >= ordering.len() {
        return Err(Error::NodeOutOfRange { node, count: ordering.len() });
    }
    Ok(ordering.candidate_parents(node))
}

/// An n×N table of category indices, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<u16>>,
    arities: Vec<usize>,
    names: Vec<String>,
    ordering: VarOrder,
    rows: usize,
}

impl Dataset {
    /// Validate a row-major table. Every violation is reported, not just the first.
    pub fn from_rows(
        rows: &[Vec<usize>],
        arities: Vec<usize>,
        names: Option<Vec<String>>,
        ordering: Vec<usize>,
    ) -> Result<Self> {
        let width = arities.len();
        let mut violations = Vec::new();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                violations.push(Violation::RaggedRow { row: r, len: row.len(), expected: width });
                continue;
            }
            for (c, &v) in row.iter().enumerate() {
                columns[c].push(v);
            }
        }
        if !violations.is_empty() {
            Self::collect_violations(&columns, &arities, names.as_ref(), &ordering, &mut violations);
            return Err(Error::InvalidDataset(violations));
        }
        Self::from_columns(columns, arities, names, ordering)
    }

    pub fn from_columns(
        columns: Vec<Vec<usize>>,
        arities: Vec<usize>,
        names: Option<Vec<String>>,
        ordering: Vec<usize>,
    ) -> Result<Self> {
        let mut violations = Vec::new();
        Self::collect_violations(&columns, &arities, names.as_ref(), &ordering, &mut violations);
        if !violations.is_empty() {
            return Err(Error::InvalidDataset(violations));
        }
        let rows = columns[0].len();
        let names = names.unwrap_or_else(|| (0..arities.len()).map(|i| format!("X{i}")).collect());
        let columns = columns
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as u16).collect())
            .collect();
        Ok(Self { columns, arities, names, ordering: VarOrder::new(ordering)?, rows })
    }

    fn collect_violations(
        columns: &[Vec<usize>],
        arities: &[usize],
        names: Option<&Vec<String>>,
        ordering: &[usize],
        out: &mut Vec<Violation>,
    ) {
        if columns.is_empty() || columns[0].is_empty() {
            out.push(Violation::Empty);
        }
        if columns.len() != arities.len() {
            out.push(Violation::NameCount { names: arities.len(), columns: columns.len() });
        }
        if let Some(names) = names {
            if names.len() != columns.len() {
                out.push(Violation::NameCount { names: names.len(), columns: columns.len() });
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        for (c, (col, &arity)) in columns.iter().zip(arities).enumerate() {
            if arity < 2 || arity > u16::MAX as usize {
                out.push(Violation::ArityTooSmall { column: c, arity });
            }
            if col.len() != n {
                out.push(Violation::RaggedRow { row: col.len().min(n), len: col.len(), expected: n });
            }
            for (r, &v) in col.iter().enumerate() {
                if v >= arity {
                    out.push(Violation::ValueOutOfRange { row: r, column: c, value: v, arity });
                }
            }
        }
        if VarOrder::new(ordering.to_vec()).is_err() || ordering.len() != columns.len() {
            out.push(Violation::NotPermutation);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, var: usize) -> &[u16] {
        &self.columns[var]
    }

    #[inline]
    pub fn arity(&self, var: usize) -> usize {
        self.arities[var]
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ordering(&self) -> &VarOrder {
        &self.ordering
    }

    pub fn value(&self, row: usize, var: usize) -> usize {
        self.columns[var][row] as usize
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.n_vars() {
            return Err(Error::NodeOutOfRange { node, count: self.n_vars() });
        }
        Ok(())
    }

    /// Copy of the dataset with one column replaced. The caller guarantees the
    /// values stay within the column's arity.
    pub(crate) fn with_column(&self, var: usize, column: Vec<u16>) -> Self {
        debug_assert_eq!(column.len(), self.rows);
        let mut out = self.clone();
        out.columns[var] = column;
        out
    }

    /// The dataset restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset(vec![Violation::Empty]));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Ok(Self {
            columns,
            arities: self.arities.clone(),
            names: self.names.clone(),
            ordering: self.ordering.clone(),
            rows: rows.len(),
        })
    }

    /// Variable index by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A directed arc `parent -> child`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub parent: usize,
    pub child: usize,
}

impl Arc {
    pub const fn new(parent: usize, child: usize) -> Self {
        Self { parent, child }
    }
}

pub type ArcSet = BTreeSet<Arc>;

/// Per-node parent sets consistent with a variable ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    ordering: VarOrder,
}

impl Dag {
    pub fn empty(ordering: VarOrder) -> Self {
        Self { parents: vec![Vec::new(); ordering.len()], ordering }
    }

    /// Parent lists are sorted; every parent must precede its child.
    pub fn new(mut parents: Vec<Vec<usize>>, ordering: VarOrder) -> Result<Self> {
        if parents.len() != ordering.len() {
            return Err(Error::NodeCountMismatch { left: parents.len(), right: ordering.len() });
        }
        let count = parents.len();
        for (child, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            for w in ps.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateParent { parent: w[0], child });
                }
            }
            for &p in ps.iter() {
                if p >= count {
                    return Err(Error::NodeOutOfRange { node: p, count });
                }
                if !ordering.precedes(p, child) {
                    return Err(Error::ParentOrder { parent: p, child });
                }
            }
        }
        Ok(Self { parents, ordering })
    }

    pub fn from_arcs<I: IntoIterator<Item = Arc>>(arcs: I, ordering: VarOrder) -> Result<Self> {
        let mut parents = vec![Vec::new(); ordering.len()];
        for a in arcs {
            if a.child >= parents.len() {
                return Err(Error::NodeOutOfRange { node: a.child, count: parents.len() });
            }
            parents[a.child].push(a.parent);
        }
        Self::new(parents, ordering)
    }

    pub fn n_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn ordering(&self) -> &VarOrder {
        &self.ordering
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn arcs(&self) -> ArcSet {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| Arc::new(p, c)))
            .collect()
    }

    pub fn contains(&self, arc: Arc) -> bool {
        arc.child < self.parents.len() && self.parents[arc.child].binary_search(&arc.parent).is_ok()
    }

    /// Acyclicity via Kahn's algorithm, independent of the ordering.
    pub fn check_acyclic(&self) -> Result<()> {
        let n = self.parents.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            Err(Error::Cycle)
        }
    }

    /// Full structural validation: ordering consistency, no duplicates, acyclic.
    pub fn validate(&self) -> Result<()> {
        Dag::new(self.parents.clone(), self.ordering.clone())?;
        self.check_acyclic()
    }
}

/// Number of arcs present in both graphs.
pub fn arc_overlap(g: &Dag, g_ref: &Dag) -> Result<usize> {
    if g.n_nodes() != g_ref.n_nodes() {
        return Err(Error::NodeCountMismatch { left: g.n_nodes(), right: g_ref.n_nodes() });
    }
    Ok(g
        .parents
        .iter()
        .zip(&g_ref.parents)
        .map(|(a, b)| a.iter().filter(|p| b.binary_search(p).is_ok()).count())
        .sum())
}
