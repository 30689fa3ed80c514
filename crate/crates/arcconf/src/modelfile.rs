//! Learned-structure files.
//!
//! ```text
//! node <name>                 one per variable, in column order
//! order <name> <name> ...     the variable ordering
//! arc <parent> <child>        one per arc, sorted
//! score <name> <log score>    optional, per searched child
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use arcconf_core::{Arc, Dag, Dataset, VarOrder};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub names: Vec<String>,
    pub dag: Dag,
    pub scores: BTreeMap<usize, f64>,
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            let _ = writeln!(out, "node {name}");
        }
        out.push_str("order");
        for &v in self.dag.ordering().as_slice() {
            let _ = write!(out, " {}", self.names[v]);
        }
        out.push('\n');
        for arc in self.dag.arcs() {
            let _ = writeln!(out, "arc {} {}", self.names[arc.parent], self.names[arc.child]);
        }
        for (&node, score) in &self.scores {
            let _ = writeln!(out, "score {} {score:?}", self.names[node]);
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut order = None;
        let mut arcs = Vec::new();
        let mut scores = BTreeMap::new();
        let index = |names: &[String], name: &str, line: usize| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::parse(path, line, format!("unknown node {name}")))
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            match toks.as_slice() {
                [] => {}
                ["node", name] => {
                    if names.iter().any(|n| n == name) {
                        return Err(Error::parse(path, line, format!("node {name} declared twice")));
                    }
                    names.push(name.to_string());
                }
                ["order", rest @ ..] => {
                    let idx = rest.iter().map(|n| index(&names, n, line)).collect::<Result<Vec<_>>>()?;
                    order = Some((line, idx));
                }
                ["arc", p, c] => arcs.push(Arc::new(index(&names, p, line)?, index(&names, c, line)?)),
                ["score", n, v] => {
                    let v: f64 = v.parse().map_err(|_| Error::parse(path, line, format!("bad score {v:?}")))?;
                    scores.insert(index(&names, n, line)?, v);
                }
                _ => return Err(Error::parse(path, line, format!("unrecognized line {raw:?}"))),
            }
        }
        let ordering = match order {
            Some((line, idx)) => VarOrder::new(idx).map_err(|e| Error::parse(path, line, e.to_string()))?,
            None => VarOrder::identity(names.len()),
        };
        let dag = Dag::from_arcs(arcs, ordering)?;
        Ok(Self { names, dag, scores })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Check that the model describes the same variables and ordering as `data`.
    pub fn check_against(&self, data: &Dataset) -> Result<()> {
        if self.names != data.names() {
            return Err(Error::Usage("model and dataset variables differ".into()));
        }
        if self.dag.ordering() != data.ordering() {
            return Err(Error::Usage("model and dataset orderings differ".into()));
        }
        Ok(())
    }
}
