//! Dataset CSV files.
//!
//! The first non-comment row holds the variable names; every following row
//! is one complete observation. Lines starting with `#` are comments. If
//! every label in a column is a non-negative integer the label is the state
//! index and the arity is `max(label) + 1` (at least 2); otherwise labels are
//! sorted and indexed in that order. A comment line `# arities a1 a2 ...`
//! widens integer columns to the given arities, so states that happen not
//! to occur in a sample still count.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use arcconf_core::{Dataset, VarOrder};

use crate::error::{Error, Result};

/// Label of each state of each column, in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub names: Vec<String>,
    pub labels: Vec<Vec<String>>,
    /// Columns whose labels are their own state indices.
    pub numeric: Vec<bool>,
}

impl Schema {
    /// Integer-labelled schema for a dataset.
    pub fn numeric(data: &Dataset) -> Self {
        Self {
            names: data.names().to_vec(),
            labels: data.arities().iter().map(|&a| (0..a).map(|v| v.to_string()).collect()).collect(),
            numeric: vec![true; data.n_vars()],
        }
    }

    pub fn arities(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    fn lookup(&self, column: usize, label: &str) -> Option<usize> {
        if self.numeric[column] {
            label.parse::<usize>().ok().filter(|&v| v < self.labels[column].len())
        } else {
            self.labels[column].binary_search_by(|l| l.as_str().cmp(label)).ok()
        }
    }
}

struct RawTable {
    names: Vec<String>,
    /// `(line, fields)` per data row.
    rows: Vec<(usize, Vec<String>)>,
    arities_hint: Option<(usize, Vec<usize>)>,
}

fn read_raw(path: &Path) -> Result<RawTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut arities_hint = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            let mut toks = rest.split_whitespace();
            if toks.next() == Some("arities") {
                let parsed = toks
                    .map(|t| t.parse::<usize>().map_err(|_| Error::parse(path, i + 1, format!("bad arity {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                arities_hint = Some((i + 1, parsed));
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names = None;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        if names.is_none() {
            if let Some(i) = fields.iter().position(String::is_empty) {
                return Err(Error::parse(path, line, format!("column {} has an empty name", i + 1)));
            }
            names = Some(fields);
            continue;
        }
        let width = names.as_ref().map_or(0, Vec::len);
        if fields.len() != width {
            return Err(Error::parse(path, line, format!("{} fields, expected {width}", fields.len())));
        }
        if let Some(c) = fields.iter().position(String::is_empty) {
            return Err(Error::parse(path, line, format!("missing value in column {}", c + 1)));
        }
        rows.push((line, fields));
    }
    let names = names.ok_or_else(|| Error::parse(path, 1, "no header row"))?;
    if rows.is_empty() {
        return Err(Error::parse(path, 1, "no data rows"));
    }
    Ok(RawTable { names, rows, arities_hint })
}

fn infer_schema(path: &Path, raw: &RawTable) -> Result<Schema> {
    let width = raw.names.len();
    let mut labels = Vec::with_capacity(width);
    let mut numeric = Vec::with_capacity(width);
    for c in 0..width {
        let values: Vec<&str> = raw.rows.iter().map(|(_, f)| f[c].as_str()).collect();
        let ints: Option<Vec<usize>> = values.iter().map(|v| v.parse::<usize>().ok()).collect();
        match ints {
            Some(ints) => {
                let mut arity = ints.iter().max().map_or(0, |m| m + 1).max(2);
                if let Some((line, hint)) = &raw.arities_hint {
                    let given = *hint.get(c).ok_or_else(|| {
                        Error::parse(path, *line, format!("{} arities for {width} columns", hint.len()))
                    })?;
                    if given < arity {
                        return Err(Error::parse(
                            path,
                            *line,
                            format!("column {} has arity {given} but holds label {}", raw.names[c], arity - 1),
                        ));
                    }
                    arity = given;
                }
                labels.push((0..arity).map(|v| v.to_string()).collect());
                numeric.push(true);
            }
            None => {
                let set: BTreeSet<&str> = values.into_iter().collect();
                let mut l: Vec<String> = set.into_iter().map(str::to_string).collect();
                if l.len() == 1 {
                    // A constant column still has an unobserved second state.
                    l.push(format!("{}~", l[0]));
                }
                labels.push(l);
                numeric.push(false);
            }
        }
    }
    Ok(Schema { names: raw.names.clone(), labels, numeric })
}

fn resolve_ordering(names: &[String], ordering: Option<&[String]>) -> Result<Vec<usize>> {
    match ordering {
        None => Ok((0..names.len()).collect()),
        Some(order) => {
            let idx = order
                .iter()
                .map(|n| {
                    names.iter().position(|m| m == n).ok_or_else(|| Error::Usage(format!("ordering names unknown variable {n}")))
                })
                .collect::<Result<Vec<_>>>()?;
            VarOrder::new(idx.clone()).map_err(|_| Error::Usage("ordering must list every variable exactly once".into()))?;
            Ok(idx)
        }
    }
}

fn encode(path: &Path, raw: &RawTable, schema: &Schema, ordering: Option<&[String]>) -> Result<Dataset> {
    if raw.names != schema.names {
        return Err(Error::parse(path, 1, "header does not match the expected variable names"));
    }
    let width = schema.names.len();
    let mut columns = vec![Vec::with_capacity(raw.rows.len()); width];
    for (line, fields) in &raw.rows {
        for (c, f) in fields.iter().enumerate() {
            let v = schema
                .lookup(c, f)
                .ok_or_else(|| Error::parse(path, *line, format!("unknown label {f:?} for {}", schema.names[c])))?;
            columns[c].push(v);
        }
    }
    let order = resolve_ordering(&schema.names, ordering)?;
    Ok(Dataset::from_columns(columns, schema.arities(), Some(schema.names.clone()), order)?)
}

/// Load a dataset, inferring labels and arities from its contents.
pub fn load_dataset(path: &Path, ordering: Option<&[String]>) -> Result<(Dataset, Schema)> {
    let raw = read_raw(path)?;
    let schema = infer_schema(path, &raw)?;
    let data = encode(path, &raw, &schema, ordering)?;
    Ok((data, schema))
}

/// Load a dataset that must use an existing schema (e.g. a held-out set).
pub fn load_dataset_with_schema(path: &Path, schema: &Schema, ordering: Option<&[String]>) -> Result<Dataset> {
    encode(path, &read_raw(path)?, schema, ordering)
}

/// CSV text with an `# arities` line, names, then one row per observation.
pub fn dataset_to_csv(data: &Dataset, schema: &Schema) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Usage(format!("csv output: {e}"));
    w.write_record(data.names()).map_err(csv_err)?;
    for r in 0..data.n_rows() {
        w.write_record((0..data.n_vars()).map(|c| schema.labels[c][data.value(r, c)].as_str())).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Usage(e.to_string()))?)
        .expect("csv output is utf-8");
    let mut out = String::from("# arities");
    for a in data.arities() {
        let _ = write!(out, " {a}");
    }
    out.push('\n');
    out.push_str(&body);
    Ok(out)
}
