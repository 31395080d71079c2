use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::linalg::DenseMatrix;

/// Where the class label sits in each comma-separated row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassColumn {
    First,
    Last,
}

/// Column layout of a categorical data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableFormat {
    pub columns: usize,
    pub class_column: ClassColumn,
}

impl TableFormat {
    /// Car evaluation: six attributes, class last.
    pub const CARS: TableFormat = TableFormat { columns: 7, class_column: ClassColumn::Last };
    /// Mushrooms: class (`e`/`p`) first, then 22 attributes.
    pub const MUSHROOMS: TableFormat = TableFormat { columns: 23, class_column: ClassColumn::First };
}

/// 1-based file column of the mushroom stalk-root attribute, the only one with missing values.
pub const MUSHROOM_STALK_ROOT_COLUMN: usize = 12;

/// Rows of discrete attribute values plus a class value per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalTable {
    pub rows: Vec<Vec<String>>,
    pub classes: Vec<String>,
}

impl CategoricalTable {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn attributes(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// 0-based class indices in order of first appearance, and the class names.
    pub fn class_labels(&self) -> (Vec<usize>, Vec<String>) {
        let mut names: Vec<String> = Vec::new();
        let labels = self
            .classes
            .iter()
            .map(|c| match names.iter().position(|n| n == c) {
                Some(k) => k,
                None => {
                    names.push(c.clone());
                    names.len() - 1
                }
            })
            .collect();
        (labels, names)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Reads a comma-separated categorical file. `drop_columns` are 1-based file
/// columns (the class column counts); `?` or an empty cell is a missing value.
pub fn load_categorical(path: &Path, drop_columns: &[usize], format: TableFormat) -> Result<CategoricalTable> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_categorical(&text, drop_columns, format)
}

pub fn parse_categorical(text: &str, drop_columns: &[usize], format: TableFormat) -> Result<CategoricalTable> {
    let class_col = match format.class_column {
        ClassColumn::First => 1,
        ClassColumn::Last => format.columns,
    };
    if drop_columns.contains(&class_col) {
        return Err(Error::InvalidParameter("cannot drop the class column".into()));
    }
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').map(str::trim).collect();
        if cells.len() != format.columns {
            return Err(Error::Parse {
                line,
                message: format!("expected {} columns, found {}", format.columns, cells.len()),
            });
        }
        let mut row = Vec::with_capacity(format.columns - 1 - drop_columns.len());
        for (c, &cell) in cells.iter().enumerate() {
            let column = c + 1;
            if drop_columns.contains(&column) {
                continue;
            }
            if cell.is_empty() || cell == "?" {
                return Err(Error::MissingValue { line, column });
            }
            if column == class_col {
                classes.push(cell.to_string());
            } else {
                row.push(cell.to_string());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data rows".into() });
    }
    Ok(CategoricalTable { rows, classes })
}

/// One unit-weight hyperedge per observed (attribute, value) pair, attribute
/// by attribute, values in order of first appearance.
pub fn table_to_hypergraph(t: &CategoricalTable) -> Result<Hypergraph> {
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for a in 0..t.attributes() {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let first = edges.len();
        for (i, row) in t.rows.iter().enumerate() {
            let next = edges.len();
            let e = *index.entry(row[a].as_str()).or_insert(next);
            if e == edges.len() {
                edges.push(Vec::new());
            }
            edges[e].push(i);
        }
        debug_assert!(edges.len() > first);
    }
    Hypergraph::unweighted(t.n(), edges)
}

/// The incidence matrix, used directly as the node feature matrix.
pub fn incidence_as_input(hg: &Hypergraph) -> DenseMatrix {
    hg.incidence()
}

/// Reads 1-based node indices, one per line.
pub fn load_train_indices(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_train_indices(&text)
}

pub fn parse_train_indices(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        let v: usize = s
            .parse()
            .map_err(|_| Error::InvalidDataset(format!("line {}: '{s}' is not a positive integer", k + 1)))?;
        if v == 0 {
            return Err(Error::InvalidDataset(format!("line {}: indices are 1-based", k + 1)));
        }
        if out.contains(&v) {
            return Err(Error::InvalidDataset(format!("duplicate index {v}")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::InvalidDataset("no training indices".into()));
    }
    Ok(out)
}

/// Converts 1-based indices to 0-based ones, checking they fit `n` nodes.
pub fn bind_indices(indices: &[usize], n: usize) -> Result<Vec<usize>> {
    indices
        .iter()
        .map(|&i| {
            if (1..=n).contains(&i) {
                Ok(i - 1)
            } else {
                Err(Error::InvalidDataset(format!("index {i} outside 1..={n}")))
            }
        })
        .collect()
}
