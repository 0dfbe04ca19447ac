//! Dense transition matrices and conversion to and from [`Strategy`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::strategy::{Strategy, StrategyBuilder, STOCHASTIC_TOLERANCE};

/// Row-stochastic matrix over memory nodes; row = from, column = to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    order: Vec<String>,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates shape, entry range and row sums.
    pub fn new(order: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = order.len();
        if rows.len() != n {
            return Err(Error::MalformedDocument(format!(
                "matrix has {} rows for {n} node ids",
                rows.len()
            )));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (id, row) in order.iter().zip(&rows) {
            if row.len() != n {
                return Err(Error::MalformedDocument(format!(
                    "row `{id}` has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidProbability {
                        from: id.clone(),
                        to: order[j].clone(),
                        p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::RowNotStochastic {
                    node: id.clone(),
                    sum,
                });
            }
            entries.extend_from_slice(row);
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = order.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::DuplicateId {
                kind: "node",
                id: dup.clone(),
            });
        }
        Ok(TransitionMatrix { order, entries })
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.order.len() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.order.len();
        &self.entries[from * n..(from + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.order
            .iter()
            .position(|o| o == id)
            .ok_or_else(|| Error::UnknownReference {
                kind: "node",
                id: id.to_owned(),
            })
    }

    /// Positive entries as `(from, to)` pairs, row-major.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) > 0.0)
            .collect()
    }

    /// Compressed rows: for each node, its `(to, p)` pairs with `p > 0`.
    pub fn sparse_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.len())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(j, &p)| (j, p))
                    .collect()
            })
            .collect()
    }

    /// Parses the CSV import format: the first row and first column hold node ids.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = records
            .next()
            .ok_or_else(|| Error::MalformedDocument("empty matrix CSV".into()))?
            .map_err(csv_error)?;
        let order: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut rows = vec![Vec::new(); order.len()];
        let mut seen = 0;
        for record in records {
            let record = record.map_err(csv_error)?;
            let id = record.get(0).unwrap_or_default();
            let i = order
                .iter()
                .position(|o| o == id)
                .ok_or_else(|| Error::UnknownReference {
                    kind: "node",
                    id: id.to_owned(),
                })?;
            rows[i] = record
                .iter()
                .skip(1)
                .map(|cell| {
                    cell.parse::<f64>().map_err(|_| {
                        Error::MalformedDocument(format!("row `{id}`: `{cell}` is not a number"))
                    })
                })
                .collect::<Result<_>>()?;
            seen += 1;
        }
        if seen != order.len() {
            return Err(Error::MalformedDocument(format!(
                "matrix CSV has {seen} rows for {} columns",
                order.len()
            )));
        }
        TransitionMatrix::new(order, rows)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::MalformedDocument(e.to_string())
}

/// Reads a two-column `node_id,location_id` CSV. A literal header row is skipped.
pub fn parse_location_map(text: &str) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != 2 {
            return Err(Error::MalformedDocument(format!(
                "location map line {} has {} columns",
                k + 1,
                record.len()
            )));
        }
        if k == 0 && &record[0] == "node_id" && &record[1] == "location_id" {
            continue;
        }
        out.push((record[0].to_owned(), record[1].to_owned()));
    }
    Ok(out)
}

/// Dense matrix in the strategy's node order.
pub fn to_matrix(strategy: &Strategy) -> TransitionMatrix {
    let n = strategy.node_count();
    let mut entries = vec![0.0; n * n];
    for e in strategy.edges() {
        entries[e.from * n + e.to] = e.p;
    }
    TransitionMatrix {
        order: strategy.node_ids(),
        entries,
    }
}

/// Builds a strategy from a matrix and a node→location map. Locations are created in order of
/// first appearance when walking the matrix order.
pub fn from_matrix(
    name: &str,
    matrix: &TransitionMatrix,
    location_map: &[(String, String)],
) -> Result<Strategy> {
    for (node, _) in location_map {
        if !matrix.order.contains(node) {
            return Err(Error::UnknownReference {
                kind: "node",
                id: node.clone(),
            });
        }
    }
    let mut builder = StrategyBuilder::new(name);
    let mut declared: Vec<&str> = Vec::new();
    let mut assignments = Vec::with_capacity(matrix.len());
    for id in &matrix.order {
        let loc = location_map
            .iter()
            .find(|(n, _)| n == id)
            .map(|(_, l)| l.as_str())
            .ok_or_else(|| Error::UnknownReference {
                kind: "location mapping for node",
                id: id.clone(),
            })?;
        if !declared.contains(&loc) {
            declared.push(loc);
            builder = builder.location(loc, loc);
        }
        assignments.push((id, loc));
    }
    for (id, loc) in assignments {
        builder = builder.node(id.as_str(), loc);
    }
    for (i, from) in matrix.order.iter().enumerate() {
        for (j, to) in matrix.order.iter().enumerate() {
            let p = matrix.get(i, j);
            if p > 0.0 {
                builder = builder.edge(from.as_str(), to.as_str(), p);
            }
        }
    }
    builder.build()
}
