//! MatrixMarket and plain edge-list readers and writers.
//!
//! MatrixMarket input may be a Laplacian or an adjacency matrix: every
//! off-diagonal entry contributes `|value|` to its unordered vertex pair,
//! repeated entries for a pair are summed, and diagonal entries are ignored.
//! Indices are 1-based on disk and 0-based in memory.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{DynamicGraph, GraphError, VertexId};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot open {path}")]
    Open {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: index {index} outside the declared {dim} x {dim} matrix")]
    IndexOutOfRange { line: usize, index: usize, dim: usize },

    #[error("pair ({u}, {v}) coalesces to non-positive weight {weight}")]
    NonPositiveWeight { u: VertexId, v: VertexId, weight: f64 },

    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, IoError> {
    File::open(path).map(BufReader::new).map_err(|source| IoError::Open {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

/// Reads a MatrixMarket coordinate file into a graph.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DynamicGraph, IoError> {
    parse_matrix_market(open(path.as_ref())?)
}

/// Parses MatrixMarket coordinate text (`real`, `integer` or `pattern`;
/// `symmetric` or `general`).
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<DynamicGraph, IoError> {
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    match tokens[4].as_str() {
        "symmetric" | "general" => {}
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut seen = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize, IoError> {
            it.next()
                .ok_or_else(|| parse_err(lineno, format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| parse_err(lineno, format!("bad {what}: {e}")))
        };
        match size {
            None => {
                let rows = next_usize("row count")?;
                let cols = next_usize("column count")?;
                let nnz = next_usize("entry count")?;
                if rows != cols {
                    return Err(parse_err(lineno, format!("matrix is {rows} x {cols}, not square")));
                }
                size = Some((rows, cols, nnz));
            }
            Some((dim, _, _)) => {
                let i = next_usize("row index")?;
                let j = next_usize("column index")?;
                for index in [i, j] {
                    if index == 0 || index > dim {
                        return Err(IoError::IndexOutOfRange {
                            line: lineno,
                            index,
                            dim,
                        });
                    }
                }
                let value = match field {
                    Field::Pattern => 1.0,
                    Field::Real | Field::Integer => it
                        .next()
                        .ok_or_else(|| parse_err(lineno, "missing value"))?
                        .parse::<f64>()
                        .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?,
                };
                if !value.is_finite() {
                    return Err(parse_err(lineno, "non-finite value"));
                }
                seen += 1;
                if i == j {
                    continue;
                }
                let key = ((i - 1).min(j - 1), (i - 1).max(j - 1));
                *pairs.entry(key).or_insert(0.0) += value.abs();
            }
        }
    }

    let (dim, _, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if seen != nnz {
        return Err(parse_err(
            0,
            format!("header declares {nnz} entries but {seen} were read"),
        ));
    }
    let mut g = DynamicGraph::new(dim);
    for ((u, v), w) in pairs {
        if !(w > 0.0) {
            return Err(IoError::NonPositiveWeight { u, v, weight: w });
        }
        g.insert_edge(u, v, w)?;
    }
    Ok(g)
}

/// Writes the graph as a symmetric real MatrixMarket adjacency matrix
/// (lower triangle, positive weights). Weights use Rust's shortest
/// round-trip float formatting, so reading the file back is exact.
pub fn write_matrix_market<W: Write>(g: &DynamicGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "% weighted adjacency, written by dysparse")?;
    let n = g.vertex_count();
    writeln!(out, "{n} {n} {}", g.edge_count())?;
    // sorted (u < v) pairs written as (row v, col u): column-major lower triangle
    for (u, v, w) in g.sorted_edges() {
        writeln!(out, "{} {} {}", v + 1, u + 1, w)?;
    }
    Ok(())
}

pub fn save_matrix_market(g: &DynamicGraph, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| IoError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix_market(g, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Plain edge list: one `u v [w]` per line, 0-based ids, weight defaulting
/// to 1; `#` and `%` start comments. Duplicate pairs coalesce. With `n` of
/// `None` the vertex count is one past the largest id.
pub fn parse_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<DynamicGraph, IoError> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() < 2 || f.len() > 3 {
            return Err(parse_err(lineno, "expected 'u v [w]'"));
        }
        let u: usize = f[0]
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad vertex: {e}")))?;
        let v: usize = f[1]
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad vertex: {e}")))?;
        let w: f64 = match f.get(2) {
            Some(s) => s
                .parse()
                .map_err(|e| parse_err(lineno, format!("bad weight: {e}")))?,
            None => 1.0,
        };
        if let Some(n) = n {
            for index in [u, v] {
                if index >= n {
                    return Err(IoError::IndexOutOfRange {
                        line: lineno,
                        index,
                        dim: n,
                    });
                }
            }
        }
        edges.push((u, v, w));
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0));
    let mut g = DynamicGraph::new(n);
    for (u, v, w) in edges {
        g.insert_edge(u, v, w)?;
    }
    Ok(g)
}

/// Reads either format: files whose first line is a MatrixMarket banner are
/// parsed as such, anything else as an edge list (see [`parse_edge_list`]).
pub fn read_graph_file(path: impl AsRef<Path>, n: Option<usize>) -> Result<DynamicGraph, IoError> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let reader = open(path)?;
    if first.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
        parse_matrix_market(reader)
    } else {
        parse_edge_list(reader, n)
    }
}
