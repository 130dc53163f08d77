//! Edge update streams: text format and seeded generation.
//!
//! One event per line, 0-based vertex ids:
//!
//! ```text
//! i <u> <v> <w>    insertion
//! d <u> <v>        deletion
//! #batch           closes the current batch
//! # anything       comment
//! ```
//!
//! Events after the last `#batch` marker form a final batch.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("cannot open {path}")]
    Open {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("event {position}: {msg}")]
    InvalidEvent { position: usize, msg: String },

    #[error("could only find {found} of {requested} non-edges after {attempts} attempts")]
    TooDense {
        requested: usize,
        found: usize,
        attempts: usize,
    },

    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Insert { weight: f64 },
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeEvent {
    pub kind: EventKind,
    pub u: VertexId,
    pub v: VertexId,
    pub batch_index: usize,
}

impl EdgeEvent {
    pub fn insert(u: VertexId, v: VertexId, weight: f64, batch_index: usize) -> Self {
        Self {
            kind: EventKind::Insert { weight },
            u,
            v,
            batch_index,
        }
    }

    pub fn delete(u: VertexId, v: VertexId, batch_index: usize) -> Self {
        Self {
            kind: EventKind::Delete,
            u,
            v,
            batch_index,
        }
    }

    pub fn is_insertion(&self) -> bool {
        matches!(self.kind, EventKind::Insert { .. })
    }

    /// Checks ids against `n`, self-loops and weight sign.
    pub fn validate(&self, n: usize) -> Result<(), String> {
        if self.u >= n || self.v >= n {
            return Err(format!("vertex out of range for {n} vertices in ({}, {})", self.u, self.v));
        }
        if self.u == self.v {
            return Err(format!("self-loop at vertex {}", self.u));
        }
        if let EventKind::Insert { weight } = self.kind {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(format!("non-positive weight {weight} on ({}, {})", self.u, self.v));
            }
        }
        Ok(())
    }
}

/// Ordered events grouped into consecutive batches.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UpdateStream {
    events: Vec<EdgeEvent>,
    batch_count: usize,
}

impl UpdateStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stream from explicit batches.
    pub fn from_batches<I, B>(batches: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = EdgeEvent>,
    {
        let mut s = Self::new();
        for batch in batches {
            for mut e in batch {
                e.batch_index = s.batch_count;
                s.events.push(e);
            }
            s.batch_count += 1;
        }
        s
    }

    /// Each event in its own batch.
    pub fn one_per_batch(events: impl IntoIterator<Item = EdgeEvent>) -> Self {
        Self::from_batches(events.into_iter().map(|e| [e]))
    }

    pub fn events(&self) -> &[EdgeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn batch_count(&self) -> usize {
        self.batch_count
    }

    /// `(first event position, events)` for every batch in order, empty
    /// batches included.
    pub fn batches(&self) -> Vec<(usize, &[EdgeEvent])> {
        let mut out = Vec::with_capacity(self.batch_count);
        let mut start = 0;
        for b in 0..self.batch_count {
            let mut end = start;
            while end < self.events.len() && self.events[end].batch_index == b {
                end += 1;
            }
            out.push((start, &self.events[start..end]));
            start = end;
        }
        out
    }

    pub fn insertion_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_insertion()).count()
    }

    pub fn deletion_count(&self) -> usize {
        self.events.len() - self.insertion_count()
    }

    /// Checks every event against a vertex count.
    pub fn validate(&self, n: usize) -> Result<(), StreamError> {
        for (position, e) in self.events.iter().enumerate() {
            e.validate(n)
                .map_err(|msg| StreamError::InvalidEvent { position, msg })?;
        }
        Ok(())
    }
}

pub fn parse_stream<R: BufRead>(reader: R) -> Result<UpdateStream, StreamError> {
    let mut s = UpdateStream::new();
    let mut open_batch = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if t == "#batch" || t.split_whitespace().next() == Some("#batch") {
                s.batch_count += 1;
                open_batch = false;
            }
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        let err = |msg: String| StreamError::Parse { line: lineno, msg };
        let vertex = |tok: &str| -> Result<usize, StreamError> {
            tok.parse()
                .map_err(|e| err(format!("bad vertex '{tok}': {e}")))
        };
        let b = s.batch_count;
        let event = match (f[0], f.len()) {
            ("i", 4) => {
                let w: f64 = f[3]
                    .parse()
                    .map_err(|e| err(format!("bad weight '{}': {e}", f[3])))?;
                EdgeEvent::insert(vertex(f[1])?, vertex(f[2])?, w, b)
            }
            ("d", 3) => EdgeEvent::delete(vertex(f[1])?, vertex(f[2])?, b),
            _ => return Err(err(format!("expected 'i u v w' or 'd u v', got '{t}'"))),
        };
        s.events.push(event);
        open_batch = true;
    }
    if open_batch {
        s.batch_count += 1;
    }
    Ok(s)
}

pub fn read_stream(path: impl AsRef<Path>) -> Result<UpdateStream, StreamError> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|source| StreamError::Open {
        path: path.display().to_string(),
        source,
    })?;
    parse_stream(BufReader::new(f))
}

pub fn write_stream<W: Write>(s: &UpdateStream, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "# {} events ({} insertions, {} deletions) in {} batches",
        s.len(),
        s.insertion_count(),
        s.deletion_count(),
        s.batch_count()
    )?;
    for (_, batch) in s.batches() {
        for e in batch {
            match e.kind {
                EventKind::Insert { weight } => writeln!(out, "i {} {} {}", e.u, e.v, weight)?,
                EventKind::Delete => writeln!(out, "d {} {}", e.u, e.v)?,
            }
        }
        writeln!(out, "#batch")?;
    }
    Ok(())
}

pub fn save_stream(s: &UpdateStream, path: impl AsRef<Path>) -> Result<(), StreamError> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|source| StreamError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut w = std::io::BufWriter::new(f);
    write_stream(s, &mut w)?;
    w.flush()?;
    Ok(())
}

/// How inserted endpoints are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InsertionLocality {
    /// Both endpoints uniform over all vertices.
    Uniform,
    /// First endpoint uniform; the second is where a plain random walk of
    /// `2..=max_hops` steps on `G` ends.
    WithinHops(usize),
    /// Each insertion is uniform with probability `long_range`, otherwise
    /// local as in [`InsertionLocality::WithinHops`].
    Mixed { max_hops: usize, long_range: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamParams {
    /// Insertions as a fraction of the vertex count.
    pub insert_frac: f64,
    /// Deletions as a fraction of the edge count.
    pub delete_frac: f64,
    pub batches: usize,
    pub seed: u64,
    pub locality: InsertionLocality,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self {
            insert_frac: 0.0,
            delete_frac: 0.0,
            batches: 1,
            seed: 0,
            locality: InsertionLocality::Uniform,
        }
    }
}

/// Generates a seeded stream against `g`.
///
/// Insertions are distinct non-edges of `g` with weights uniform over `g`'s
/// weight range; deletions are distinct existing edges chosen uniformly
/// (connectivity is not preserved on purpose). Both lists are split evenly
/// across batches; each batch lists its insertions before its deletions.
pub fn generate_updates(g: &DynamicGraph, params: &StreamParams) -> Result<UpdateStream, StreamError> {
    if !(params.insert_frac >= 0.0) || !(params.delete_frac >= 0.0) {
        return Err(StreamError::InvalidParameter("fractions must be non-negative".into()));
    }
    if params.batches == 0 {
        return Err(StreamError::InvalidParameter("need at least one batch".into()));
    }
    match params.locality {
        InsertionLocality::WithinHops(h) | InsertionLocality::Mixed { max_hops: h, .. } if h < 2 => {
            return Err(StreamError::InvalidParameter("max hops must be at least 2".into()));
        }
        InsertionLocality::Mixed { long_range, .. } if !(0.0..=1.0).contains(&long_range) => {
            return Err(StreamError::InvalidParameter(format!(
                "long-range fraction must lie in [0, 1], got {long_range}"
            )));
        }
        _ => {}
    }
    let n = g.vertex_count();
    let n_ins = (params.insert_frac * n as f64).round() as usize;
    let n_del = ((params.delete_frac * g.edge_count() as f64).round() as usize).min(g.edge_count());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let (wlo, whi) = g.min_max_weight().unwrap_or((1.0, 1.0));
    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(n_ins);
    let mut insertions = Vec::with_capacity(n_ins);
    let budget = 100 * n_ins + 1000;
    let mut attempts = 0;
    while insertions.len() < n_ins && attempts < budget {
        attempts += 1;
        let u = rng.random_range(0..n.max(1));
        let v = match params.locality {
            InsertionLocality::Uniform => rng.random_range(0..n.max(1)),
            InsertionLocality::WithinHops(h) => {
                let hops = rng.random_range(2..=h);
                plain_walk_end(g, u, hops, &mut rng)
            }
            InsertionLocality::Mixed { max_hops, long_range } => {
                if rng.random::<f64>() < long_range {
                    rng.random_range(0..n.max(1))
                } else {
                    let hops = rng.random_range(2..=max_hops);
                    plain_walk_end(g, u, hops, &mut rng)
                }
            }
        };
        if u == v || g.has_edge(u, v) || !chosen.insert((u.min(v), u.max(v))) {
            continue;
        }
        let w = if whi > wlo { rng.random_range(wlo..=whi) } else { wlo };
        insertions.push((u, v, w));
    }
    if insertions.len() < n_ins {
        return Err(StreamError::TooDense {
            requested: n_ins,
            found: insertions.len(),
            attempts,
        });
    }

    let mut existing = g.sorted_edges();
    existing.shuffle(&mut rng);
    let deletions: Vec<(usize, usize)> = existing[..n_del].iter().map(|&(u, v, _)| (u, v)).collect();

    let b = params.batches;
    let share = |len: usize, i: usize| (i * len / b)..((i + 1) * len / b);
    Ok(UpdateStream::from_batches((0..b).map(|i| {
        let ins = insertions[share(insertions.len(), i)]
            .iter()
            .map(|&(u, v, w)| EdgeEvent::insert(u, v, w, i));
        let del = deletions[share(deletions.len(), i)]
            .iter()
            .map(|&(u, v)| EdgeEvent::delete(u, v, i));
        ins.chain(del).collect::<Vec<_>>()
    })))
}

fn plain_walk_end<R: Rng>(g: &DynamicGraph, start: usize, hops: usize, rng: &mut R) -> usize {
    let mut at = start;
    for _ in 0..hops {
        let nbrs = g.neighbors(at);
        if nbrs.is_empty() {
            break;
        }
        at = nbrs[rng.random_range(0..nbrs.len())].0;
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{grid, WeightRange};

    #[test]
    fn parse_batches_and_comments() {
        let s = parse_stream("# header\ni 0 1 2.5\nd 1 2\n#batch\ni 2 3 1\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.batch_count(), 2);
        let b = s.batches();
        assert_eq!(b[0].1.len(), 2);
        assert_eq!(b[1].0, 2);
        assert_eq!(s.events()[0].kind, EventKind::Insert { weight: 2.5 });
        assert_eq!(s.events()[1].kind, EventKind::Delete);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_stream("x 0 1\n".as_bytes()).is_err());
        assert!(parse_stream("i 0 1\n".as_bytes()).is_err());
        assert!(parse_stream("d 0 1 3\n".as_bytes()).is_err());
        assert!(parse_stream("i 0 a 1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn validation_reports_position() {
        let s = parse_stream("i 0 1 1\ni 2 2 1\n".as_bytes()).unwrap();
        match s.validate(3) {
            Err(StreamError::InvalidEvent { position, .. }) => assert_eq!(position, 1),
            other => panic!("{other:?}"),
        }
        let s = parse_stream("i 0 1 -1\n".as_bytes()).unwrap();
        assert!(s.validate(3).is_err());
    }

    #[test]
    fn write_parse_round_trip() {
        let g = grid(10, 10, WeightRange::new(0.5, 3.0), 1);
        let params = StreamParams {
            insert_frac: 0.3,
            delete_frac: 0.05,
            batches: 4,
            seed: 9,
            ..Default::default()
        };
        let s = generate_updates(&g, &params).unwrap();
        let mut buf = Vec::new();
        write_stream(&s, &mut buf).unwrap();
        assert_eq!(parse_stream(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn protocol_counts() {
        let g = grid(100, 100, WeightRange::UNIT, 0);
        let params = StreamParams {
            insert_frac: 0.25,
            batches: 10,
            seed: 1,
            ..Default::default()
        };
        let s = generate_updates(&g, &params).unwrap();
        assert_eq!(s.insertion_count(), 2500);
        assert!(s.batches().iter().all(|(_, b)| b.len() == 250));

        let d = generate_updates(
            &g,
            &StreamParams {
                delete_frac: 0.01,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(d.deletion_count(), (0.01 * g.edge_count() as f64).round() as usize);
    }

    #[test]
    fn generated_insertions_are_fresh_non_edges() {
        let g = grid(12, 12, WeightRange::new(1.0, 2.0), 0);
        for locality in [
            InsertionLocality::Uniform,
            InsertionLocality::WithinHops(4),
            InsertionLocality::Mixed { max_hops: 4, long_range: 0.1 },
        ] {
            let params = StreamParams {
                insert_frac: 0.5,
                batches: 3,
                seed: 5,
                locality,
                ..Default::default()
            };
            let s = generate_updates(&g, &params).unwrap();
            let mut seen = HashSet::new();
            for e in s.events() {
                assert!(!g.has_edge(e.u, e.v));
                assert!(seen.insert((e.u.min(e.v), e.u.max(e.v))));
                match e.kind {
                    EventKind::Insert { weight } => assert!((1.0..=2.0).contains(&weight)),
                    EventKind::Delete => unreachable!(),
                }
            }
            assert_eq!(s, generate_updates(&g, &params).unwrap());
        }
    }

    #[test]
    fn complete_graph_is_too_dense() {
        let mut g = DynamicGraph::new(4);
        for u in 0..4 {
            for v in u + 1..4 {
                g.insert_edge(u, v, 1.0).unwrap();
            }
        }
        let params = StreamParams {
            insert_frac: 1.0,
            ..Default::default()
        };
        assert!(matches!(generate_updates(&g, &params), Err(StreamError::TooDense { .. })));
    }
}
