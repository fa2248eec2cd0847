//! Adjacency matrices of random geometric and Erdős–Rényi graphs, and the
//! centered matrix `Q = A - p (J - I)`.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;
use crate::spectral::SymMatrix;
use crate::sphere::{dot, CapParams, UnitVectorSet};

/// Simple undirected graph on `0..n` with a sorted, duplicate-free edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Adjacency {
    /// Builds from arbitrary pairs; pairs are normalized to `i < j` and sorted.
    /// Self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a}, {b}) out of range for n={n}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self { n, edges: list })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Dense symmetric 0/1 view.
    pub fn dense(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for &(i, j) in &self.edges {
            m.set_sym(i, j, 1.0);
        }
        m
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Edge `{i, j}` iff `<v_i, v_j> >= tau` (ties count as edges).
pub fn geometric_graph(vectors: &UnitVectorSet, cap: &CapParams) -> Result<Adjacency> {
    if cap.d != vectors.d() {
        return Err(invalid(format!(
            "cap calibrated for d={}, vectors have d={}",
            cap.d,
            vectors.d()
        )));
    }
    let n = vectors.n();
    let tau = cap.tau;
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let vi = vectors.row(i);
            (i + 1..n).filter(move |&j| dot(vi, vectors.row(j)) >= tau).map(move |j| (i, j))
        })
        .collect();
    Ok(Adjacency { n, edges })
}

/// `G(n, p)`: pairs `i < j` are visited in lexicographic order and each is
/// kept with probability `p`, using one seeded stream.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Adjacency> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(Adjacency { n, edges })
}

/// `Q = A - p (J - I)`: off-diagonal entries `1 - p` on edges, `-p` elsewhere,
/// zero diagonal.
#[derive(Debug, Clone)]
pub struct CenteredMatrix {
    base: Adjacency,
    p: f64,
}

impl CenteredMatrix {
    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn base(&self) -> &Adjacency {
        &self.base
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else if self.base.has_edge(i, j) {
            1.0 - self.p
        } else {
            -self.p
        }
    }

    pub fn dense(&self) -> SymMatrix {
        let n = self.base.n;
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.set(i, j, -self.p);
                }
            }
        }
        for &(i, j) in &self.base.edges {
            m.set_sym(i, j, 1.0 - self.p);
        }
        m
    }
}

pub fn center(a: &Adjacency, p: f64) -> Result<CenteredMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(CenteredMatrix { base: a.clone(), p })
}

/// Metadata written next to an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub generator: String,
    pub prng: String,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub d: Option<usize>,
    pub tau: Option<f64>,
    pub edges: usize,
}

/// Writes the plain-text edge list: a `n m` header, then one `i j` per line.
pub fn write_edge_list(a: &Adjacency, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {}", a.n, a.edges.len())?;
    for &(i, j) in &a.edges {
        writeln!(w, "{i} {j}")?;
    }
    Ok(())
}

/// Parses the edge-list format. Blank lines and lines starting with `#` are
/// skipped; errors carry 1-based line numbers.
pub fn read_edge_list(r: impl BufRead) -> Result<Adjacency> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line: line_no, msg: format!("expected two integers, got {trimmed:?}") });
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("not a non-negative integer: {s:?}") })
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        match header {
            None => header = Some((a, b)),
            Some((n, _)) => {
                if a >= n || b >= n {
                    return Err(Error::Parse { line: line_no, msg: format!("vertex out of range for n={n}") });
                }
                if a == b {
                    return Err(Error::Parse { line: line_no, msg: "self-loop".into() });
                }
                edges.push((a, b));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse { line: last_line.max(1), msg: "missing header".into() })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Adjacency::from_edges(n, edges).map_err(|e| Error::Parse { line: last_line, msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(d: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        v
    }

    #[test]
    fn equal_vectors_are_adjacent() {
        let mut data = basis(3, 0);
        data.extend(basis(3, 0));
        let vs = UnitVectorSet::from_rows(2, 3, data).unwrap();
        let cap = CapParams::from_tau(0.5, 3).unwrap();
        assert_eq!(geometric_graph(&vs, &cap).unwrap().edges(), &[(0, 1)]);
    }

    #[test]
    fn orthogonal_vectors_are_not_adjacent() {
        let mut data = basis(3, 0);
        data.extend(basis(3, 1));
        let vs = UnitVectorSet::from_rows(2, 3, data).unwrap();
        let cap = CapParams::from_tau(0.5, 3).unwrap();
        assert_eq!(geometric_graph(&vs, &cap).unwrap().edge_count(), 0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let vs = UnitVectorSet::from_rows(1, 3, basis(3, 0)).unwrap();
        let cap = CapParams::from_tau(0.5, 4).unwrap();
        assert!(matches!(geometric_graph(&vs, &cap), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(erdos_renyi(10, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(erdos_renyi(10, 1.0, 1).unwrap().edge_count(), 45);
        assert!(erdos_renyi(10, 1.5, 1).is_err());
        assert_eq!(erdos_renyi(30, 0.3, 5).unwrap(), erdos_renyi(30, 0.3, 5).unwrap());
    }

    #[test]
    fn centered_entries() {
        let q = center(&Adjacency::empty(4), 0.3).unwrap().dense();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.0 } else { -0.3 };
                assert_eq!(q.get(i, j), want);
            }
        }
        let q = center(&Adjacency::complete(3), 0.5).unwrap().dense();
        assert_eq!(q.get(0, 1), 0.5);
        assert_eq!(q.get(2, 2), 0.0);
        let q = center(&Adjacency::from_edges(3, [(0, 1)]).unwrap(), 0.1).unwrap();
        assert!((q.entry(0, 1) - 0.9).abs() < 1e-15);
        assert_eq!(q.entry(0, 2), -0.1);
        assert_eq!(q.entry(1, 2), -0.1);
        assert!(center(&Adjacency::empty(2), 0.0).is_err());
    }

    #[test]
    fn from_edges_validation() {
        assert!(Adjacency::from_edges(3, [(0, 0)]).is_err());
        assert!(Adjacency::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Adjacency::from_edges(3, [(0, 3)]).is_err());
        let a = Adjacency::from_edges(3, [(2, 1), (1, 0)]).unwrap();
        assert_eq!(a.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(a.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn edge_list_parse_errors_carry_line_numbers() {
        let bad = "3 2\n0 1\n1 x\n";
        match read_edge_list(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "3 2\n0 1\n";
        assert!(matches!(read_edge_list(short.as_bytes()), Err(Error::Parse { .. })));
        let range = "3 1\n0 5\n";
        assert!(matches!(read_edge_list(range.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn edge_list_round_trip() {
        let a = Adjacency::from_edges(5, [(0, 1), (3, 4), (1, 4)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "5 3\n0 1\n1 4\n3 4\n");
        assert_eq!(read_edge_list(buf.as_slice()).unwrap(), a);
    }
}
