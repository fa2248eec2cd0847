#![allow(dead_code)]

use std::collections::BTreeSet;

use rgglab::decomp::{block_cut_tree, ear_decomposition, find_bridges, validate_ears, EarDecomposition, SimpleGraph};

/// Components of `edges` on `n` vertices by union-find, excluding edge `skip`.
fn component_count(n: usize, edges: &[(usize, usize)], skip: Option<usize>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for (i, &(a, b)) in edges.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

/// Bridges by definition: removing the edge disconnects its endpoints.
pub fn definitional_bridges(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let base = component_count(n, edges, None);
    let mut out: Vec<_> = (0..edges.len())
        .filter(|&i| component_count(n, edges, Some(i)) > base)
        .map(|i| edges[i])
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Default)]
pub struct ExhaustiveReport {
    pub connected: u64,
    pub two_edge_connected: u64,
    pub failures: Vec<String>,
}

/// Runs the decomposition checks on every connected labelled graph on `n`
/// vertices.
pub fn exhaustive_decomposition(n: usize, report: &mut ExhaustiveReport) {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    for mask in 0u64..(1u64 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        if component_count(n, &edges, None) != 1 {
            continue;
        }
        report.connected += 1;
        let mut fail = |msg: String| {
            if report.failures.len() < 20 {
                report.failures.push(format!("n={n} edges={edges:?}: {msg}"));
            }
        };
        let g = SimpleGraph::from_edges(n, edges.iter().copied()).unwrap();
        let bridges = find_bridges(&g);
        let oracle = definitional_bridges(n, &edges);
        if bridges != oracle {
            fail(format!("bridges {bridges:?} vs definitional {oracle:?}"));
            continue;
        }
        let bct = block_cut_tree(&g).unwrap();
        // edge partition: 2-edge-connected components plus bridges, disjoint
        let mut seen = BTreeSet::new();
        let mut dup = false;
        for e in bct.two_edge_connected_components.iter().flat_map(|c| c.edges.iter()).chain(bct.bridges.iter()) {
            dup |= !seen.insert(*e);
        }
        if dup || seen.len() != edges.len() {
            fail("edge partition violated".into());
        }
        if bridges.is_empty() && !edges.is_empty() {
            report.two_edge_connected += 1;
            let ears = ear_decomposition(&g, 0).unwrap();
            if ears.len() != edges.len() + 1 - n {
                fail(format!("{} ears, expected {}", ears.len(), edges.len() + 1 - n));
            }
            let v = validate_ears(&g, &ears);
            if !v.valid {
                fail(format!("invalid ears {:?}: {:?}", ears.ears, v.violation));
            }
        }
    }
}

fn one_based(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect()
}

/// Ten-vertex fixture with three bridges, two 2-edge-connected blocks and
/// junctions {2, 8} (1-based).
pub fn bridge_fixture() -> SimpleGraph {
    let e = [(1, 2), (1, 5), (2, 8), (8, 9), (8, 10), (9, 10), (6, 7), (7, 4), (2, 6), (6, 4), (4, 3), (3, 2), (2, 4)];
    SimpleGraph::from_edges(10, one_based(&e)).unwrap()
}

/// Eleven vertices, fourteen edges, with a known four-ear decomposition.
pub fn ear_fixture() -> (SimpleGraph, EarDecomposition) {
    let ears1: [&[usize]; 4] = [&[1, 2, 3, 4, 1], &[2, 5, 6, 7, 4], &[4, 11, 7], &[5, 8, 9, 10, 7]];
    let ears: Vec<Vec<usize>> = ears1.iter().map(|e| e.iter().map(|v| v - 1).collect()).collect();
    let edges: Vec<(usize, usize)> = ears.iter().flat_map(|e| e.windows(2).map(|w| (w[0], w[1]))).collect();
    let g = SimpleGraph::from_edges(11, edges).unwrap();
    (g, EarDecomposition { root: 0, ears })
}
