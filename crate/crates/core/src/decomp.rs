//! Edge-connectivity decompositions of simple graphs: bridges, the block-cut
//! tree (2-edge-connected components joined by bridge components), junction
//! vertices, DFS ear decompositions, and the statistics of the graph spanned
//! by a closed walk.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::{invalid, Error, Result};
use crate::graphgen::Adjacency;

pub type Edge = (usize, usize);

fn norm_edge(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<Edge>,
    /// `(neighbor, edge id)`, sorted by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let a = Adjacency::from_edges(n, edges)?;
        Ok(Self::from(&a))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&norm_edge(a, b)).is_ok()
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    /// Induced subgraph on `vertices` restricted to `edges`, relabeled to
    /// `0..vertices.len()` in the order given.
    fn relabeled(vertices: &[usize], edges: &[Edge]) -> Self {
        let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let local = edges.iter().map(|&(a, b)| (index[&a], index[&b]));
        Self::from_edges(vertices.len(), local).expect("subgraph of a simple graph is simple")
    }
}

impl From<&Adjacency> for SimpleGraph {
    fn from(a: &Adjacency) -> Self {
        let n = a.n();
        let edges = a.edges().to_vec();
        let mut adj = vec![Vec::new(); n];
        for (id, &(i, j)) in edges.iter().enumerate() {
            adj[i].push((j, id));
            adj[j].push((i, id));
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        Self { n, edges, adj }
    }
}

/// Bridges by the low-link method (iterative DFS), sorted.
pub fn find_bridges(g: &SimpleGraph) -> Vec<Edge> {
    const UNSEEN: usize = usize::MAX;
    let n = g.n;
    let mut tin = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut bridges = Vec::new();
    // (vertex, edge id used to enter it, next adjacency index)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for s in 0..n {
        if tin[s] != UNSEEN {
            continue;
        }
        tin[s] = timer;
        low[s] = timer;
        timer += 1;
        stack.push((s, UNSEEN, 0));
        while let Some(top) = stack.last_mut() {
            let (v, parent_edge, idx) = *top;
            if idx < g.adj[v].len() {
                top.2 += 1;
                let (u, eid) = g.adj[v][idx];
                if eid == parent_edge {
                    continue;
                }
                if tin[u] == UNSEEN {
                    tin[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    stack.push((u, eid, 0));
                } else {
                    low[v] = low[v].min(tin[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > tin[p] {
                        bridges.push(norm_edge(p, v));
                    }
                }
            }
        }
    }
    bridges.sort_unstable();
    bridges
}

/// Vertex and edge subset of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCutTree {
    pub two_edge_connected_components: Vec<Component>,
    /// Subtrees spanned by bridges.
    pub bridge_components: Vec<Component>,
    pub bridges: Vec<Edge>,
    /// Vertices incident both to a bridge and to a 2-edge-connected component.
    pub junctions: Vec<usize>,
}

/// Groups `edges` into connected pieces (each with at least one edge).
fn edge_components(n: usize, edges: &[Edge]) -> Vec<Component> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
    for &(a, b) in edges {
        let r = find(&mut parent, a);
        let c = groups.entry(r).or_insert_with(|| Component { vertices: Vec::new(), edges: Vec::new() });
        c.edges.push((a, b));
        c.vertices.push(a);
        c.vertices.push(b);
    }
    let mut out: Vec<Component> = groups
        .into_values()
        .map(|mut c| {
            c.vertices.sort_unstable();
            c.vertices.dedup();
            c.edges.sort_unstable();
            c
        })
        .collect();
    out.sort_by_key(|c| c.vertices[0]);
    out
}

pub fn block_cut_tree(g: &SimpleGraph) -> Result<BlockCutTree> {
    if g.n == 0 {
        return Err(invalid("block-cut tree of an empty graph"));
    }
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected { a: comps[0][0], b: comps[1][0] });
    }
    if g.n == 1 {
        return Ok(BlockCutTree {
            two_edge_connected_components: Vec::new(),
            bridge_components: vec![Component { vertices: vec![0], edges: Vec::new() }],
            bridges: Vec::new(),
            junctions: Vec::new(),
        });
    }
    let bridges = find_bridges(g);
    let bridge_set: BTreeSet<Edge> = bridges.iter().copied().collect();
    let (bridge_edges, cyclic_edges): (Vec<Edge>, Vec<Edge>) =
        g.edges.iter().copied().partition(|e| bridge_set.contains(e));
    let two_edge_connected_components = edge_components(g.n, &cyclic_edges);
    let bridge_components = edge_components(g.n, &bridge_edges);

    let mut on_bridge = vec![false; g.n];
    let mut on_cycle = vec![false; g.n];
    for &(a, b) in &bridge_edges {
        on_bridge[a] = true;
        on_bridge[b] = true;
    }
    for &(a, b) in &cyclic_edges {
        on_cycle[a] = true;
        on_cycle[b] = true;
    }
    let junctions = (0..g.n).filter(|&v| on_bridge[v] && on_cycle[v]).collect();
    Ok(BlockCutTree { two_edge_connected_components, bridge_components, bridges, junctions })
}

/// Ears as vertex paths. The first ear is a closed cycle (first vertex
/// repeated at the end) through `root`; each later ear is a path whose end
/// vertices are already covered. A later ear may be closed (both ends equal),
/// which happens when the graph is 2-edge- but not 2-vertex-connected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarDecomposition {
    pub root: usize,
    pub ears: Vec<Vec<usize>>,
}

impl EarDecomposition {
    pub fn ear_lengths(&self) -> Vec<usize> {
        self.ears.iter().map(|e| e.len().saturating_sub(1)).collect()
    }

    pub fn len(&self) -> usize {
        self.ears.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ears.is_empty()
    }
}

/// DFS ear decomposition (chain decomposition) rooted at `root`.
///
/// DFS children are visited in ascending vertex order. Tree edges point to
/// the root and back edges away from it; vertices are taken in DFS preorder,
/// and each back edge leaving the current vertex (descendant endpoints in
/// preorder) starts a chain that climbs tree edges until it meets an already
/// covered vertex. Back edges between two covered vertices give length-1 ears.
pub fn ear_decomposition(g: &SimpleGraph, root: usize) -> Result<EarDecomposition> {
    if root >= g.n {
        return Err(invalid(format!("root {root} out of range for n={}", g.n)));
    }
    let comps = g.components();
    if comps.len() > 1 {
        return Err(Error::NotTwoEdgeConnected(format!(
            "disconnected: vertices {} and {} lie in different components",
            comps[0][0], comps[1][0]
        )));
    }
    if g.edges.is_empty() {
        return Err(Error::NotTwoEdgeConnected("graph has no cycle".into()));
    }
    if let Some(&(a, b)) = find_bridges(g).first() {
        return Err(Error::NotTwoEdgeConnected(format!("bridge ({a}, {b})")));
    }

    const NONE: usize = usize::MAX;
    let n = g.n;
    let mut pre = vec![NONE; n];
    let mut parent = vec![NONE; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    pre[root] = 0;
    order.push(root);
    while let Some(top) = stack.last_mut() {
        let (v, idx) = *top;
        if idx < g.adj[v].len() {
            top.1 += 1;
            let u = g.adj[v][idx].0;
            if pre[u] == NONE {
                pre[u] = order.len();
                parent[u] = v;
                order.push(u);
                stack.push((u, 0));
            }
        } else {
            stack.pop();
        }
    }

    let mut covered = vec![false; n];
    covered[root] = true;
    let mut ears = Vec::with_capacity(g.edges.len() + 1 - n);
    for &w in &order {
        let mut descendants: Vec<usize> = g
            .neighbors(w)
            .filter(|&u| pre[u] > pre[w] && parent[u] != w)
            .collect();
        descendants.sort_by_key(|&u| pre[u]);
        for u in descendants {
            let mut path = vec![w];
            let mut x = u;
            loop {
                path.push(x);
                if covered[x] {
                    break;
                }
                covered[x] = true;
                x = parent[x];
            }
            ears.push(path);
        }
    }
    Ok(EarDecomposition { root, ears })
}

#[derive(Debug, Clone, PartialEq, Eq, ThisError, Serialize, Deserialize)]
pub enum EarViolation {
    #[error("no ears")]
    Empty,
    #[error("first ear not a cycle")]
    FirstEarNotCycle,
    #[error("root {0} is not on the first ear")]
    RootNotOnFirstEar(usize),
    #[error("ear {ear} is not a simple path")]
    EarNotSimple { ear: usize },
    #[error("ear {ear} endpoint {vertex} is not on an earlier ear")]
    EndpointNotAttached { ear: usize, vertex: usize },
    #[error("ear {ear} internal vertex {vertex} already lies on an earlier ear")]
    InternalVertexReused { ear: usize, vertex: usize },
    #[error("ear {ear} uses ({}, {}) which is not an edge", edge.0, edge.1)]
    EdgeNotInGraph { ear: usize, edge: Edge },
    #[error("ear {ear} repeats edge ({}, {})", edge.0, edge.1)]
    EdgeRepeated { ear: usize, edge: Edge },
    #[error("{missing} graph edges are not covered by any ear")]
    MissingEdges { missing: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarValidation {
    pub valid: bool,
    pub violation: Option<EarViolation>,
}

/// Checks the three defining conditions of an ear decomposition and reports
/// the first violation found (ear indices are 0-based).
pub fn validate_ears(g: &SimpleGraph, candidate: &EarDecomposition) -> EarValidation {
    match check_ears(g, candidate) {
        Ok(()) => EarValidation { valid: true, violation: None },
        Err(v) => EarValidation { valid: false, violation: Some(v) },
    }
}

fn check_ears(g: &SimpleGraph, cand: &EarDecomposition) -> std::result::Result<(), EarViolation> {
    let first = cand.ears.first().ok_or(EarViolation::Empty)?;
    let mut seen_vertex = vec![false; g.n];
    let mut used = BTreeSet::new();

    let cycle_ok = first.len() >= 4 && first[0] == first[first.len() - 1] && {
        let body = &first[..first.len() - 1];
        body.iter().collect::<BTreeSet<_>>().len() == body.len() && body.iter().all(|&v| v < g.n)
    };
    if !cycle_ok {
        return Err(EarViolation::FirstEarNotCycle);
    }
    if !first.contains(&cand.root) {
        return Err(EarViolation::RootNotOnFirstEar(cand.root));
    }
    let take_edges = |ear: usize, path: &[usize], used: &mut BTreeSet<Edge>| {
        for w in path.windows(2) {
            let e = norm_edge(w[0], w[1]);
            if w[0] >= g.n || w[1] >= g.n || !g.has_edge(w[0], w[1]) {
                return Err(EarViolation::EdgeNotInGraph { ear, edge: e });
            }
            if !used.insert(e) {
                return Err(EarViolation::EdgeRepeated { ear, edge: e });
            }
        }
        Ok(())
    };
    take_edges(0, first, &mut used)?;
    first.iter().for_each(|&v| seen_vertex[v] = true);

    for (idx, ear) in cand.ears.iter().enumerate().skip(1) {
        if ear.len() < 2 || ear.iter().any(|&v| v >= g.n) {
            return Err(EarViolation::EarNotSimple { ear: idx });
        }
        let (a, b) = (ear[0], ear[ear.len() - 1]);
        for v in [a, b] {
            if !seen_vertex[v] {
                return Err(EarViolation::EndpointNotAttached { ear: idx, vertex: v });
            }
        }
        let internal = &ear[1..ear.len() - 1];
        if let Some(&v) = internal.iter().find(|&&v| seen_vertex[v]) {
            return Err(EarViolation::InternalVertexReused { ear: idx, vertex: v });
        }
        let distinct: BTreeSet<_> = internal.iter().collect();
        if distinct.len() != internal.len() || (a == b && internal.len() < 2) {
            return Err(EarViolation::EarNotSimple { ear: idx });
        }
        take_edges(idx, ear, &mut used)?;
        internal.iter().for_each(|&v| seen_vertex[v] = true);
    }
    let missing = g.edge_count() - used.len();
    if missing > 0 {
        return Err(EarViolation::MissingEdges { missing });
    }
    Ok(())
}

/// Block-cut tree plus one ear decomposition per 2-edge-connected component,
/// all in the input graph's labels. Each component's decomposition is rooted
/// at its smallest junction vertex, or its smallest vertex if it has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDecomposition {
    pub block_cut_tree: BlockCutTree,
    pub component_ears: Vec<EarDecomposition>,
}

pub fn decompose(g: &SimpleGraph) -> Result<GraphDecomposition> {
    let tree = block_cut_tree(g)?;
    let junctions: BTreeSet<usize> = tree.junctions.iter().copied().collect();
    let mut component_ears = Vec::with_capacity(tree.two_edge_connected_components.len());
    for comp in &tree.two_edge_connected_components {
        let root = comp.vertices.iter().copied().find(|v| junctions.contains(v)).unwrap_or(comp.vertices[0]);
        let sub = SimpleGraph::relabeled(&comp.vertices, &comp.edges);
        let local_root = comp.vertices.binary_search(&root).expect("root in component");
        let local = ear_decomposition(&sub, local_root)?;
        component_ears.push(EarDecomposition {
            root,
            ears: local.ears.into_iter().map(|ear| ear.into_iter().map(|v| comp.vertices[v]).collect()).collect(),
        });
    }
    Ok(GraphDecomposition { block_cut_tree: tree, component_ears })
}

/// Statistics of the simple graph spanned by a closed walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkGraphStats {
    /// Walk length (edges traversed, including the closing step).
    pub k: usize,
    pub v: usize,
    pub e: usize,
    /// Excess `e - v + 1`.
    pub g: usize,
    /// Edges inside 2-edge-connected components.
    pub c: usize,
    /// Length-2 ears over all components.
    pub t: usize,
    /// Edges traversed exactly once.
    pub b: usize,
    /// Length-1 ears (chords) over all components.
    pub chords: usize,
    pub s_per_component: Vec<usize>,
    pub ear_lengths: Vec<Vec<usize>>,
    /// Traversal count per edge, keyed by the walk's own vertex labels.
    /// Serialized as a list of `[[a, b], count]` pairs.
    #[serde(with = "edge_counts")]
    pub multiplicities: BTreeMap<Edge, usize>,
}

mod edge_counts {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Edge;

    pub fn serialize<S: Serializer>(map: &BTreeMap<Edge, usize>, s: S) -> Result<S::Ok, S::Error> {
        map.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Edge, usize>, D::Error> {
        Ok(Vec::<(Edge, usize)>::deserialize(d)?.into_iter().collect())
    }
}

impl WalkGraphStats {
    pub fn is_tree(&self) -> bool {
        self.g == 0
    }
}

/// Simple graph spanned by a closed walk `(i_1, ..., i_k)` closed by the step
/// `i_k -> i_1`, relabeled to `0..v` in increasing label order, with edge
/// multiplicities in the original labels.
pub fn walk_graph(walk: &[usize]) -> Result<(SimpleGraph, Vec<usize>, BTreeMap<Edge, usize>)> {
    if walk.len() < 2 {
        return Err(Error::InvalidWalk(format!("walk needs at least two vertices, got {}", walk.len())));
    }
    let k = walk.len();
    let mut mult: BTreeMap<Edge, usize> = BTreeMap::new();
    for i in 0..k {
        let (a, b) = (walk[i], walk[(i + 1) % k]);
        if a == b {
            return Err(Error::InvalidWalk(format!(
                "repeated consecutive vertex {a} at position {}",
                (i + 1) % k
            )));
        }
        *mult.entry(norm_edge(a, b)).or_insert(0) += 1;
    }
    let mut labels: Vec<usize> = walk.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let g = SimpleGraph::relabeled(&labels, &mult.keys().copied().collect::<Vec<_>>());
    Ok((g, labels, mult))
}

pub fn walk_graph_stats(walk: &[usize]) -> Result<WalkGraphStats> {
    let (g, _labels, multiplicities) = walk_graph(walk)?;
    let dec = decompose(&g)?;
    let (v, e) = (g.n(), g.edge_count());
    let mut stats = WalkGraphStats {
        k: walk.len(),
        v,
        e,
        g: e + 1 - v,
        c: dec.block_cut_tree.two_edge_connected_components.iter().map(|c| c.edges.len()).sum(),
        t: 0,
        b: multiplicities.values().filter(|&&m| m == 1).count(),
        chords: 0,
        s_per_component: Vec::new(),
        ear_lengths: Vec::new(),
        multiplicities,
    };
    for ears in &dec.component_ears {
        let lengths = ears.ear_lengths();
        stats.t += lengths.iter().skip(1).filter(|&&l| l == 2).count();
        stats.chords += lengths.iter().filter(|&&l| l == 1).count();
        stats.s_per_component.push(lengths.len());
        stats.ear_lengths.push(lengths);
    }
    Ok(stats)
}

/// `2^t p^{v-1} (C tau)^{c-2g} (C sqrt(ln(1/p)))^{g-t}`, the bound on
/// `|E prod_e Q_e^{m(e)}|` for one walk graph. `C` is left to the caller.
pub fn contribution_bound(stats: &WalkGraphStats, p: f64, tau: f64, c_const: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) || !(tau > 0.0) || !(c_const > 0.0) {
        return Err(invalid("contribution_bound needs 0 < p < 1, tau > 0, C > 0"));
    }
    if stats.g < stats.t {
        return Err(Error::Domain(format!("excess g={} below length-2 ear count t={}", stats.g, stats.t)));
    }
    let (v, c, g, t) = (stats.v as i32, stats.c as i32, stats.g as i32, stats.t as i32);
    let log_term = c_const * (1.0 / p).ln().sqrt();
    Ok(2f64.powi(t) * p.powi(v - 1) * (c_const * tau).powi(c - 2 * g) * log_term.powi(g - t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> SimpleGraph {
        SimpleGraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn cycle(n: usize) -> SimpleGraph {
        graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    fn k4() -> SimpleGraph {
        graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn path_edges_are_bridges() {
        let p4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(find_bridges(&p4), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn cycle_has_no_bridges() {
        assert!(find_bridges(&cycle(5)).is_empty());
    }

    #[test]
    fn tree_block_cut_tree() {
        let t = graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]);
        let b = block_cut_tree(&t).unwrap();
        assert!(b.two_edge_connected_components.is_empty());
        assert_eq!(b.bridge_components.len(), 1);
        assert_eq!(b.bridge_components[0].edges.len(), 4);
        assert!(b.junctions.is_empty());
    }

    #[test]
    fn single_vertex_is_a_trivial_tree() {
        let b = block_cut_tree(&graph(1, &[])).unwrap();
        assert_eq!(b.bridge_components.len(), 1);
        assert!(b.two_edge_connected_components.is_empty());
    }

    #[test]
    fn cycle_block_cut_tree() {
        let b = block_cut_tree(&cycle(4)).unwrap();
        assert_eq!(b.two_edge_connected_components.len(), 1);
        assert!(b.bridges.is_empty());
        assert!(b.bridge_components.is_empty());
    }

    #[test]
    fn disconnected_input_names_two_components() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(block_cut_tree(&g), Err(Error::Disconnected { a: 0, b: 2 }));
        assert!(matches!(ear_decomposition(&g, 0), Err(Error::NotTwoEdgeConnected(_))));
    }

    #[test]
    fn cycle_is_one_ear() {
        let d = ear_decomposition(&cycle(5), 0).unwrap();
        assert_eq!(d.ears.len(), 1);
        assert_eq!(d.ears[0].len(), 6);
        assert_eq!(d.ears[0][0], 0);
        assert!(validate_ears(&cycle(5), &d).valid);
    }

    #[test]
    fn k4_has_three_ears_with_a_chord() {
        let d = ear_decomposition(&k4(), 0).unwrap();
        assert_eq!(d.ears.len(), 3);
        assert_eq!(d.ear_lengths().iter().sum::<usize>(), 6);
        assert!(d.ear_lengths().contains(&1));
        assert!(validate_ears(&k4(), &d).valid);
    }

    #[test]
    fn ear_decomposition_rejects_bridges() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        match ear_decomposition(&g, 0) {
            Err(Error::NotTwoEdgeConnected(msg)) => assert!(msg.contains("(2, 3)")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ear_decomposition(&graph(1, &[]), 0).is_err());
        assert!(ear_decomposition(&cycle(3), 3).is_err());
    }

    #[test]
    fn bowtie_gets_a_closed_ear() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]);
        let d = ear_decomposition(&g, 1).unwrap();
        assert_eq!(d.ears.len(), 2);
        assert_eq!(d.ears[1].first(), d.ears[1].last());
        assert!(validate_ears(&g, &d).valid);
    }

    #[test]
    fn wrong_order_is_reported() {
        let c4 = cycle(4);
        let bad = EarDecomposition { root: 0, ears: vec![vec![0, 1, 2], vec![2, 3, 0]] };
        let v = validate_ears(&c4, &bad);
        assert!(!v.valid);
        assert_eq!(v.violation, Some(EarViolation::FirstEarNotCycle));
        assert_eq!(EarViolation::FirstEarNotCycle.to_string(), "first ear not a cycle");
    }

    #[test]
    fn validation_catches_each_condition() {
        let g = k4();
        let base = |ears: Vec<Vec<usize>>| EarDecomposition { root: 0, ears };
        let cyc = vec![0, 1, 2, 0];
        let v = validate_ears(&g, &base(vec![cyc.clone(), vec![0, 3, 1]]));
        assert_eq!(v.violation, Some(EarViolation::MissingEdges { missing: 1 }));
        let v = validate_ears(&g, &base(vec![cyc.clone(), vec![0, 1]]));
        assert_eq!(v.violation, Some(EarViolation::EdgeRepeated { ear: 1, edge: (0, 1) }));
        let v = validate_ears(&g, &base(vec![cyc.clone(), vec![3, 1]]));
        assert_eq!(v.violation, Some(EarViolation::EndpointNotAttached { ear: 1, vertex: 3 }));
        let v = validate_ears(&g, &base(vec![cyc.clone(), vec![0, 3, 1], vec![2, 3]]));
        assert!(v.valid);
        let v = validate_ears(&g, &base(vec![cyc.clone(), vec![0, 3, 1], vec![2, 3, 0]]));
        assert!(matches!(v.violation, Some(EarViolation::InternalVertexReused { .. })));
        let v = validate_ears(&g, &EarDecomposition { root: 3, ears: vec![cyc] });
        assert_eq!(v.violation, Some(EarViolation::RootNotOnFirstEar(3)));
        assert_eq!(validate_ears(&g, &base(vec![])).violation, Some(EarViolation::Empty));
    }

    #[test]
    fn double_edge_walk_stats() {
        let s = walk_graph_stats(&[1, 2]).unwrap();
        assert_eq!((s.v, s.e, s.g, s.c, s.t, s.b), (2, 1, 0, 0, 0, 0));
        assert_eq!(s.multiplicities[&(1, 2)], 2);
    }

    #[test]
    fn triangle_walk_stats() {
        let s = walk_graph_stats(&[1, 2, 3]).unwrap();
        assert_eq!((s.v, s.e, s.g, s.c, s.t, s.b), (3, 3, 1, 3, 0, 3));
        assert_eq!(s.s_per_component, vec![1]);
    }

    #[test]
    fn stats_round_trip_through_json() {
        let s = walk_graph_stats(&[0, 1, 2, 1]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("[[0,1],2]"), "{text}");
        assert_eq!(serde_json::from_str::<WalkGraphStats>(&text).unwrap(), s);
    }

    #[test]
    fn invalid_walks() {
        assert!(matches!(walk_graph_stats(&[1, 1, 2]), Err(Error::InvalidWalk(_))));
        assert!(matches!(walk_graph_stats(&[1, 2, 1]), Err(Error::InvalidWalk(_))));
        assert!(matches!(walk_graph_stats(&[4]), Err(Error::InvalidWalk(_))));
    }

    #[test]
    fn contribution_bound_values() {
        let tree = walk_graph_stats(&[0, 1, 0, 2]).unwrap();
        let b = contribution_bound(&tree, 0.01, 0.1, 1.0).unwrap();
        assert!((b - 0.01f64.powi(2)).abs() < 1e-18);
        let tri = walk_graph_stats(&[0, 1, 2]).unwrap();
        let b = contribution_bound(&tri, 0.01, 0.1, 1.0).unwrap();
        let want = 1e-4 * 0.1 * 100f64.ln().sqrt();
        assert!((b - want).abs() < 1e-18);
        assert!((b - 2.146e-5).abs() < 1e-8);
        let half = contribution_bound(&tri, 0.01, 0.05, 1.0).unwrap();
        assert!((half * 2.0 - b).abs() < 1e-18);
        assert!(contribution_bound(&tri, 1.0, 0.1, 1.0).is_err());
        let mut odd = tri.clone();
        odd.t = 2;
        assert!(matches!(contribution_bound(&odd, 0.1, 0.1, 1.0), Err(Error::Domain(_))));
    }
}
