//! Directed acyclic graphs and the topology queries the identification
//! theory depends on: in-neighborhoods, sources and sinks, ancestor sets,
//! topological order, and longest-path depth (which bounds the largest input
//! delay visible at a measured node).
//!
//! Graphs are immutable after construction and validated up front: no
//! self-loops, no duplicate edges, no cycles.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Dense node identifier, `0..node_count`. External files map string labels
/// onto these on load; the dense range gives canonical variable ordering.
pub type NodeId = usize;

/// Directed edge `(from, to)`.
pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node id {0} out of range")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Edge),
    #[error("graph must have at least one node")]
    Empty,
    #[error("graph contains a cycle: {}", format_cycle(.0))]
    Cycle(Vec<NodeId>),
}

fn format_cycle(cycle: &[NodeId]) -> String {
    let mut s = cycle
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" -> ");
    if let Some(first) = cycle.first() {
        s.push_str(&format!(" -> {first}"));
    }
    s
}

/// Immutable DAG over dense node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: BTreeSet<Edge>,
    in_adj: Vec<Vec<NodeId>>,
    out_adj: Vec<Vec<NodeId>>,
    topo: Vec<NodeId>,
}

impl Graph {
    /// Validates and builds. Rejects self-loops, duplicates, out-of-range
    /// ids, and cycles (the error carries one offending cycle).
    pub fn new(node_count: usize, edge_list: &[Edge]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut edges = BTreeSet::new();
        let mut in_adj = vec![Vec::new(); node_count];
        let mut out_adj = vec![Vec::new(); node_count];
        for &(from, to) in edge_list {
            if from >= node_count {
                return Err(GraphError::UnknownNode(from));
            }
            if to >= node_count {
                return Err(GraphError::UnknownNode(to));
            }
            if from == to {
                return Err(GraphError::SelfLoop(from));
            }
            if !edges.insert((from, to)) {
                return Err(GraphError::DuplicateEdge((from, to)));
            }
            in_adj[to].push(from);
            out_adj[from].push(to);
        }
        for adj in in_adj.iter_mut().chain(out_adj.iter_mut()) {
            adj.sort_unstable();
        }
        let topo = toposort(node_count, &out_adj, &in_adj)?;
        Ok(Graph {
            node_count,
            edges,
            in_adj,
            out_adj,
            topo,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.node_count
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    fn check_node(&self, i: NodeId) -> Result<(), GraphError> {
        if i < self.node_count {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(i))
        }
    }

    /// Nodes with an edge into `i`, ascending.
    pub fn in_neighbors(&self, i: NodeId) -> Result<&[NodeId], GraphError> {
        self.check_node(i)?;
        Ok(&self.in_adj[i])
    }

    pub fn out_neighbors(&self, i: NodeId) -> Result<&[NodeId], GraphError> {
        self.check_node(i)?;
        Ok(&self.out_adj[i])
    }

    /// Nodes with no incoming edges. Measuring these never helps: their
    /// output is just their own delayed excitation.
    pub fn sources(&self) -> BTreeSet<NodeId> {
        self.nodes().filter(|&i| self.in_adj[i].is_empty()).collect()
    }

    /// Nodes with no outgoing edges. Their incoming edges are visible
    /// nowhere else, so every sink must be measured.
    pub fn sinks(&self) -> BTreeSet<NodeId> {
        self.nodes().filter(|&i| self.out_adj[i].is_empty()).collect()
    }

    /// All nodes with a directed path to `i`, excluding `i` itself.
    pub fn ancestors(&self, i: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        self.check_node(i)?;
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = self.in_adj[i].iter().copied().collect();
        while let Some(j) = queue.pop_front() {
            if seen.insert(j) {
                queue.extend(self.in_adj[j].iter().copied());
            }
        }
        Ok(seen)
    }

    /// Topological order, lowest node id first among ready nodes, so the
    /// order is canonical for a given graph.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Length of the longest directed path terminating at `i`. The deepest
    /// input delay visible in the response of `i` is this plus one.
    pub fn max_depth_to(&self, i: NodeId) -> Result<usize, GraphError> {
        self.check_node(i)?;
        let mut depth = vec![0usize; self.node_count];
        for &v in &self.topo {
            for &w in &self.out_adj[v] {
                depth[w] = depth[w].max(depth[v] + 1);
            }
            if v == i {
                return Ok(depth[i]);
            }
        }
        unreachable!("topological order covers all nodes");
    }

    /// Longest path in the whole graph.
    pub fn max_depth(&self) -> usize {
        self.sinks()
            .iter()
            .map(|&s| self.max_depth_to(s).expect("sink id valid"))
            .max()
            .unwrap_or(0)
    }

    /// Single directed chain covering every node.
    pub fn is_path(&self) -> bool {
        if self.edges.len() + 1 != self.node_count {
            return false;
        }
        self.nodes()
            .all(|i| self.in_adj[i].len() <= 1 && self.out_adj[i].len() <= 1)
            && self.is_forest()
    }

    /// The underlying undirected graph has no cycle. Distinct in-branches of
    /// any node then have disjoint ancestries, which is what branch-isolating
    /// identification relies on.
    pub fn is_forest(&self) -> bool {
        // union-find over undirected edges
        let mut parent: Vec<usize> = (0..self.node_count).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut i = i;
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for &(a, b) in &self.edges {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// True when no other in-neighbor of `i` shares ancestry (including
    /// itself) with `j`: zeroing everything outside `j`'s branch then
    /// silences every other branch feeding `i`.
    pub fn branch_separable(&self, i: NodeId, j: NodeId) -> Result<bool, GraphError> {
        self.check_node(i)?;
        let mut branch = self.ancestors(j)?;
        branch.insert(j);
        for &other in &self.in_adj[i] {
            if other == j {
                continue;
            }
            if branch.contains(&other) {
                return Ok(false);
            }
            let mut other_branch = self.ancestors(other)?;
            other_branch.insert(other);
            if !branch.is_disjoint(&other_branch) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Distance (edge count) from each node to the nearest node of `targets`,
    /// following edges forward. `None` where no target is reachable.
    pub fn distance_to_any(&self, targets: &BTreeSet<NodeId>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count];
        let mut queue = VecDeque::new();
        for &t in targets {
            if t < self.node_count && dist[t].is_none() {
                dist[t] = Some(0);
                queue.push_back(t);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued nodes have distances") + 1;
            for &u in &self.in_adj[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d);
                    queue.push_back(u);
                }
            }
        }
        dist
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph({} nodes", self.node_count)?;
        for (a, b) in &self.edges {
            write!(f, ", {a}->{b}")?;
        }
        write!(f, ")")
    }
}

fn toposort(
    n: usize,
    out_adj: &[Vec<NodeId>],
    in_adj: &[Vec<NodeId>],
) -> Result<Vec<NodeId>, GraphError> {
    let mut indeg: Vec<usize> = in_adj.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<NodeId> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&v) = ready.iter().next() {
        ready.remove(&v);
        order.push(v);
        for &w in &out_adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    Err(GraphError::Cycle(find_cycle(n, out_adj, &indeg)))
}

/// Walks forward inside the unresolved subgraph until a node repeats.
fn find_cycle(n: usize, out_adj: &[Vec<NodeId>], indeg: &[usize]) -> Vec<NodeId> {
    let start = (0..n).find(|&i| indeg[i] > 0).expect("cycle exists");
    let mut path = vec![start];
    let mut seen_at = vec![usize::MAX; n];
    seen_at[start] = 0;
    loop {
        let v = *path.last().expect("path non-empty");
        let next = out_adj[v]
            .iter()
            .copied()
            .find(|&w| indeg[w] > 0)
            .expect("unresolved node has unresolved successor");
        if seen_at[next] != usize::MAX {
            return path.split_off(seen_at[next]);
        }
        seen_at[next] = path.len();
        path.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 3 nodes: 0->1, 1->2, 0->2 (two paths from 0 into the sink).
    pub(crate) fn fork_graph() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// 4 nodes: 0->1->3 and 0->2->3 (two disjoint length-2 routes).
    pub(crate) fn bridge_graph() -> Graph {
        Graph::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn path_graph(n: usize) -> Graph {
        let edges: Vec<Edge> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn in_neighbors_examples() {
        let g = fork_graph();
        assert_eq!(g.in_neighbors(2).unwrap(), &[0, 1]);
        let lone = Graph::new(1, &[]).unwrap();
        assert!(lone.in_neighbors(0).unwrap().is_empty());
        let b = bridge_graph();
        assert_eq!(b.in_neighbors(3).unwrap(), &[1, 2]);
        assert_eq!(g.in_neighbors(9), Err(GraphError::UnknownNode(9)));
    }

    #[test]
    fn sources_and_sinks_examples() {
        let p = path_graph(3);
        assert_eq!(p.sources(), BTreeSet::from([0]));
        assert_eq!(p.sinks(), BTreeSet::from([2]));

        let b = bridge_graph();
        assert_eq!(b.sources(), BTreeSet::from([0]));
        assert_eq!(b.sinks(), BTreeSet::from([3]));

        let bip = Graph::new(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(bip.sources(), BTreeSet::from([0, 1]));
        assert_eq!(bip.sinks(), BTreeSet::from([2, 3]));
    }

    #[test]
    fn ancestors_examples() {
        let g = fork_graph();
        assert_eq!(g.ancestors(2).unwrap(), BTreeSet::from([0, 1]));
        assert_eq!(g.ancestors(0).unwrap(), BTreeSet::new());
        let p = path_graph(4);
        assert_eq!(p.ancestors(3).unwrap(), BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn topological_order_respects_edges() {
        let b = bridge_graph();
        let order = b.topological_order();
        assert_eq!(order.len(), 4);
        let pos = |x: NodeId| order.iter().position(|&v| v == x).unwrap();
        for &(a, c) in b.edges() {
            assert!(pos(a) < pos(c));
        }
    }

    #[test]
    fn cycle_is_reported_with_witness() {
        let err = Graph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap_err();
        match err {
            GraphError::Cycle(cycle) => {
                assert_eq!(cycle.len(), 3);
                // consecutive entries are edges, and it closes up
                for w in cycle.windows(2) {
                    assert!([(0, 1), (1, 2), (2, 0)].contains(&(w[0], w[1])));
                }
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_edges() {
        assert_eq!(
            Graph::new(2, &[(0, 0)]).unwrap_err(),
            GraphError::SelfLoop(0)
        );
        assert_eq!(
            Graph::new(2, &[(0, 1), (0, 1)]).unwrap_err(),
            GraphError::DuplicateEdge((0, 1))
        );
        assert_eq!(
            Graph::new(2, &[(0, 5)]).unwrap_err(),
            GraphError::UnknownNode(5)
        );
    }

    #[test]
    fn max_depth_examples() {
        let g = fork_graph();
        assert_eq!(g.max_depth_to(2).unwrap(), 2);
        assert_eq!(g.max_depth_to(0).unwrap(), 0);
        let p = path_graph(5);
        assert_eq!(p.max_depth_to(4).unwrap(), 4);
        assert_eq!(p.max_depth(), 4);
    }

    #[test]
    fn shape_predicates() {
        assert!(path_graph(4).is_path());
        assert!(path_graph(4).is_forest());
        let b = bridge_graph();
        assert!(!b.is_path());
        assert!(!b.is_forest());
        let star = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!star.is_path());
        assert!(star.is_forest());
        assert!(Graph::new(1, &[]).unwrap().is_path());
    }

    #[test]
    fn branch_separability() {
        // tree: both branches into 3... build star-in: 1->0? use 4 nodes:
        // 1->3, 2->3 with 0->1: branches of 3 via 1 {0,1} and via 2 {2}.
        let t = Graph::new(4, &[(0, 1), (1, 3), (2, 3)]).unwrap();
        assert!(t.branch_separable(3, 1).unwrap());
        assert!(t.branch_separable(3, 2).unwrap());
        // bridge: branches via 1 and 2 share ancestor 0
        let b = bridge_graph();
        assert!(!b.branch_separable(3, 1).unwrap());
        // fork: in-neighbor 0 of node 2 is itself an ancestor of in-neighbor 1
        let f = fork_graph();
        assert!(!f.branch_separable(2, 1).unwrap());
        assert!(!f.branch_separable(2, 0).unwrap());
    }

    #[test]
    fn distance_to_any_walks_backwards() {
        let b = bridge_graph();
        let d = b.distance_to_any(&BTreeSet::from([3]));
        assert_eq!(d, vec![Some(2), Some(1), Some(1), Some(0)]);
    }

    #[test]
    fn every_node_reaches_some_sink() {
        for (n, edges) in [
            (3usize, vec![(0, 1), (1, 2), (0, 2)]),
            (4, vec![(0, 1), (0, 2), (1, 3), (2, 3)]),
            (5, vec![(0, 1), (1, 2), (3, 2), (3, 4)]),
        ] {
            let g = Graph::new(n, &edges).unwrap();
            let sinks = g.sinks();
            assert!(!sinks.is_empty());
            let dist = g.distance_to_any(&sinks);
            assert!(dist.iter().all(Option::is_some));
        }
    }
}
