use std::collections::{BTreeMap, VecDeque};

use super::matrix::ScheduleMatrix;

/// A column at which two or more rows are awake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meeting {
    pub t: usize,
    pub nodes: Vec<usize>,
}

/// Whether a column with `awake` rows forms edges.
///
/// In exclusive mode only columns with exactly two awake rows do.
pub fn forms_edges(awake: usize, exclusive: bool) -> bool {
    if exclusive {
        awake == 2
    } else {
        awake >= 2
    }
}

/// Edge-forming columns of one copy of `m`, in increasing `t`.
pub fn detect_meetings(m: &ScheduleMatrix, exclusive: bool) -> Vec<Meeting> {
    detect_meetings_repeated(m, 1, exclusive)
}

/// Edge-forming columns over `copies` repetitions of `m`.
pub fn detect_meetings_repeated(m: &ScheduleMatrix, copies: usize, exclusive: bool) -> Vec<Meeting> {
    let mut out = Vec::new();
    m.scan_columns(copies, |t, awake| {
        if forms_edges(awake.len(), exclusive) {
            out.push(Meeting { t, nodes: awake.to_vec() });
        }
    });
    out
}

/// Undirected meeting graph with the earliest witnessing column per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    n: usize,
    witness: BTreeMap<(usize, usize), usize>,
    adj: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, witness: BTreeMap::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds `{u, v}` witnessed at `t`, keeping the earliest witness.
    pub fn add_edge(&mut self, u: usize, v: usize, t: usize) {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n && v < self.n, "node out of range");
        let key = (u.min(v), u.max(v));
        match self.witness.get_mut(&key) {
            Some(w) => *w = (*w).min(t),
            None => {
                self.witness.insert(key, t);
                insert_sorted(&mut self.adj[u], v);
                insert_sorted(&mut self.adj[v], u);
            }
        }
    }

    pub fn from_meetings(n: usize, meetings: &[Meeting]) -> Self {
        let mut g = Self::empty(n);
        for m in meetings {
            for (a, &u) in m.nodes.iter().enumerate() {
                for &v in &m.nodes[a + 1..] {
                    g.add_edge(u, v, m.t);
                }
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.witness.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.witness.contains_key(&(u.min(v), u.max(v)))
    }

    pub fn witness(&self, u: usize, v: usize) -> Option<usize> {
        self.witness.get(&(u.min(v), u.max(v))).copied()
    }

    /// Edges `(u, v, t)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.witness.iter().map(|(&(u, v), &t)| (u, v, t))
    }

    /// Sorted neighbours of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    /// Edge union; witnesses are those of `self`, else of `other`.
    pub fn union(&self, other: &CommGraph) -> CommGraph {
        assert_eq!(self.n, other.n, "graphs on different node sets");
        let mut g = self.clone();
        for (u, v, t) in other.edges() {
            if !g.has_edge(u, v) {
                g.add_edge(u, v, t);
            }
        }
        g
    }

    /// Re-checks every witness column against `m` repeated `copies` times.
    ///
    /// Returns the first edge whose witness no longer forms it.
    pub fn verify_witnesses(
        &self,
        m: &ScheduleMatrix,
        copies: usize,
        exclusive: bool,
    ) -> Result<(), (usize, usize)> {
        for (u, v, t) in self.edges() {
            let awake = m.awake_set(t, copies);
            let ok = awake.contains(&u) && awake.contains(&v) && forms_edges(awake.len(), exclusive);
            if !ok {
                return Err((u, v));
            }
        }
        Ok(())
    }
}

fn insert_sorted(list: &mut Vec<usize>, x: usize) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}

/// The meeting graph of one copy of `m`.
pub fn build_comm_graph(m: &ScheduleMatrix, exclusive: bool) -> CommGraph {
    build_comm_graph_repeated(m, 1, exclusive)
}

/// The meeting graph of `copies` repetitions of `m`.
pub fn build_comm_graph_repeated(m: &ScheduleMatrix, copies: usize, exclusive: bool) -> CommGraph {
    let mut g = CommGraph::empty(m.n());
    m.scan_columns(copies, |t, awake| {
        if forms_edges(awake.len(), exclusive) {
            for (a, &u) in awake.iter().enumerate() {
                for &v in &awake[a + 1..] {
                    g.add_edge(u, v, t);
                }
            }
        }
    });
    g
}

/// BFS parents and depths from `root`; unreachable nodes get `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<Option<usize>>,
}

impl BfsTree {
    /// Number of nodes reached, the root included.
    pub fn size(&self) -> usize {
        self.depth.iter().filter(|d| d.is_some()).count()
    }

    pub fn height(&self) -> usize {
        self.depth.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn bfs_tree(g: &CommGraph, root: usize) -> BfsTree {
    let mut parent = vec![None; g.n()];
    let mut depth = vec![None; g.n()];
    depth[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = depth[u].expect("queued nodes have depths");
        for &v in g.neighbors(u) {
            if depth[v].is_none() {
                depth[v] = Some(du + 1);
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    BfsTree { root, parent, depth }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphStats {
    pub min_degree: usize,
    pub connected: bool,
    /// `None` when the graph is disconnected.
    pub diameter: Option<usize>,
    pub edges: usize,
    pub spanning_tree: BfsTree,
}

/// Exact statistics by BFS from every node.
pub fn graph_stats(g: &CommGraph, root: usize) -> GraphStats {
    let spanning_tree = bfs_tree(g, root);
    let connected = spanning_tree.size() == g.n();
    let diameter = connected.then(|| (0..g.n()).map(|u| bfs_tree(g, u).height()).max().unwrap_or(0));
    GraphStats {
        min_degree: (0..g.n()).map(|u| g.degree(u)).min().unwrap_or(0),
        connected,
        diameter,
        edges: g.edge_count(),
        spanning_tree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstrings::{pack_non_overlapping, BitSchedule};
    use crate::randsched::matrix::{concat_in_time, gen_matrix, gen_offsets, OffsetPattern};
    use crate::seed::rng_for;
    use proptest::prelude::*;

    fn matrix(width: usize, rows: &[&[usize]], offsets: Vec<usize>, bound: usize) -> ScheduleMatrix {
        let rows = rows.iter().map(|r| BitSchedule::new(width, r.to_vec()).unwrap()).collect();
        ScheduleMatrix::new(rows).unwrap().with_offsets(offsets, bound).unwrap()
    }

    fn edge_set(g: &CommGraph) -> Vec<(usize, usize)> {
        g.edges().map(|(u, v, _)| (u, v)).collect()
    }

    #[test]
    fn single_meeting() {
        let m = matrix(10, &[&[5], &[3]], vec![0, 2], 2);
        assert_eq!(detect_meetings(&m, false), vec![Meeting { t: 5, nodes: vec![0, 1] }]);
        let g = build_comm_graph(&m, true);
        assert_eq!(g.witness(0, 1), Some(5));
    }

    #[test]
    fn triple_column_modes() {
        let m = matrix(4, &[&[1], &[1], &[1]], vec![0; 3], 0);
        assert_eq!(build_comm_graph(&m, true).edge_count(), 0);
        let g = build_comm_graph(&m, false);
        assert_eq!(edge_set(&g), vec![(0, 1), (0, 2), (1, 2)]);
        assert!(g.edges().all(|(_, _, t)| t == 1));
    }

    #[test]
    fn packed_rows_have_no_edges() {
        let mut rng = rng_for(6, &[]);
        let strings: Vec<_> = (0..16).map(|_| crate::bitstrings::random_schedule(1024, 4, &mut rng).unwrap()).collect();
        let shifts = pack_non_overlapping(&strings, 256).unwrap();
        let rows = strings.iter().map(|s| BitSchedule::new(1024, s.ones().to_vec()).unwrap()).collect();
        let m = ScheduleMatrix::new(rows).unwrap().with_offsets(shifts.shifts().to_vec(), 256).unwrap();
        assert_eq!(build_comm_graph(&m, false).edge_count(), 0);
    }

    #[test]
    fn stats_examples() {
        let mut complete = CommGraph::empty(5);
        for u in 0..5 {
            for v in u + 1..5 {
                complete.add_edge(u, v, 0);
            }
        }
        let s = graph_stats(&complete, 0);
        assert_eq!((s.min_degree, s.connected, s.diameter), (4, true, Some(1)));
        let s = graph_stats(&CommGraph::empty(3), 0);
        assert_eq!((s.connected, s.diameter), (false, None));
        let mut path = CommGraph::empty(4);
        for u in 0..3 {
            path.add_edge(u, u + 1, u);
        }
        let s = graph_stats(&path, 0);
        assert_eq!(s.diameter, Some(3));
        assert_eq!(s.spanning_tree.parent, vec![None, Some(0), Some(1), Some(2)]);
        assert_eq!(graph_stats(&CommGraph::empty(1), 0).diameter, Some(0));
    }

    #[test]
    fn earliest_witness_kept() {
        let mut g = CommGraph::empty(2);
        g.add_edge(1, 0, 9);
        g.add_edge(0, 1, 4);
        g.add_edge(0, 1, 7);
        assert_eq!(g.witness(0, 1), Some(4));
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn concatenation_unions_block_edges_without_offsets() {
        let mut rng = rng_for(12, &[]);
        let blocks: Vec<_> = (0..4).map(|_| gen_matrix(6, 64, 0.5, 1.0, &mut rng)).collect();
        let whole = build_comm_graph(&concat_in_time(&blocks).unwrap(), false);
        let union = blocks
            .iter()
            .map(|b| build_comm_graph(b, false))
            .reduce(|a, b| a.union(&b))
            .unwrap();
        assert_eq!(edge_set(&whole), edge_set(&union));
    }

    proptest! {
        #[test]
        fn graph_invariants(seed in any::<u64>(), n in 2usize..10, d in 0usize..64) {
            let mut rng = rng_for(seed, &[]);
            let m = gen_matrix(n, 128, 0.5, 1.5, &mut rng);
            let m = m.with_offsets(gen_offsets(n, d, OffsetPattern::Uniform, &mut rng), d).unwrap();
            let exclusive = build_comm_graph(&m, true);
            let shared = build_comm_graph(&m, false);
            prop_assert!(exclusive.verify_witnesses(&m, 1, true).is_ok());
            prop_assert!(shared.verify_witnesses(&m, 1, false).is_ok());
            prop_assert!(exclusive.edges().all(|(u, v, _)| shared.has_edge(u, v)));
            prop_assert_eq!(&build_comm_graph(&m, false), &shared);
            let naive = CommGraph::from_meetings(n, &detect_meetings(&m, false));
            prop_assert_eq!(naive, shared);
        }

        #[test]
        fn concatenation_keeps_block_edges(seed in any::<u64>(), n in 2usize..8, d in 0usize..32) {
            // With offsets, columns can straddle block boundaries, so the
            // non-exclusive graph of the whole may gain edges but never loses one.
            let mut rng = rng_for(seed, &[]);
            let offsets = gen_offsets(n, d, OffsetPattern::Uniform, &mut rng);
            let blocks: Vec<_> = (0..3)
                .map(|_| gen_matrix(n, 48, 0.5, 1.5, &mut rng).with_offsets(offsets.clone(), d).unwrap())
                .collect();
            let whole = build_comm_graph(&concat_in_time(&blocks).unwrap(), false);
            for b in &blocks {
                let g = build_comm_graph(b, false);
                prop_assert!(g.edges().all(|(u, v, _)| whole.has_edge(u, v)));
            }
        }
    }
}
