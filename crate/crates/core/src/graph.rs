//! Simple undirected graphs, node partitions and nested partition chains.
//!
//! Node and community ids are dense `0..n` indices. Edges are stored as
//! canonical `(min, max)` pairs in construction order, so iteration is
//! deterministic for a given build sequence.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A simple undirected graph (no self-loops, no parallel edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph from an edge list, silently collapsing repeated pairs.
    ///
    /// Self-loops and out-of-range ids are rejected.
    pub fn build(node_count: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        Self::assemble(node_count, edge_list, true)
    }

    /// Builds a graph from an edge list that must already be simple.
    ///
    /// Unlike [`Graph::build`], a repeated pair is an error. Generators use
    /// this so wiring bugs surface instead of being merged away.
    pub fn from_simple_edges(node_count: usize, edge_list: &[(usize, usize)]) -> Result<Self> {
        Self::assemble(node_count, edge_list, false)
    }

    fn assemble(node_count: usize, edge_list: &[(usize, usize)], dedup: bool) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Validation("graph must have at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            let e = canonical(u, v);
            if seen.insert(e) {
                edges.push(e);
            } else if !dedup {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
        }

        let mut degree = vec![0usize; node_count];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut neighbors = vec![0usize; offsets[node_count]];
        for &(u, v) in &edges {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        Ok(Self {
            node_count,
            edges,
            offsets,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` edges in construction order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count).map(|v| self.degree(v)).collect()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && v < self.node_count && self.neighbors(u).contains(&v)
    }

    /// Re-checks the simple-graph and degree invariants from scratch.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.edges.len());
        let mut degree = vec![0usize; self.node_count];
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            if u > v {
                return Err(Error::Validation(format!("edge ({u}, {v}) is not canonical")));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        for (v, &d) in degree.iter().enumerate() {
            if d != self.degree(v) {
                return Err(Error::Validation(format!(
                    "node {v}: adjacency degree {} disagrees with edge count {d}",
                    self.degree(v)
                )));
            }
        }
        if degree.iter().sum::<usize>() != 2 * self.edges.len() {
            return Err(Error::Validation("degree sum is not twice the edge count".into()));
        }
        Ok(())
    }
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::default(); dim * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("matrix rows must all have length equal to the row count".into()));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, s: usize) -> T {
        self.data[r * self.dim + s]
    }

    pub fn set(&mut self, r: usize, s: usize, value: T) {
        self.data[r * self.dim + s] = value;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }
}

/// Assignment of every node to exactly one community, with dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Wraps a dense assignment. Every id in `0..max+1` must be used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Validation("partition must cover at least one node".into()));
        }
        let count = assignment.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; count];
        for &c in &assignment {
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Validation(format!(
                "community ids must be dense; id {empty} is unused"
            )));
        }
        Ok(Self { assignment, sizes })
    }

    /// Builds a partition from arbitrary labels, renumbered in first-seen order.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self::new(assignment)
    }

    /// Every node in its own community.
    pub fn singletons(node_count: usize) -> Self {
        Self {
            assignment: (0..node_count).collect(),
            sizes: vec![1; node_count],
        }
    }

    /// All nodes in one community.
    pub fn whole(node_count: usize) -> Self {
        Self {
            assignment: vec![0; node_count],
            sizes: vec![node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn community_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Member lists per community, each sorted ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> =
            self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &c) in self.assignment.iter().enumerate() {
            members[c].push(v);
        }
        members
    }

    /// Total degree `K_r` of each community in `g`.
    pub fn community_degrees(&self, g: &Graph) -> Result<Vec<usize>> {
        self.check_universe(g)?;
        let mut k = vec![0usize; self.community_count()];
        for v in 0..g.node_count() {
            k[self.assignment[v]] += g.degree(v);
        }
        Ok(k)
    }

    pub(crate) fn check_universe(&self, g: &Graph) -> Result<()> {
        if self.node_count() != g.node_count() {
            return Err(Error::Validation(format!(
                "partition covers {} nodes but the graph has {}",
                self.node_count(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Counts edges inside each community (diagonal) and between each pair.
///
/// The matrix is symmetric; the diagonal plus the upper triangle sum to `m`.
pub fn inter_community_edge_counts(g: &Graph, p: &Partition) -> Result<SquareMatrix<u64>> {
    p.check_universe(g)?;
    let mut counts = SquareMatrix::zeros(p.community_count());
    for &(u, v) in g.edges() {
        let (r, s) = (p.community_of(u), p.community_of(v));
        counts.set(r, s, counts.get(r, s) + 1);
        if r != s {
            counts.set(s, r, counts.get(s, r) + 1);
        }
    }
    Ok(counts)
}

/// Merges the communities of `fine` according to `grouping[community] = group`.
///
/// Group ids are renumbered densely in ascending order of the given ids.
pub fn coarsen(fine: &Partition, grouping: &[usize]) -> Result<Partition> {
    if grouping.len() < fine.community_count() {
        return Err(Error::Validation(format!(
            "grouping covers {} communities but the partition has {}",
            grouping.len(),
            fine.community_count()
        )));
    }
    let grouping = &grouping[..fine.community_count()];
    let mut ids: Vec<usize> = grouping.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let dense: Vec<usize> = grouping
        .iter()
        .map(|g| ids.binary_search(g).unwrap())
        .collect();
    let assignment = fine.assignment.iter().map(|&c| dense[c]).collect();
    Partition::new(assignment)
}

/// Nested chain of partitions from the ground truth up to one community.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    levels: Vec<Partition>,
    parents: Vec<Vec<usize>>,
}

impl Hierarchy {
    /// Builds a hierarchy from a base partition and per-level parent maps.
    ///
    /// `parent_maps[i][r]` is the community at level `i + 1` containing
    /// community `r` of level `i`.
    pub fn from_parent_maps(base: Partition, parent_maps: Vec<Vec<usize>>) -> Result<Self> {
        let mut levels = vec![base];
        for (i, map) in parent_maps.iter().enumerate() {
            let prev = &levels[i];
            if map.len() != prev.community_count() {
                return Err(Error::Validation(format!(
                    "parent map for level {} has {} entries, expected {}",
                    i + 1,
                    map.len(),
                    prev.community_count()
                )));
            }
            let assignment = prev.assignment().iter().map(|&c| map[c]).collect();
            levels.push(Partition::new(assignment)?);
        }
        let h = Self {
            levels,
            parents: parent_maps,
        };
        h.check_invariants()?;
        Ok(h)
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Partition {
        &self.levels[i]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn ground_truth(&self) -> &Partition {
        &self.levels[0]
    }

    pub fn parent_maps(&self) -> &[Vec<usize>] {
        &self.parents
    }

    /// Strict coarsening chain ending in a single community.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, pair) in self.levels.windows(2).enumerate() {
            let (fine, coarse) = (&pair[0], &pair[1]);
            if fine.node_count() != coarse.node_count() {
                return Err(Error::Validation(format!("level {} changes the node universe", i + 1)));
            }
            if coarse.community_count() >= fine.community_count() {
                return Err(Error::Validation(format!(
                    "level {} has {} communities, not fewer than the {} of level {i}",
                    i + 1,
                    coarse.community_count(),
                    fine.community_count()
                )));
            }
            let mut parent = vec![usize::MAX; fine.community_count()];
            for v in 0..fine.node_count() {
                let (c, p) = (fine.community_of(v), coarse.community_of(v));
                if parent[c] == usize::MAX {
                    parent[c] = p;
                } else if parent[c] != p {
                    return Err(Error::Validation(format!(
                        "community {c} of level {i} is split across level {}",
                        i + 1
                    )));
                }
            }
        }
        match self.levels.last() {
            Some(top) if top.community_count() == 1 => Ok(()),
            _ => Err(Error::Validation("top hierarchy level must be a single community".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangles_with_bridge() -> Graph {
        Graph::build(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap()
    }

    #[test]
    fn path_graph_degrees() {
        let g = Graph::build(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degrees(), vec![1, 2, 1]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn repeated_pairs_collapse() {
        let g = Graph::build(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = Graph::build(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn strict_builder_rejects_duplicates() {
        assert_eq!(
            Graph::from_simple_edges(2, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(Graph::build(2, &[(0, 0)]), Err(Error::SelfLoop { node: 0 }));
    }

    #[test]
    fn out_of_range_rejected() {
        assert_eq!(
            Graph::build(2, &[(0, 2)]),
            Err(Error::NodeOutOfRange { node: 2, node_count: 2 })
        );
    }

    #[test]
    fn edge_counts_disjoint_triangles() {
        let g = Graph::build(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let c = inter_community_edge_counts(&g, &p).unwrap();
        assert_eq!(c.row(0), &[3, 0]);
        assert_eq!(c.row(1), &[0, 3]);
    }

    #[test]
    fn edge_counts_bridge() {
        let g = two_triangles_with_bridge();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let c = inter_community_edge_counts(&g, &p).unwrap();
        assert_eq!((c.get(0, 0), c.get(1, 1), c.get(0, 1), c.get(1, 0)), (3, 3, 1, 1));
    }

    #[test]
    fn edge_counts_single_community() {
        let g = two_triangles_with_bridge();
        let c = inter_community_edge_counts(&g, &Partition::whole(6)).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(c.get(0, 0), 7);
    }

    #[test]
    fn edge_counts_universe_mismatch() {
        let g = two_triangles_with_bridge();
        assert!(matches!(
            inter_community_edge_counts(&g, &Partition::whole(5)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn coarsen_cases() {
        let p = Partition::new(vec![0, 0, 1, 2, 2, 3, 3, 3]).unwrap();
        assert_eq!(coarsen(&p, &[0, 1, 2, 3]).unwrap(), p);
        assert_eq!(coarsen(&p, &[0, 0, 0, 0]).unwrap(), Partition::whole(8));
        let q = coarsen(&p, &[0, 0, 1, 1]).unwrap();
        assert_eq!(q.community_sizes(), &[3, 5]);
        assert!(matches!(coarsen(&p, &[0, 0, 1]), Err(Error::Validation(_))));
    }

    #[test]
    fn partition_requires_dense_ids() {
        assert!(Partition::new(vec![0, 2]).is_err());
        let p = Partition::from_labels(&[7, 7, 3, 9]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 2]);
    }

    #[test]
    fn hierarchy_checks_strictness() {
        let base = Partition::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let h = Hierarchy::from_parent_maps(base.clone(), vec![vec![0, 0, 1], vec![0, 0]]).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.level(1).community_sizes(), &[4, 2]);
        // same community count is not a strict coarsening
        assert!(Hierarchy::from_parent_maps(base.clone(), vec![vec![0, 1, 2], vec![0, 0, 0]]).is_err());
        // top must be a single community
        assert!(Hierarchy::from_parent_maps(base, vec![vec![0, 0, 1]]).is_err());
    }
}
