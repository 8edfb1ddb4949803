//! Directed-graph representation plus the reachability and distance
//! computations the detectors and the analysis layer rely on.
//!
//! # Edge orientation
//!
//! A stored pair `(i, j)` means **j is an in-neighbor of i**: node j's state
//! flows into node i's update. Every module in this workspace uses this one
//! convention. Consequently:
//!
//! * `in_neighbors(i)`  = `{ j | (i, j) ∈ edges }` — who i listens to,
//! * `out_neighbors(i)` = `{ w | (w, i) ∈ edges }` — who listens to i,
//! * `distance(i, j)` is the length of the shortest directed path carrying
//!   information *from j to i*.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// A digraph on nodes `0..n` with no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    /// `in_adj[i]` lists j with `(i, j)` stored: the in-neighbors of i.
    in_adj: Vec<Vec<usize>>,
    /// `out_adj[j]` lists i with `(i, j)` stored: the out-neighbors of j.
    out_adj: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            for id in [i, j] {
                if id >= n {
                    return Err(Error::NodeOutOfRange { id, n });
                }
            }
            set.insert((i, j));
        }
        let mut in_adj = vec![Vec::new(); n];
        let mut out_adj = vec![Vec::new(); n];
        for (i, j) in set {
            in_adj[i].push(j);
            out_adj[j].push(i);
        }
        Ok(Digraph { n, in_adj, out_adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.in_adj.iter().map(Vec::len).sum()
    }

    /// Stored pairs `(i, j)` in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.in_adj
            .iter()
            .enumerate()
            .flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
    }

    /// Nodes whose state flows into node `i`.
    pub fn in_neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check_node(i)?;
        Ok(&self.in_adj[i])
    }

    /// Nodes that receive node `i`'s state.
    pub fn out_neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check_node(i)?;
        Ok(&self.out_adj[i])
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { id: i, n: self.n });
        }
        Ok(())
    }

    /// BFS over stored pairs from `start`; `dist[j]` is the number of hops
    /// from `start` to j.
    fn bfs(&self, adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// True iff every node reaches every other node via a directed path.
    pub fn is_strongly_connected(&self) -> bool {
        self.bfs(&self.in_adj, 0).iter().all(Option::is_some)
            && self.bfs(&self.out_adj, 0).iter().all(Option::is_some)
    }

    /// All-pairs shortest-path lengths; `None` where unreachable.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let d = (0..self.n).map(|i| self.bfs(&self.in_adj, i)).collect();
        DistanceMatrix { n: self.n, d }
    }

    /// Maximum over all ordered pairs of the shortest-path length.
    ///
    /// Returns 0 for a single-node graph (there are no pairs).
    pub fn diameter(&self) -> Result<usize> {
        let dm = self.distance_matrix();
        let mut max = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                match dm.get(i, j) {
                    Some(d) => max = max.max(d),
                    None => return Err(Error::DiameterUndefined),
                }
            }
        }
        Ok(max)
    }

    /// True iff some root node's state can reach every other node.
    ///
    /// Information flows from j to i along a stored pair `(i, j)`, so a root
    /// must reach all nodes via out-neighbor hops.
    pub fn has_spanning_tree(&self) -> bool {
        (0..self.n).any(|r| self.bfs(&self.out_adj, r).iter().all(Option::is_some))
    }
}

/// Shortest directed-path lengths; `get(i, j)` is the distance from j to i
/// in the information-flow orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Vec<Option<usize>>>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.d[i][j]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn all_finite(&self) -> bool {
        self.d.iter().flatten().all(Option::is_some)
    }
}
