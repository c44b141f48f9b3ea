//! Immutable simple undirected graphs with sorted adjacency lists.
//!
//! The graph is frozen at construction time. The shrinking "uncolored
//! subgraph" of the round-based algorithm is never materialized here; it is
//! represented implicitly by the engine's coloring state, so a single graph
//! can be shared read-only across many concurrent runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },
}

/// Simple undirected graph. Adjacency lists are sorted ascending so that
/// neighbor iteration order is deterministic across platforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertex_count: usize,
    adjacency: Vec<Vec<usize>>,
    max_degree: usize,
}

impl Graph {
    /// Builds a graph from an edge list, validating simplicity.
    pub fn build(edges: &[(usize, usize)], vertex_count: usize) -> Result<Graph, GraphError> {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            if u >= vertex_count {
                return Err(GraphError::IndexOutOfRange { index: u, vertex_count });
            }
            if v >= vertex_count {
                return Err(GraphError::IndexOutOfRange { index: v, vertex_count });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Graph { vertex_count, adjacency, max_degree })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Maximum degree Δ.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as (u, v) pairs with u < v, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.vertex_count {
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True iff no three vertices are mutually adjacent. Checks every edge
    /// (u, v) for a common neighbor by merging the two sorted lists.
    pub fn is_triangle_free(&self) -> bool {
        for u in 0..self.vertex_count {
            for &v in &self.adjacency[u] {
                if v > u && sorted_intersects(&self.adjacency[u], &self.adjacency[v]) {
                    return false;
                }
            }
        }
        true
    }
}

fn sorted_intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_graph() {
        let g = Graph::build(&[(0, 1), (1, 2), (2, 0)], 3).unwrap();
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.edge_count(), 3);
        assert!(!g.is_triangle_free());
    }

    #[test]
    fn edgeless_graph() {
        let g = Graph::build(&[], 5).unwrap();
        assert_eq!(g.max_degree(), 0);
        assert!(g.is_triangle_free());
    }

    #[test]
    fn rejects_duplicate_edge() {
        assert_eq!(
            Graph::build(&[(0, 1), (0, 1)], 2),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        // reversed orientation is still the same edge
        assert_eq!(
            Graph::build(&[(0, 1), (1, 0)], 2),
            Err(GraphError::DuplicateEdge(0, 1))
        );
    }

    #[test]
    fn rejects_self_loop_and_bad_index() {
        assert_eq!(Graph::build(&[(2, 2)], 3), Err(GraphError::SelfLoop(2)));
        assert_eq!(
            Graph::build(&[(0, 7)], 3),
            Err(GraphError::IndexOutOfRange { index: 7, vertex_count: 3 })
        );
    }

    #[test]
    fn c5_is_triangle_free() {
        let g = Graph::build(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], 5).unwrap();
        assert!(g.is_triangle_free());
    }

    #[test]
    fn adjacency_is_sorted() {
        let g = Graph::build(&[(3, 0), (3, 2), (3, 1)], 4).unwrap();
        assert_eq!(g.neighbors(3), &[0, 1, 2]);
    }

    /// O(n³) triple enumeration, kept independent of the merge-based check.
    fn brute_force_triangle_free(g: &Graph) -> bool {
        let n = g.vertex_count();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn triangle_free_matches_brute_force_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 0..=12usize {
            for _ in 0..40 {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        if rng.random::<f64>() < 0.3 {
                            edges.push((u, v));
                        }
                    }
                }
                let g = Graph::build(&edges, n).unwrap();
                assert_eq!(g.is_triangle_free(), brute_force_triangle_free(&g));
            }
        }
    }
}
