//! Test-instance generators. Every family emits a triangle-free graph,
//! either by construction (cycles, bipartite) or by keep-first edge repair.
//! Generation is a pure function of the spec: equal specs give bit-identical
//! adjacency.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid graph family spec: {0}")]
pub struct InvalidSpec(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Cycle,
    CompleteBipartite,
    RandomBipartite,
    RandomTriangleFree,
    RegularHighGirthAttempt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFamilySpec {
    pub family: GraphFamily,
    #[serde(default)]
    pub n: usize,
    /// Per-side degree for complete bipartite; target degree for the
    /// high-girth attempt.
    #[serde(default)]
    pub degree_target: usize,
    #[serde(default)]
    pub edge_probability: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GraphFamilySpec {
    pub fn cycle(n: usize) -> Self {
        GraphFamilySpec {
            family: GraphFamily::Cycle,
            n,
            degree_target: 0,
            edge_probability: 0.0,
            seed: 0,
        }
    }

    pub fn complete_bipartite(degree: usize) -> Self {
        GraphFamilySpec {
            family: GraphFamily::CompleteBipartite,
            n: 2 * degree,
            degree_target: degree,
            edge_probability: 0.0,
            seed: 0,
        }
    }

    pub fn random_bipartite(n: usize, p: f64, seed: u64) -> Self {
        GraphFamilySpec {
            family: GraphFamily::RandomBipartite,
            n,
            degree_target: 0,
            edge_probability: p,
            seed,
        }
    }

    pub fn random_triangle_free(n: usize, p: f64, seed: u64) -> Self {
        GraphFamilySpec {
            family: GraphFamily::RandomTriangleFree,
            n,
            degree_target: 0,
            edge_probability: p,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), InvalidSpec> {
        match self.family {
            GraphFamily::Cycle => {
                if self.n < 3 {
                    return Err(InvalidSpec(format!("cycle needs n >= 3, got {}", self.n)));
                }
            }
            GraphFamily::CompleteBipartite => {
                if self.degree_target == 0 {
                    return Err(InvalidSpec("complete_bipartite needs degree_target >= 1".into()));
                }
            }
            GraphFamily::RandomBipartite | GraphFamily::RandomTriangleFree => {
                if self.n == 0 {
                    return Err(InvalidSpec("random family needs n >= 1".into()));
                }
                if !(0.0..=1.0).contains(&self.edge_probability) {
                    return Err(InvalidSpec(format!(
                        "edge_probability must lie in [0,1], got {}",
                        self.edge_probability
                    )));
                }
            }
            GraphFamily::RegularHighGirthAttempt => {
                if self.n == 0 || self.degree_target == 0 {
                    return Err(InvalidSpec(
                        "regular_high_girth_attempt needs n >= 1 and degree_target >= 1".into(),
                    ));
                }
                if self.degree_target >= self.n {
                    return Err(InvalidSpec("degree_target must be < n".into()));
                }
            }
        }
        Ok(())
    }
}

/// Generates the graph described by `spec`. Deterministic given the seed.
pub fn generate(spec: &GraphFamilySpec) -> Result<Graph, InvalidSpec> {
    spec.validate()?;
    let g = match spec.family {
        GraphFamily::Cycle => cycle(spec.n),
        GraphFamily::CompleteBipartite => complete_bipartite(spec.degree_target),
        GraphFamily::RandomBipartite => {
            random_bipartite(spec.n, spec.edge_probability, spec.seed)
        }
        GraphFamily::RandomTriangleFree => {
            random_triangle_free(spec.n, spec.edge_probability, spec.seed)
        }
        GraphFamily::RegularHighGirthAttempt => {
            regular_high_girth_attempt(spec.n, spec.degree_target, spec.seed)
        }
    };
    debug_assert!(g.is_triangle_free());
    Ok(g)
}

fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
    Graph::build(&edges, n).expect("cycle edge list is simple")
}

/// K_{d,d}: sides {0..d} and {d..2d}.
fn complete_bipartite(d: usize) -> Graph {
    let mut edges = Vec::with_capacity(d * d);
    for u in 0..d {
        for v in d..2 * d {
            edges.push((u, v));
        }
    }
    Graph::build(&edges, 2 * d).expect("bipartite edge list is simple")
}

fn random_bipartite(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = n / 2;
    let mut edges = Vec::new();
    for u in 0..left {
        for v in left..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::build(&edges, n).expect("bipartite edge list is simple")
}

/// G(n,p), then a keep-first repair pass: scan edges in index order and drop
/// any edge that closes a triangle with edges kept so far.
fn random_triangle_free(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidate = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                candidate.push((u, v));
            }
        }
    }
    let mut kept_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut kept = Vec::new();
    for (u, v) in candidate {
        if kept_adj[u].iter().any(|w| kept_adj[v].contains(w)) {
            continue;
        }
        kept_adj[u].push(v);
        kept_adj[v].push(u);
        kept.push((u, v));
    }
    Graph::build(&kept, n).expect("repaired edge list is simple")
}

/// Best-effort near-regular generator that also avoids 4-cycles, so girth
/// exceeds 4 when it succeeds. Repeated random passes add edges between
/// under-degree vertices, rejecting any edge that would create a path of
/// length <= 3 between its endpoints. No regularity guarantee.
fn regular_high_girth_attempt(n: usize, target: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edges = Vec::new();
    let max_tries = 50 * n * target.max(1);
    let mut tries = 0;
    while tries < max_tries {
        tries += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || adj[u].len() >= target || adj[v].len() >= target {
            continue;
        }
        if within_distance_3(&adj, u, v) {
            continue;
        }
        adj[u].push(v);
        adj[v].push(u);
        edges.push((u.min(v), u.max(v)));
    }
    Graph::build(&edges, n).expect("attempt edge list is simple")
}

fn within_distance_3(adj: &[Vec<usize>], u: usize, v: usize) -> bool {
    if adj[u].contains(&v) {
        return true;
    }
    for &a in &adj[u] {
        if a == v || adj[a].contains(&v) {
            return true;
        }
        for &b in &adj[a] {
            if adj[b].contains(&v) {
                return true;
            }
        }
    }
    false
}
