//! Reference colorers and the propriety verifier.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("vertex {0} is uncolored")]
    UncoloredVertex(usize),
    #[error("coloring has {got} entries for a graph on {expected} vertices")]
    LengthMismatch { got: usize, expected: usize },
}

/// A (possibly partial) color assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<Option<usize>>,
    pub num_colors_used: usize,
}

impl Coloring {
    pub fn new(colors: Vec<Option<usize>>) -> Coloring {
        let mut seen: Vec<usize> = colors.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        Coloring { colors, num_colors_used: seen.len() }
    }

    pub fn complete(colors: Vec<usize>) -> Coloring {
        Coloring::new(colors.into_iter().map(Some).collect())
    }
}

/// True iff no edge is monochromatic. Every vertex must be colored.
pub fn verify_proper(g: &Graph, coloring: &Coloring) -> Result<bool, ColoringError> {
    if coloring.colors.len() != g.vertex_count() {
        return Err(ColoringError::LengthMismatch {
            got: coloring.colors.len(),
            expected: g.vertex_count(),
        });
    }
    if let Some(u) = coloring.colors.iter().position(Option::is_none) {
        return Err(ColoringError::UncoloredVertex(u));
    }
    for (u, v) in g.edges() {
        if coloring.colors[u] == coloring.colors[v] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First-fit greedy along the given vertex order; uses at most Δ+1 colors.
pub fn greedy_color(g: &Graph, order: &[usize]) -> Coloring {
    let mut colors: Vec<Option<usize>> = vec![None; g.vertex_count()];
    for &u in order {
        colors[u] = Some(smallest_free_color(g, &colors, u));
    }
    Coloring::new(colors)
}

fn smallest_free_color(g: &Graph, colors: &[Option<usize>], u: usize) -> usize {
    let mut used: Vec<usize> = g.neighbors(u).iter().filter_map(|&v| colors[v]).collect();
    used.sort_unstable();
    used.dedup();
    let mut c = 0;
    for x in used {
        if x == c {
            c += 1;
        } else if x > c {
            break;
        }
    }
    c
}

/// DSATUR: repeatedly color the vertex with the most distinct neighbor
/// colors. Ties break by higher degree, then lower index.
pub fn dsatur_color(g: &Graph) -> Coloring {
    let n = g.vertex_count();
    let mut colors: Vec<Option<usize>> = vec![None; n];
    let mut saturation: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for _ in 0..n {
        let u = (0..n)
            .filter(|&u| colors[u].is_none())
            .max_by(|&a, &b| {
                saturation[a]
                    .len()
                    .cmp(&saturation[b].len())
                    .then(g.degree(a).cmp(&g.degree(b)))
                    .then(b.cmp(&a))
            })
            .expect("an uncolored vertex remains");
        let c = smallest_free_color(g, &colors, u);
        colors[u] = Some(c);
        for &v in g.neighbors(u) {
            saturation[v].insert(c);
        }
    }
    Coloring::new(colors)
}
