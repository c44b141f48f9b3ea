//! Per-vertex coloring state for the round-based algorithm.

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

/// Small set of color indices backed by a bit vector. Iteration is always in
/// ascending color order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorSet {
    words: Vec<u64>,
    len: usize,
}

impl ColorSet {
    pub fn empty(num_colors: usize) -> ColorSet {
        ColorSet { words: vec![0; num_colors.div_ceil(64)], len: 0 }
    }

    pub fn full(num_colors: usize) -> ColorSet {
        let mut set = ColorSet::empty(num_colors);
        for c in 0..num_colors {
            set.insert(c);
        }
        set
    }

    pub fn contains(&self, c: usize) -> bool {
        self.words[c / 64] >> (c % 64) & 1 == 1
    }

    pub fn insert(&mut self, c: usize) -> bool {
        let fresh = !self.contains(c);
        if fresh {
            self.words[c / 64] |= 1 << (c % 64);
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, c: usize) -> bool {
        let present = self.contains(c);
        if present {
            self.words[c / 64] &= !(1 << (c % 64));
            self.len -= 1;
        }
        present
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Palettes, permanent colors, and the uncolored set at some round boundary.
///
/// Invariant: a vertex has a permanent color exactly when it is not in the
/// uncolored set, and the partial coloring is proper at all times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringState {
    pub round: usize,
    palettes: Vec<ColorSet>,
    permanent: Vec<Option<usize>>,
    num_colors: usize,
    uncolored_count: usize,
}

impl ColoringState {
    /// All vertices uncolored with full palettes at round 0.
    pub fn init(g: &Graph, num_colors: usize) -> ColoringState {
        assert!(num_colors >= 1, "need at least one color");
        let n = g.vertex_count();
        ColoringState {
            round: 0,
            palettes: vec![ColorSet::full(num_colors); n],
            permanent: vec![None; n],
            num_colors,
            uncolored_count: n,
        }
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn vertex_count(&self) -> usize {
        self.permanent.len()
    }

    pub fn is_uncolored(&self, u: usize) -> bool {
        self.permanent[u].is_none()
    }

    pub fn uncolored_count(&self) -> usize {
        self.uncolored_count
    }

    pub fn uncolored_vertices(&self) -> Vec<usize> {
        (0..self.permanent.len()).filter(|&u| self.is_uncolored(u)).collect()
    }

    pub fn permanent_color(&self, u: usize) -> Option<usize> {
        self.permanent[u]
    }

    pub fn palette(&self, u: usize) -> &ColorSet {
        &self.palettes[u]
    }

    pub fn palette_mut(&mut self, u: usize) -> &mut ColorSet {
        &mut self.palettes[u]
    }

    pub fn palettes_snapshot(&self) -> Vec<ColorSet> {
        self.palettes.clone()
    }

    pub fn assign_permanent(&mut self, u: usize, c: usize) {
        debug_assert!(self.is_uncolored(u));
        debug_assert!(c < self.num_colors);
        self.permanent[u] = Some(c);
        self.uncolored_count -= 1;
    }

    /// d_t(u,c): uncolored neighbors of u that still hold c.
    pub fn conflict_degree(&self, g: &Graph, u: usize, c: usize) -> usize {
        g.neighbors(u)
            .iter()
            .filter(|&&v| self.is_uncolored(v) && self.palettes[v].contains(c))
            .count()
    }

    /// d_t(u): average of d_t(u,c) over the palette; 0 for an empty palette.
    pub fn mean_conflict_degree(&self, g: &Graph, u: usize) -> f64 {
        let pal = &self.palettes[u];
        if pal.is_empty() {
            return 0.0;
        }
        let total: usize = pal.iter().map(|c| self.conflict_degree(g, u, c)).sum();
        total as f64 / pal.len() as f64
    }

    /// No two adjacent permanently colored vertices share a color.
    pub fn partial_coloring_is_proper(&self, g: &Graph) -> bool {
        g.edges().iter().all(|&(u, v)| {
            match (self.permanent[u], self.permanent[v]) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            }
        })
    }
}
