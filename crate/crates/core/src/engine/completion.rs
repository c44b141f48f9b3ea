//! Constructive completion of the partial coloring left by the rounds.
//!
//! The existence argument behind the final random coloring is
//! non-constructive; these strategies replace it with explicit budgets:
//! plain retry, Moser-Tardos-style local resampling, or a greedy fallback
//! that may step outside palettes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

use crate::baselines::{verify_proper, Coloring};
use crate::engine::state::ColoringState;
use crate::graph::Graph;
use crate::rng::{stream_u64, PHASE_COMPLETE};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("completion failed with {conflicts_remaining} conflicted vertices")]
pub struct CompletionFailure {
    pub conflicts_remaining: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionStrategy {
    SingleShot,
    Retry,
    LocalResample,
    GreedyFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionPolicy {
    pub strategy: CompletionStrategy,
    pub max_attempts: u32,
    /// Redraw budget multiplier for local resampling: at most
    /// resample_rounds * n redraws.
    pub resample_rounds: u32,
}

impl CompletionPolicy {
    pub fn single_shot() -> Self {
        CompletionPolicy { strategy: CompletionStrategy::SingleShot, max_attempts: 1, resample_rounds: 0 }
    }

    pub fn retry(max_attempts: u32) -> Self {
        assert!(max_attempts >= 1);
        CompletionPolicy { strategy: CompletionStrategy::Retry, max_attempts, resample_rounds: 0 }
    }

    pub fn local_resample(resample_rounds: u32) -> Self {
        CompletionPolicy {
            strategy: CompletionStrategy::LocalResample,
            max_attempts: 1,
            resample_rounds,
        }
    }

    pub fn greedy_fallback() -> Self {
        CompletionPolicy {
            strategy: CompletionStrategy::GreedyFallback,
            max_attempts: 1,
            resample_rounds: 0,
        }
    }
}

impl Default for CompletionPolicy {
    fn default() -> Self {
        CompletionPolicy::retry(10)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionOutcome {
    pub coloring: Coloring,
    pub attempts_used: u32,
    pub resample_steps: u32,
    /// True when the greedy fallback stepped outside some palette.
    pub left_palettes: bool,
}

struct Completer<'a> {
    g: &'a Graph,
    state: &'a ColoringState,
    seed: u64,
    colors: Vec<Option<usize>>,
    targets: Vec<usize>,
}

impl<'a> Completer<'a> {
    fn new(g: &'a Graph, state: &'a ColoringState, seed: u64) -> Self {
        let colors: Vec<Option<usize>> =
            (0..g.vertex_count()).map(|u| state.permanent_color(u)).collect();
        let targets = state.uncolored_vertices();
        Completer { g, state, seed, colors, targets }
    }

    fn draw(&self, u: usize, attempt: u64, step: u64) -> Option<usize> {
        let palette = self.state.palette(u).to_vec();
        if palette.is_empty() {
            return None;
        }
        let z = stream_u64(self.seed, &[PHASE_COMPLETE, attempt, step, u as u64]);
        Some(palette[(z % palette.len() as u64) as usize])
    }

    /// Uniform palette draw for every target. Targets with empty palettes
    /// stay uncolored and count as conflicted.
    fn shot(&mut self, attempt: u64) {
        for &u in &self.targets.clone() {
            self.colors[u] = self.draw(u, attempt, 0);
        }
    }

    fn is_conflicted(&self, u: usize) -> bool {
        match self.colors[u] {
            None => true,
            Some(c) => self.g.neighbors(u).iter().any(|&v| self.colors[v] == Some(c)),
        }
    }

    fn conflicted(&self) -> BTreeSet<usize> {
        self.targets.iter().copied().filter(|&u| self.is_conflicted(u)).collect()
    }

    fn finish(self, attempts_used: u32, resample_steps: u32, left_palettes: bool)
        -> Result<CompletionOutcome, CompletionFailure>
    {
        let conflicts_remaining =
            self.targets.iter().filter(|&&u| self.is_conflicted(u)).count();
        let coloring = Coloring::new(self.colors);
        match verify_proper(self.g, &coloring) {
            Ok(true) => Ok(CompletionOutcome { coloring, attempts_used, resample_steps, left_palettes }),
            _ => Err(CompletionFailure { conflicts_remaining }),
        }
    }
}

/// Colors every remaining vertex according to `policy`. Any `Ok` result is a
/// verified proper coloring of the whole graph.
pub fn complete_coloring(
    g: &Graph,
    state: &ColoringState,
    policy: &CompletionPolicy,
    seed: u64,
) -> Result<CompletionOutcome, CompletionFailure> {
    assert!(policy.max_attempts >= 1);
    let mut completer = Completer::new(g, state, seed);
    if completer.targets.is_empty() {
        return completer.finish(0, 0, false);
    }
    match policy.strategy {
        CompletionStrategy::SingleShot => {
            completer.shot(0);
            completer.finish(1, 0, false)
        }
        CompletionStrategy::Retry => {
            let mut last_conflicts = 0;
            for attempt in 0..policy.max_attempts {
                completer.shot(attempt as u64);
                let conflicts = completer.conflicted();
                if conflicts.is_empty() {
                    return completer.finish(attempt + 1, 0, false);
                }
                last_conflicts = conflicts.len();
            }
            Err(CompletionFailure { conflicts_remaining: last_conflicts })
        }
        CompletionStrategy::LocalResample => {
            completer.shot(0);
            let budget = policy.resample_rounds as u64 * g.vertex_count() as u64;
            let mut conflicts = completer.conflicted();
            let mut step = 0u64;
            while let Some(&u) = conflicts.first() {
                if step >= budget || completer.state.palette(u).is_empty() {
                    return Err(CompletionFailure { conflicts_remaining: conflicts.len() });
                }
                step += 1;
                completer.colors[u] = completer.draw(u, 0, step);
                // only u and its neighbors can change conflict status
                for w in std::iter::once(u).chain(completer.g.neighbors(u).iter().copied()) {
                    if completer.state.is_uncolored(w) {
                        if completer.is_conflicted(w) {
                            conflicts.insert(w);
                        } else {
                            conflicts.remove(&w);
                        }
                    }
                }
            }
            completer.finish(1, step as u32, false)
        }
        CompletionStrategy::GreedyFallback => {
            completer.shot(0);
            let num_colors = state.num_colors();
            let mut left_palettes = false;
            let mut remaining = 0;
            for &u in &completer.targets.clone() {
                if !completer.is_conflicted(u) {
                    continue;
                }
                let used: BTreeSet<usize> = completer
                    .g
                    .neighbors(u)
                    .iter()
                    .filter_map(|&v| completer.colors[v])
                    .collect();
                match (0..num_colors).find(|c| !used.contains(c)) {
                    Some(c) => {
                        if !completer.state.palette(u).contains(c) {
                            left_palettes = true;
                        }
                        completer.colors[u] = Some(c);
                    }
                    None => remaining += 1,
                }
            }
            if remaining > 0 {
                return Err(CompletionFailure { conflicts_remaining: remaining });
            }
            completer.finish(1, 0, left_palettes)
        }
    }
}
