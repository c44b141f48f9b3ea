//! One round of the algorithm: tentative assignment, conflict resolution and
//! palette equalization, permanent coloring, and the cleanup pass.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::state::{ColorSet, ColoringState};
use crate::graph::Graph;
use crate::rng::{stream_unit, PHASE_ASSIGN, PHASE_EQUALIZE};
use crate::schedule::{shrink, Schedule, ScheduleError, ScheduleParams};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("input graph contains a triangle")]
    NotTriangleFree,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invariant violated at round {round}: {detail}")]
    InvariantViolation { round: usize, detail: String },
}

/// Counters and events from a single round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub tentative_pairs: usize,
    pub removed_conflict: usize,
    pub removed_equalize: usize,
    pub newly_colored: Vec<usize>,
    pub removed_cleanup: usize,
    pub palette_emptied: Vec<usize>,
}

/// Phase I: for each uncolored vertex and each palette color, independently
/// propose the color with probability p_t = min(1, 1/(4 d_t)). The draw for a
/// (u,c) pair is addressed by (round, phase, u, c), so the result does not
/// depend on iteration order.
pub fn phase1_assign(
    g: &Graph,
    state: &ColoringState,
    schedule: &Schedule,
    seed: u64,
) -> Vec<ColorSet> {
    let t = state.round;
    let p = schedule.activation_p[t];
    let mut tentative = vec![ColorSet::empty(state.num_colors()); g.vertex_count()];
    for u in state.uncolored_vertices() {
        for c in state.palette(u).iter() {
            if stream_unit(seed, &[t as u64, PHASE_ASSIGN, u as u64, c as u64]) < p {
                tentative[u].insert(c);
            }
        }
    }
    tentative
}

/// Pr{no neighbor of u is tentatively assigned c} = (1 - p_t)^{d_t(u,c)},
/// computed from the beginning-of-round state.
pub fn exact_free_probability(
    g: &Graph,
    state: &ColoringState,
    u: usize,
    c: usize,
    schedule: &Schedule,
) -> f64 {
    let p = schedule.activation_p[state.round];
    (1.0 - p).powi(state.conflict_degree(g, u, c) as i32)
}

/// Phase II on all vertices. II.1 removes colors tentatively assigned to a
/// neighbor; II.2 rejects each survivor so that its total survival
/// probability is exactly e^{-1/2} whenever the free probability is at least
/// e^{-1/2}. A vertex is permanently colored iff its palette retains a color
/// that was tentatively assigned to it; the smallest such color is taken.
pub fn phase2_resolve(
    g: &Graph,
    state: &mut ColoringState,
    tentative: &[ColorSet],
    schedule: &Schedule,
    seed: u64,
) -> RoundOutcome {
    let t = state.round;
    let desired = shrink();
    let active = state.uncolored_vertices();
    let start_state = state.clone();
    let mut outcome = RoundOutcome::default();
    outcome.tentative_pairs = active.iter().map(|&u| tentative[u].len()).sum();

    let mut decisions: Vec<(usize, usize)> = Vec::new();
    for &u in &active {
        // II.1: drop colors proposed at any neighbor. The vertex's own
        // proposal does not remove the color from its own palette.
        for c in start_state.palette(u).to_vec() {
            let conflicted = g.neighbors(u).iter().any(|&v| tentative[v].contains(c));
            if conflicted && state.palette_mut(u).remove(c) {
                outcome.removed_conflict += 1;
            }
        }
        // II.2: equalization against the beginning-of-round free probability.
        for c in state.palette(u).to_vec() {
            let pr_free = exact_free_probability(g, &start_state, u, c, schedule);
            let keep = (desired / pr_free).min(1.0);
            if stream_unit(seed, &[t as u64, PHASE_EQUALIZE, u as u64, c as u64]) >= keep {
                state.palette_mut(u).remove(c);
                outcome.removed_equalize += 1;
            }
        }
        if let Some(c) = state.palette(u).iter().find(|&c| tentative[u].contains(c)) {
            decisions.push((u, c));
        }
    }
    for &(u, c) in &decisions {
        state.assign_permanent(u, c);
        outcome.newly_colored.push(u);
    }
    for &u in &active {
        if state.is_uncolored(u) && state.palette(u).is_empty() {
            outcome.palette_emptied.push(u);
        }
    }
    debug_assert!(state.partial_coloring_is_proper(g));
    outcome
}

/// Per-vertex cleanup bookkeeping, retained for invariant auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanupRecord {
    pub vertex: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// 2 gamma d_{t+1}; infinite when the alpha = 1/2 degeneracy disables
    /// removals.
    pub threshold: f64,
    pub removed: usize,
    pub palette_before: usize,
    /// q = threshold / pre-removal average, the Markov-style ratio. The
    /// removed fraction can never exceed 1/q.
    pub q: f64,
}

const ALPHA_DEGENERACY_EPS: f64 = 1e-9;

/// Phase III: per vertex, remove every color whose next-round conflict degree
/// reaches 2 gamma d_{t+1}. All conflict degrees are computed on the
/// post-Phase-II state before any palette is touched.
pub fn phase3_cleanup(
    g: &Graph,
    state: &mut ColoringState,
    schedule: &Schedule,
) -> (usize, Vec<CleanupRecord>) {
    let t_next = state.round + 1;
    let d_next = schedule.d_seq[t_next];
    let s_next = schedule.s_seq[t_next];
    let active = state.uncolored_vertices();

    // synchronization barrier: degrees frozen before removals start
    let frozen = state.clone();
    let mut total_removed = 0;
    let mut records = Vec::with_capacity(active.len());
    for &u in &active {
        let palette = frozen.palette(u).to_vec();
        if palette.is_empty() {
            continue;
        }
        let degrees: Vec<usize> =
            palette.iter().map(|&c| frozen.conflict_degree(g, u, c)).collect();
        let avg = degrees.iter().sum::<usize>() as f64 / palette.len() as f64;
        let alpha = (1.0 - palette.len() as f64 / s_next).clamp(0.0, 0.5);
        let (gamma, threshold) = if 1.0 - 2.0 * alpha <= ALPHA_DEGENERACY_EPS {
            (f64::INFINITY, f64::INFINITY)
        } else {
            let gamma = (avg * (1.0 - alpha) / ((1.0 - 2.0 * alpha) * d_next)).max(1.0);
            (gamma, 2.0 * gamma * d_next)
        };
        let mut removed = 0;
        for (&c, &deg) in palette.iter().zip(&degrees) {
            if (deg as f64) >= threshold {
                state.palette_mut(u).remove(c);
                removed += 1;
            }
        }
        total_removed += removed;
        records.push(CleanupRecord {
            vertex: u,
            alpha,
            gamma,
            threshold,
            removed,
            palette_before: palette.len(),
            q: if avg > 0.0 { threshold / avg } else { f64::INFINITY },
        });
    }
    (total_removed, records)
}

/// Per-round trace record pairing measured statistics with the schedule's
/// predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub t: usize,
    pub predicted: PredictedStats,
    pub measured: MeasuredStats,
    pub counters: RoundCounters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedStats {
    pub d: f64,
    pub s: f64,
    pub e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredStats {
    pub uncolored: usize,
    pub s_min: usize,
    pub s_max: usize,
    pub s_mean: f64,
    pub d_mean: f64,
    pub duc_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounters {
    pub tentative_pairs: usize,
    pub removed_conflict: usize,
    pub removed_equalize: usize,
    pub newly_colored: usize,
    pub removed_cleanup: usize,
    pub palette_emptied: usize,
}

/// Beginning-of-round measurements over the uncolored vertices.
pub fn measure(g: &Graph, state: &ColoringState) -> MeasuredStats {
    let active = state.uncolored_vertices();
    if active.is_empty() {
        return MeasuredStats {
            uncolored: 0,
            s_min: 0,
            s_max: 0,
            s_mean: 0.0,
            d_mean: 0.0,
            duc_max: 0,
        };
    }
    let sizes: Vec<usize> = active.iter().map(|&u| state.palette(u).len()).collect();
    let d_mean = active.iter().map(|&u| state.mean_conflict_degree(g, u)).sum::<f64>()
        / active.len() as f64;
    let duc_max = active
        .iter()
        .flat_map(|&u| {
            state.palette(u).to_vec().into_iter().map(move |c| (u, c))
        })
        .map(|(u, c)| state.conflict_degree(g, u, c))
        .max()
        .unwrap_or(0);
    MeasuredStats {
        uncolored: active.len(),
        s_min: *sizes.iter().min().unwrap(),
        s_max: *sizes.iter().max().unwrap(),
        s_mean: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
        d_mean,
        duc_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyPaletteEvent {
    pub vertex: usize,
    pub round: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Stop at the end of the round in which some uncolored palette empties.
    pub fail_on_empty_palette: bool,
    /// Re-check propriety and cleanup soundness after every round.
    pub verify_rounds: bool,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub schedule: Schedule,
    pub state: ColoringState,
    pub traces: Vec<RoundTrace>,
    /// First palette-emptying event, if any; such a run cannot be completed
    /// from palettes alone and is marked failed.
    pub empty_palette: Option<EmptyPaletteEvent>,
}

/// Runs the full repeat-until block: t1 rounds of Phases I-III.
pub fn run_rounds(
    g: &Graph,
    params: ScheduleParams,
    seed: u64,
    opts: RunOptions,
) -> Result<RunResult, EngineError> {
    if !g.is_triangle_free() {
        return Err(EngineError::NotTriangleFree);
    }
    let schedule = Schedule::build(params)?;
    let mut state = ColoringState::init(g, params.num_colors() as usize);
    let mut traces = Vec::with_capacity(schedule.t1);
    let mut empty_palette = None;
    for t in 0..schedule.t1 {
        debug_assert_eq!(state.round, t);
        let measured = measure(g, &state);
        let tentative = phase1_assign(g, &state, &schedule, seed);
        let mut outcome = phase2_resolve(g, &mut state, &tentative, &schedule, seed);
        let (removed_cleanup, cleanup) = phase3_cleanup(g, &mut state, &schedule);
        outcome.removed_cleanup = removed_cleanup;
        if empty_palette.is_none() {
            if let Some(&vertex) = outcome.palette_emptied.first() {
                empty_palette = Some(EmptyPaletteEvent { vertex, round: t });
            }
        }
        if opts.verify_rounds {
            verify_round(g, &state, &cleanup, t)?;
        }
        traces.push(RoundTrace {
            t,
            predicted: PredictedStats {
                d: schedule.d_seq[t],
                s: schedule.s_seq[t],
                e: schedule.e_seq[t],
            },
            measured,
            counters: RoundCounters {
                tentative_pairs: outcome.tentative_pairs,
                removed_conflict: outcome.removed_conflict,
                removed_equalize: outcome.removed_equalize,
                newly_colored: outcome.newly_colored.len(),
                removed_cleanup: outcome.removed_cleanup,
                palette_emptied: outcome.palette_emptied.len(),
            },
        });
        state.round = t + 1;
        if opts.fail_on_empty_palette && empty_palette.is_some() {
            break;
        }
    }
    Ok(RunResult { schedule, state, traces, empty_palette })
}

fn verify_round(
    g: &Graph,
    state: &ColoringState,
    cleanup: &[CleanupRecord],
    t: usize,
) -> Result<(), EngineError> {
    if !state.partial_coloring_is_proper(g) {
        return Err(EngineError::InvariantViolation {
            round: t,
            detail: "partial coloring not proper".into(),
        });
    }
    for rec in cleanup {
        // every surviving color is strictly below the cutoff
        if state.is_uncolored(rec.vertex) {
            for c in state.palette(rec.vertex).iter() {
                let deg = state.conflict_degree(g, rec.vertex, c) as f64;
                if deg >= rec.threshold {
                    return Err(EngineError::InvariantViolation {
                        round: t,
                        detail: format!(
                            "vertex {} keeps color {c} with degree {deg} >= threshold {}",
                            rec.vertex, rec.threshold
                        ),
                    });
                }
            }
        }
        // removed fraction bounded by 1/q
        let fraction = rec.removed as f64 / rec.palette_before as f64;
        if rec.q.is_finite() && fraction > 1.0 / rec.q + 1e-12 {
            return Err(EngineError::InvariantViolation {
                round: t,
                detail: format!(
                    "vertex {} removed fraction {fraction} exceeds 1/q = {}",
                    rec.vertex,
                    1.0 / rec.q
                ),
            });
        }
    }
    Ok(())
}
