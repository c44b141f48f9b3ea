//! Invariant checking and Monte Carlo estimators.
//!
//! The per-vertex invariant asserts existence of an alpha in [0, 1/2] with
//!
//! ```text
//! s_t(u)   >= (1 - alpha) s_t (1 - e_t)
//! d_t(u)   <= ((1 - 2 alpha)/(1 - alpha)) d_t (1 + e_t)
//! d_t(u,c) <= 2 d_t (1 + e_t)
//! ```
//!
//! Both comparison sides are monotone in alpha, so feasibility reduces to an
//! interval intersection: the palette inequality lower-bounds alpha, the
//! average inequality upper-bounds it, and the per-color cap is alpha-free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{phase1_assign, phase2_resolve, ColoringState};
use crate::graph::Graph;
use crate::rng::{stream_u64, PHASE_TRIAL};
use crate::schedule::{shrink, Schedule, ScheduleError, ScheduleParams};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("estimator needs at least {min} trials for a sigma estimate, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

// ---------------------------------------------------------------------------
// Averaging utilities
// ---------------------------------------------------------------------------

/// Upper bound mu (1 - q alpha)/(1 - alpha) on the average after removing an
/// alpha-fraction of elements each of value at least q mu.
pub fn removal_average_bound(mu: f64, alpha: f64, q: f64) -> Result<f64, AnalysisError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(AnalysisError::Domain(format!("alpha {alpha} outside [0, 1)")));
    }
    if q <= 1.0 {
        return Err(AnalysisError::Domain(format!("q {q} must exceed 1")));
    }
    if alpha > 1.0 / q {
        return Err(AnalysisError::Domain(format!(
            "alpha {alpha} > 1/q = {}; the removed mass would exceed the total",
            1.0 / q
        )));
    }
    Ok(mu * (1.0 - q * alpha) / (1.0 - alpha))
}

/// Exact average mu (1 + q alpha)/(1 + alpha) after adding an alpha-fraction
/// of points of value q mu.
pub fn addition_average(mu: f64, alpha: f64, q: f64) -> f64 {
    debug_assert!(alpha >= 0.0 && q >= 0.0);
    mu * (1.0 + q * alpha) / (1.0 + alpha)
}

/// Exact error-factor transform: the e' with
/// (1 - a)(1 + e') = 1 - a (1 + e), i.e. e' = -a e / (1 - a).
pub fn error_compose(a: f64, e: f64) -> Result<f64, AnalysisError> {
    if !(0.0 < a && a < 1.0) {
        return Err(AnalysisError::Domain(format!("a {a} outside (0, 1)")));
    }
    Ok(-a * e / (1.0 - a))
}

// ---------------------------------------------------------------------------
// Invariant witnesses
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessMeasured {
    pub s_u: f64,
    pub d_u: f64,
    pub duc_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessBounds {
    pub palette_floor: f64,
    pub avg_cap: f64,
    pub duc_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantWitness {
    pub vertex: usize,
    /// An admissible alpha, when one exists; the smallest one is reported.
    pub alpha: Option<f64>,
    pub palette_ok: bool,
    pub avg_ok: bool,
    pub max_ok: bool,
    pub measured: WitnessMeasured,
    pub bounds: WitnessBounds,
}

impl InvariantWitness {
    pub fn holds(&self) -> bool {
        self.alpha.is_some()
    }
}

/// Admissible alpha interval within [0, 1/2] for the palette and average
/// inequalities, ignoring the alpha-free per-color cap. None when empty.
pub fn alpha_interval(s_u: f64, d_u: f64, s_t: f64, d_t: f64, e_t: f64) -> Option<(f64, f64)> {
    let palette_scale = s_t * (1.0 - e_t);
    let lo = if palette_scale > 0.0 { (1.0 - s_u / palette_scale).max(0.0) } else { 0.0 };
    let avg_scale = d_t * (1.0 + e_t);
    let hi = if avg_scale > 0.0 {
        let r = d_u / avg_scale;
        if r > 1.0 {
            return None;
        }
        if r <= 0.0 {
            0.5
        } else {
            ((1.0 - r) / (2.0 - r)).min(0.5)
        }
    } else if d_u > 0.0 {
        return None;
    } else {
        0.5
    };
    (lo <= hi + 1e-15).then_some((lo, hi.min(0.5)))
}

fn ratio_cap(alpha: f64) -> f64 {
    (1.0 - 2.0 * alpha) / (1.0 - alpha)
}

/// Evaluates the invariant for every uncolored vertex at round boundary `t`.
pub fn check_assumption(
    g: &Graph,
    state: &ColoringState,
    schedule: &Schedule,
    t: usize,
) -> Vec<InvariantWitness> {
    let s_t = schedule.s_seq[t];
    let d_t = schedule.d_seq[t];
    let e_t = schedule.e_seq[t];
    state
        .uncolored_vertices()
        .into_iter()
        .map(|u| {
            let s_u = state.palette(u).len() as f64;
            let d_u = state.mean_conflict_degree(g, u);
            let duc_max = state
                .palette(u)
                .iter()
                .map(|c| state.conflict_degree(g, u, c))
                .max()
                .unwrap_or(0) as f64;
            let duc_cap = 2.0 * d_t * (1.0 + e_t);
            let max_ok = duc_max <= duc_cap;
            let interval = alpha_interval(s_u, d_u, s_t, d_t, e_t);
            let alpha = match interval {
                Some((lo, _)) if max_ok => Some(lo),
                _ => None,
            };
            // with no admissible alpha, grade each inequality at its most
            // forgiving endpoint so the failing side is visible
            let (palette_alpha, avg_alpha) = match alpha {
                Some(a) => (a, a),
                None => (0.5, 0.0),
            };
            let palette_floor = (1.0 - palette_alpha) * s_t * (1.0 - e_t);
            let avg_cap = ratio_cap(avg_alpha) * d_t * (1.0 + e_t);
            InvariantWitness {
                vertex: u,
                alpha,
                palette_ok: s_u >= palette_floor,
                avg_ok: d_u <= avg_cap,
                max_ok,
                measured: WitnessMeasured { s_u, d_u, duc_max },
                bounds: WitnessBounds { palette_floor, avg_cap, duc_cap },
            }
        })
        .collect()
}

/// Grid-search oracle over alpha in {0, step, 2 step, ..., 1/2}.
pub fn alpha_feasible_by_grid(
    s_u: f64,
    d_u: f64,
    s_t: f64,
    d_t: f64,
    e_t: f64,
    step: f64,
) -> bool {
    let mut alpha = 0.0f64;
    while alpha <= 0.5 + 1e-12 {
        let a = alpha.min(0.5);
        let palette_ok = s_u >= (1.0 - a) * s_t * (1.0 - e_t);
        let avg_ok = d_u <= ratio_cap(a) * d_t * (1.0 + e_t);
        if palette_ok && avg_ok {
            return true;
        }
        alpha += step;
    }
    false
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators
// ---------------------------------------------------------------------------

pub const MIN_ESTIMATOR_TRIALS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub trials: usize,
    pub empirical_mean: f64,
    pub predicted: f64,
    pub tolerance_sigmas: f64,
    pub pass: bool,
}

fn check_trials(trials: usize) -> Result<(), AnalysisError> {
    if trials < MIN_ESTIMATOR_TRIALS {
        return Err(AnalysisError::TooFewTrials { min: MIN_ESTIMATOR_TRIALS, got: trials });
    }
    Ok(())
}

/// One round-0 execution of Phases I and II under an independent trial
/// stream. Returns the state after Phase II (before cleanup).
fn round0_after_phase2(g: &Graph, schedule: &Schedule, trial_seed: u64) -> ColoringState {
    let mut state = ColoringState::init(g, schedule.params.num_colors() as usize);
    let tentative = phase1_assign(g, &state, schedule, trial_seed);
    phase2_resolve(g, &mut state, &tentative, schedule, trial_seed);
    state
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    stream_u64(seed, &[PHASE_TRIAL, trial as u64])
}

/// Empirical mean palette size after round-0 Phase II, against the exact
/// per-color survival law: every color survives with probability e^{-1/2}
/// whenever its free probability is at least e^{-1/2}, which holds on
/// sparse-enough instances, making the predicted mean s_0(u) e^{-1/2} exact.
pub fn estimate_palette_survival(
    g: &Graph,
    params: ScheduleParams,
    trials: usize,
    seed: u64,
) -> Result<EstimatorReport, AnalysisError> {
    check_trials(trials)?;
    let schedule = Schedule::build(params)?;
    let n = g.vertex_count() as f64;
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let state = round0_after_phase2(g, &schedule, trial_seed(seed, trial));
            (0..g.vertex_count()).map(|u| state.palette(u).len()).sum::<usize>() as f64 / n
        })
        .collect();
    let predicted = schedule.params.num_colors() as f64 * shrink();
    Ok(two_sided_report("palette_survival", &per_trial, predicted, 3.0))
}

fn two_sided_report(
    name: &str,
    per_trial: &[f64],
    predicted: f64,
    tolerance_sigmas: f64,
) -> EstimatorReport {
    let trials = per_trial.len();
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let var = per_trial.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let std_err = (var / trials as f64).sqrt();
    EstimatorReport {
        name: name.into(),
        trials,
        empirical_mean: mean,
        predicted,
        tolerance_sigmas,
        pass: (mean - predicted).abs() <= tolerance_sigmas * std_err,
    }
}

/// Empirical round-0 coloring frequency against the one-sided lower bound
/// (1/16)(s_0/d_0) e^{-1/2}, discounted by `slack`.
pub fn estimate_coloring_probability(
    g: &Graph,
    params: ScheduleParams,
    trials: usize,
    seed: u64,
    slack: f64,
) -> Result<EstimatorReport, AnalysisError> {
    check_trials(trials)?;
    let schedule = Schedule::build(params)?;
    let n = g.vertex_count() as f64;
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let state = round0_after_phase2(g, &schedule, trial_seed(seed, trial));
            (n - state.uncolored_count() as f64) / n
        })
        .collect();
    let mean = per_trial.iter().sum::<f64>() / trials as f64;
    let bound = (1.0 / 16.0) * (schedule.s_seq[0] / schedule.d_seq[0]) * shrink();
    Ok(EstimatorReport {
        name: "coloring_probability".into(),
        trials,
        empirical_mean: mean,
        predicted: bound,
        tolerance_sigmas: 0.0,
        pass: mean >= bound * (1.0 - slack),
    })
}

/// Per-(vertex, color) survival frequency of round-0 Phase II.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizationReport {
    pub trials: usize,
    /// e^{-1/2}
    pub predicted: f64,
    pub tolerance_sigmas: f64,
    /// (u, c) cells with free probability >= e^{-1/2}; only these obey the
    /// exact survival law.
    pub checked_cells: usize,
    pub total_cells: usize,
    pub worst_abs_sigmas: f64,
    pub pass: bool,
}

pub fn estimate_equalization(
    g: &Graph,
    params: ScheduleParams,
    trials: usize,
    seed: u64,
) -> Result<EqualizationReport, AnalysisError> {
    check_trials(trials)?;
    let schedule = Schedule::build(params)?;
    let num_colors = schedule.params.num_colors() as usize;
    let n = g.vertex_count();
    let cells = n * num_colors;

    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; cells],
            |mut acc, trial| {
                let state = round0_after_phase2(g, &schedule, trial_seed(seed, trial));
                for u in 0..n {
                    for c in state.palette(u).iter() {
                        acc[u * num_colors + c] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let predicted = shrink();
    let tolerance_sigmas = 3.0;
    let sigma = (predicted * (1.0 - predicted) / trials as f64).sqrt();
    let init = ColoringState::init(g, num_colors);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for u in 0..n {
        for c in 0..num_colors {
            let pr_free =
                crate::engine::exact_free_probability(g, &init, u, c, &schedule);
            if pr_free < predicted {
                continue;
            }
            checked += 1;
            let freq = counts[u * num_colors + c] as f64 / trials as f64;
            let sigmas = (freq - predicted).abs() / sigma;
            worst = worst.max(sigmas);
            if sigmas > tolerance_sigmas {
                pass = false;
            }
        }
    }
    Ok(EqualizationReport {
        trials,
        predicted,
        tolerance_sigmas,
        checked_cells: checked,
        total_cells: cells,
        worst_abs_sigmas: worst,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate, GraphFamilySpec};
    use crate::graph::Graph;

    #[test]
    fn removal_bound_matches_multiset_arithmetic() {
        // {4, 4, 0, 0}: mu = 2; remove one 4 (alpha = 1/4, q = 2)
        let bound = removal_average_bound(2.0, 0.25, 2.0).unwrap();
        assert!((bound - 4.0 / 3.0).abs() < 1e-15);
        let actual = (4.0 + 0.0 + 0.0) / 3.0;
        assert!(actual <= bound + 1e-15);
    }

    #[test]
    fn removal_bound_edges() {
        assert_eq!(removal_average_bound(2.0, 0.0, 2.0).unwrap(), 2.0);
        // alpha -> 1/q drives the bound to 0
        let q = 1.0 + 1e-6;
        let b = removal_average_bound(5.0, 1.0 / q, q).unwrap();
        assert!(b.abs() < 1e-9);
        assert!(removal_average_bound(1.0, 0.6, 2.0).is_err());
        assert!(removal_average_bound(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn addition_average_exact() {
        // {1, 3} has mu = 2; add one point of value q*mu = 4 -> {1,3,4}
        let new = addition_average(2.0, 0.5, 2.0);
        assert!((new - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(addition_average(2.0, 0.0, 7.0), 2.0);
        assert_eq!(addition_average(2.0, 0.3, 1.0), 2.0);
    }

    #[test]
    fn error_compose_algebra() {
        let e2 = error_compose(0.5, 0.1).unwrap();
        assert!((e2 - -0.1).abs() < 1e-15);
        assert!(((1.0 - 0.5) * (1.0 + e2) - (1.0 - 0.5 * 1.1)).abs() < 1e-15);
        assert_eq!(error_compose(0.3, 0.0).unwrap(), 0.0);
        assert!(error_compose(1e-9, 0.2).unwrap().abs() < 1e-9);
        assert!(error_compose(1.0, 0.1).is_err());
    }

    #[test]
    fn base_case_alpha_zero_everywhere() {
        for spec in [
            GraphFamilySpec::cycle(9),
            GraphFamilySpec::complete_bipartite(6),
            GraphFamilySpec::random_triangle_free(40, 0.15, 3),
        ] {
            let g = generate(&spec).unwrap();
            let delta = g.max_degree().max(1) as u64;
            let schedule = Schedule::build(ScheduleParams::new(delta, 2.0)).unwrap();
            let state = ColoringState::init(&g, schedule.params.num_colors() as usize);
            for w in check_assumption(&g, &state, &schedule, 0) {
                assert!(w.holds(), "{w:?}");
                assert_eq!(w.alpha, Some(0.0));
                assert!(w.palette_ok && w.avg_ok && w.max_ok);
            }
        }
    }

    #[test]
    fn shrunken_palette_needs_positive_alpha() {
        // s_u = 0.6 * s_t(1-e_t) admits alpha = 0.4; small d_u keeps the
        // average inequality slack
        let interval = alpha_interval(6.0, 1.0, 10.0, 10.0, 0.0).unwrap();
        assert!((interval.0 - 0.4).abs() < 1e-12);
        assert!(interval.1 >= 0.4);
    }

    #[test]
    fn below_half_palette_has_no_witness() {
        // s_u < (1/2) s_t (1 - e_t) cannot be rescued by any alpha <= 1/2
        assert!(alpha_interval(4.9, 0.0, 10.0, 10.0, 0.0).is_none());
    }

    #[test]
    fn interval_solver_agrees_with_grid_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        let mut feasible = 0;
        for _ in 0..10_000 {
            let s_t = rng.random_range(1.0..50.0);
            let d_t = rng.random_range(1.0..50.0);
            let e_t = rng.random_range(0.0..0.5);
            let s_u = rng.random_range(0.0..s_t * 1.2);
            let d_u = rng.random_range(0.0..d_t * 1.5);
            let by_interval = alpha_interval(s_u, d_u, s_t, d_t, e_t).is_some();
            let by_grid = alpha_feasible_by_grid(s_u, d_u, s_t, d_t, e_t, 0.001);
            // the grid can only under-approximate by the step resolution
            if by_interval != by_grid {
                let (lo, hi) = alpha_interval(s_u, d_u, s_t, d_t, e_t).unwrap();
                assert!(hi - lo < 0.001, "disagreement beyond grid resolution");
            }
            if by_interval {
                feasible += 1;
            }
        }
        assert!(feasible > 1000, "instance distribution degenerate: {feasible}");
    }

    #[test]
    fn edgeless_survival_is_exactly_the_shrink_factor() {
        let g = Graph::build(&[], 40).unwrap();
        let params = ScheduleParams::new(8, 2.0);
        let report = estimate_palette_survival(&g, params, 2000, 11).unwrap();
        // no II.1 removals, II.2 keeps with e^{-1/2} exactly
        assert!((report.predicted - 4.0 * shrink()).abs() < 1e-12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn isolated_vertex_coloring_probability_closed_form() {
        let g = Graph::build(&[], 50).unwrap();
        let params = ScheduleParams::new(16, 2.0); // 8 colors, p0 = 1/64
        let schedule = Schedule::build(params).unwrap();
        let p0 = schedule.activation_p[0];
        let s0 = 8.0;
        let exact = 1.0 - (1.0 - p0 * shrink()).powf(s0);
        let trials = 4000;
        let mut colored = 0usize;
        for trial in 0..trials {
            let state = round0_after_phase2(&g, &schedule, trial_seed(21, trial));
            colored += 50 - state.uncolored_count();
        }
        let freq = colored as f64 / (trials * 50) as f64;
        let sigma = (exact * (1.0 - exact) / (trials * 50) as f64).sqrt();
        assert!((freq - exact).abs() <= 4.0 * sigma, "freq {freq} vs exact {exact}");
    }

    #[test]
    fn survival_estimator_on_k1616() {
        let g = generate(&GraphFamilySpec::complete_bipartite(16)).unwrap();
        let report = estimate_palette_survival(&g, ScheduleParams::new(16, 2.0), 3000, 5).unwrap();
        assert!((report.predicted - 4.852).abs() < 0.01);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn estimator_rejects_tiny_trial_counts() {
        let g = Graph::build(&[], 4).unwrap();
        let err = estimate_palette_survival(&g, ScheduleParams::new(4, 2.0), 10, 0).unwrap_err();
        assert!(matches!(err, AnalysisError::TooFewTrials { .. }));
        let err =
            estimate_coloring_probability(&g, ScheduleParams::new(4, 2.0), 1, 0, 0.05).unwrap_err();
        assert!(matches!(err, AnalysisError::TooFewTrials { .. }));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // removing any alpha-fraction of >= q*mu elements never beats the
            // bound
            #[test]
            fn removal_bound_dominates_actual(
                values in proptest::collection::vec(0.0f64..100.0, 2..100),
                q in 1.01f64..5.0,
                frac in 0.0f64..1.0,
            ) {
                let n = values.len();
                let mu = values.iter().sum::<f64>() / n as f64;
                prop_assume!(mu > 1e-9);
                let mut big: Vec<usize> = (0..n).filter(|&i| values[i] >= q * mu).collect();
                let take = ((frac * big.len() as f64) as usize).min(big.len());
                big.truncate(take);
                prop_assume!(take < n);
                let alpha = take as f64 / n as f64;
                let removed_sum: f64 = big.iter().map(|&i| values[i]).sum();
                let actual = (mu * n as f64 - removed_sum) / (n - take) as f64;
                let bound = removal_average_bound(mu, alpha, q).unwrap();
                prop_assert!(actual <= bound + 1e-9 * mu.abs().max(1.0));
            }

            // exact equality for the addition lemma on explicit multisets
            #[test]
            fn addition_average_matches_multiset(
                values in proptest::collection::vec(0.0f64..100.0, 1..60),
                q in 0.0f64..5.0,
                extra in 1usize..30,
            ) {
                let n = values.len();
                let mu = values.iter().sum::<f64>() / n as f64;
                let alpha = extra as f64 / n as f64;
                let expected = (mu * n as f64 + extra as f64 * q * mu)
                    / (n + extra) as f64;
                let got = addition_average(mu, alpha, q);
                prop_assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            }

            #[test]
            fn error_compose_is_exact(a in 1e-6f64..0.999999, e in -10.0f64..10.0) {
                let e2 = error_compose(a, e).unwrap();
                let lhs = (1.0 - a) * (1.0 + e2);
                let rhs = 1.0 - a * (1.0 + e);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            }
        }
    }
}
