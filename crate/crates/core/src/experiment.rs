//! Seeded, reproducible experiments composing generators, the schedule, the
//! engine, the analysis checks, and the baselines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

use crate::analysis::{
    check_assumption, estimate_coloring_probability, estimate_equalization,
    estimate_palette_survival, AnalysisError, EqualizationReport, EstimatorReport,
};
use crate::baselines::{dsatur_color, greedy_color, verify_proper};
use crate::dimacs::{read_dimacs, ParseError};
use crate::engine::{
    complete_coloring, run_rounds, CompletionPolicy, EngineError, RoundTrace, RunOptions,
};
use crate::families::{generate, GraphFamilySpec, InvalidSpec};
use crate::graph::Graph;
use crate::rng::{stream_u64, PHASE_RUN};
use crate::schedule::{FeasibilityMargins, FeasibilityReport, Schedule, ScheduleParams};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] InvalidSpec),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Family(GraphFamilySpec),
    DimacsPath(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Assumption,
    Equalization,
    PaletteSurvival,
    ColoringProbability,
    Feasibility,
}

fn default_trials() -> usize {
    1
}
fn default_beta() -> f64 {
    1.0
}
fn default_slack() -> f64 {
    0.05
}
fn default_estimator_trials() -> usize {
    1000
}

/// One experiment: a graph, a color budget (exactly one of `k` or
/// `num_colors`), a completion policy, and the enabled checks. Every flag of
/// the CLI mirrors one of these keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub num_colors: Option<usize>,
    #[serde(default)]
    pub completion: CompletionPolicy,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub psi: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_estimator_trials")]
    pub estimator_trials: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Include per-round traces in the report body.
    #[serde(default)]
    pub keep_traces: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSource) -> ExperimentConfig {
        ExperimentConfig {
            graph,
            k: None,
            num_colors: None,
            completion: CompletionPolicy::default(),
            trials: 1,
            seed: 0,
            psi: None,
            beta: 1.0,
            checks: Vec::new(),
            estimator_trials: default_estimator_trials(),
            slack: default_slack(),
            keep_traces: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials < 1 {
            return Err(ExperimentError::Config("trials must be >= 1".into()));
        }
        match (self.k, self.num_colors) {
            (Some(_), Some(_)) => {
                Err(ExperimentError::Config("give exactly one of k / num_colors, got both".into()))
            }
            (None, None) => {
                Err(ExperimentError::Config("give exactly one of k / num_colors".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn load_graph(&self) -> Result<Graph, ExperimentError> {
        match &self.graph {
            GraphSource::Family(spec) => Ok(generate(spec)?),
            GraphSource::DimacsPath(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ExperimentError::Io { path: path.clone(), source })?;
                Ok(read_dimacs(&text)?)
            }
        }
    }

    /// Schedule parameters for `g`: Δ is the true maximum degree (floored at
    /// 1 so edgeless graphs still get a schedule), and the color budget is
    /// forced to at least one color.
    pub fn resolve_params(&self, g: &Graph) -> Result<(ScheduleParams, usize), ExperimentError> {
        let delta = g.max_degree().max(1) as u64;
        let num_colors = match (self.k, self.num_colors) {
            (Some(k), None) => {
                if k <= 0.0 {
                    return Err(ExperimentError::Config("k must be > 0".into()));
                }
                ((delta as f64 / k).floor() as usize).max(1)
            }
            (None, Some(c)) => {
                if c < 1 {
                    return Err(ExperimentError::Config("num_colors must be >= 1".into()));
                }
                c
            }
            _ => unreachable!("validated"),
        };
        let k = delta as f64 / num_colors as f64;
        let mut params = ScheduleParams::new(delta, k);
        if let Some(psi) = self.psi {
            params.psi = psi;
        }
        params.beta = self.beta;
        Ok((params, num_colors))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub delta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub success: bool,
    pub rounds_run: usize,
    pub colors_used: Option<usize>,
    pub completion_attempts: u32,
    pub resample_steps: u32,
    pub invariant_failures: usize,
    pub empty_palette: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<RoundTrace>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub success_rate: f64,
    pub mean_colors_used: Option<f64>,
    pub checks_failed: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub estimators: Vec<EstimatorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equalization: Option<EqualizationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub graph: GraphSummary,
    pub params: ScheduleParams,
    pub num_colors: usize,
    pub t1: usize,
    pub seed: u64,
    pub trials: Vec<TrialResult>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON-lines trace stream: one record per retained round, then one
    /// completion record per trial.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for trial in &self.trials {
            if let Some(traces) = &trial.traces {
                for tr in traces {
                    let mut value = serde_json::to_value(tr).expect("trace serializes");
                    value
                        .as_object_mut()
                        .unwrap()
                        .insert("trial".into(), serde_json::json!(trial.trial));
                    out.push_str(&value.to_string());
                    out.push('\n');
                }
            }
            let final_record = serde_json::json!({
                "trial": trial.trial,
                "completion": {
                    "attempts": trial.completion_attempts,
                    "resample_steps": trial.resample_steps,
                    "success": trial.success,
                    "colors_used": trial.colors_used,
                }
            });
            out.push_str(&final_record.to_string());
            out.push('\n');
        }
        out
    }
}

/// Runs `config.trials` independent seeded runs and aggregates. Deterministic
/// given (config, seed): trials get stream-split seeds and are assembled in
/// trial order regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let g = config.load_graph()?;
    let (params, num_colors) = config.resolve_params(&g)?;
    let schedule = Schedule::build(params).map_err(EngineError::from)?;
    let check_assumption_enabled = config.checks.contains(&CheckKind::Assumption);

    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let run_seed = stream_u64(config.seed, &[PHASE_RUN, trial as u64]);
            run_one_trial(
                &g,
                params,
                num_colors,
                trial,
                run_seed,
                &config.completion,
                check_assumption_enabled,
                config.keep_traces,
            )
        })
        .collect::<Result<_, _>>()?;

    let successes: Vec<&TrialResult> = trials.iter().filter(|t| t.success).collect();
    let success_rate = successes.len() as f64 / trials.len() as f64;
    let mean_colors_used = if successes.is_empty() {
        None
    } else {
        Some(
            successes.iter().filter_map(|t| t.colors_used).sum::<usize>() as f64
                / successes.len() as f64,
        )
    };

    let mut estimators = Vec::new();
    let mut equalization = None;
    let mut feasibility = None;
    for check in &config.checks {
        match check {
            CheckKind::PaletteSurvival => estimators.push(estimate_palette_survival(
                &g,
                params,
                config.estimator_trials,
                config.seed,
            )?),
            CheckKind::ColoringProbability => estimators.push(estimate_coloring_probability(
                &g,
                params,
                config.estimator_trials,
                config.seed,
                config.slack,
            )?),
            CheckKind::Equalization => {
                equalization =
                    Some(estimate_equalization(&g, params, config.estimator_trials, config.seed)?)
            }
            CheckKind::Feasibility => feasibility = Some(schedule.feasibility()),
            CheckKind::Assumption => {}
        }
    }
    let checks_failed = estimators.iter().filter(|e| !e.pass).count()
        + equalization.iter().filter(|e| !e.pass).count();

    Ok(ExperimentReport {
        graph: GraphSummary { vertices: g.vertex_count(), edges: g.edge_count(), delta: g.max_degree() },
        params,
        num_colors,
        t1: schedule.t1,
        seed: config.seed,
        trials,
        aggregate: Aggregate {
            success_rate,
            mean_colors_used,
            checks_failed,
            estimators,
            equalization,
            feasibility,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn run_one_trial(
    g: &Graph,
    params: ScheduleParams,
    num_colors: usize,
    trial: usize,
    run_seed: u64,
    completion: &CompletionPolicy,
    check_assumption_enabled: bool,
    keep_traces: bool,
) -> Result<TrialResult, ExperimentError> {
    let opts = RunOptions { verify_rounds: true, fail_on_empty_palette: false };
    let result = run_rounds(g, params, run_seed, opts)?;
    let invariant_failures = if check_assumption_enabled {
        check_assumption(g, &result.state, &result.schedule, result.state.round)
            .iter()
            .filter(|w| !w.holds())
            .count()
    } else {
        0
    };
    let completion_result = complete_coloring(g, &result.state, completion, run_seed);
    let (success, colors_used, attempts, resample_steps) = match &completion_result {
        Ok(out) => {
            // re-checked at report time, independent of the engine's own check
            debug_assert_eq!(num_colors >= out.coloring.num_colors_used, true);
            let proper = verify_proper(g, &out.coloring).unwrap_or(false);
            (proper, Some(out.coloring.num_colors_used), out.attempts_used, out.resample_steps)
        }
        Err(_) => (false, None, completion.max_attempts, 0),
    };
    Ok(TrialResult {
        trial,
        success,
        rounds_run: result.traces.len(),
        colors_used,
        completion_attempts: attempts,
        resample_steps,
        invariant_failures,
        empty_palette: result.empty_palette.is_some(),
        traces: keep_traces.then_some(result.traces),
    })
}

// ---------------------------------------------------------------------------
// Baseline comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub specs: Vec<GraphFamilySpec>,
    /// Colors given to the nibble runs, as Δ/k.
    pub k: f64,
    pub trials: usize,
    pub seed: u64,
    pub completion: CompletionPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub family: String,
    pub vertices: usize,
    pub edges: usize,
    pub delta: usize,
    pub colors_budget: usize,
    pub nibble_mean_colors: Option<f64>,
    pub nibble_success_rate: f64,
    pub greedy_colors: usize,
    pub dsatur_colors: usize,
    pub nibble_ms: f64,
    pub greedy_ms: f64,
    pub dsatur_ms: f64,
}

pub fn compare_baselines(config: &CompareConfig) -> Result<Vec<CompareRow>, ExperimentError> {
    let mut rows = Vec::with_capacity(config.specs.len());
    for spec in &config.specs {
        let g = generate(spec)?;
        let mut exp = ExperimentConfig::new(GraphSource::Family(spec.clone()));
        exp.k = Some(config.k);
        exp.trials = config.trials;
        exp.seed = config.seed;
        exp.completion = config.completion;

        let t0 = Instant::now();
        let report = run_experiment(&exp)?;
        let nibble_ms = t0.elapsed().as_secs_f64() * 1e3;

        let order: Vec<usize> = (0..g.vertex_count()).collect();
        let t0 = Instant::now();
        let greedy = greedy_color(&g, &order);
        let greedy_ms = t0.elapsed().as_secs_f64() * 1e3;
        assert!(verify_proper(&g, &greedy).unwrap_or(g.vertex_count() == 0) || g.vertex_count() == 0);

        let t0 = Instant::now();
        let dsatur = dsatur_color(&g);
        let dsatur_ms = t0.elapsed().as_secs_f64() * 1e3;
        if g.vertex_count() > 0 {
            assert!(verify_proper(&g, &dsatur).unwrap());
        }

        rows.push(CompareRow {
            family: serde_json::to_value(spec.family)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            delta: g.max_degree(),
            colors_budget: report.num_colors,
            nibble_mean_colors: report.aggregate.mean_colors_used,
            nibble_success_rate: report.aggregate.success_rate,
            greedy_colors: greedy.num_colors_used,
            dsatur_colors: dsatur.num_colors_used,
            nibble_ms,
            greedy_ms,
            dsatur_ms,
        });
    }
    Ok(rows)
}

pub fn compare_rows_to_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(
        "family,vertices,edges,delta,colors_budget,nibble_mean_colors,nibble_success_rate,greedy_colors,dsatur_colors,nibble_ms,greedy_ms,dsatur_ms\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}\n",
            r.family,
            r.vertices,
            r.edges,
            r.delta,
            r.colors_budget,
            r.nibble_mean_colors.map(|c| format!("{c:.2}")).unwrap_or_default(),
            r.nibble_success_rate,
            r.greedy_colors,
            r.dsatur_colors,
            r.nibble_ms,
            r.greedy_ms,
            r.dsatur_ms,
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Feasibility frontier
// ---------------------------------------------------------------------------

/// k(Δ) = ln(Δ)/67, the budget at which Δ/k colors meet the asymptotic
/// guarantee.
pub fn headline_k(delta: u64) -> f64 {
    (delta.max(2) as f64).ln() / 67.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierConfig {
    pub delta_min: u64,
    pub delta_max: u64,
    /// Number of geometric sample points between delta_min and delta_max.
    pub samples: usize,
    pub margins: FeasibilityMargins,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        FrontierConfig {
            delta_min: 10,
            delta_max: 100_000_000,
            samples: 40,
            margins: FeasibilityMargins::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub delta: u64,
    pub k: f64,
    pub num_colors: u64,
    pub t1: usize,
    pub s_t1: f64,
    pub e_t1: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub config: FrontierConfig,
    pub rows: Vec<FrontierRow>,
    /// Smallest sampled Δ whose schedule at k(Δ) meets the margins.
    pub first_feasible_delta: Option<u64>,
    /// Exact smallest Δ where the schedule both runs at least one round
    /// (k(Δ) >= 1/8) and meets the margins; found by bisection.
    pub first_nontrivial_delta: Option<u64>,
}

fn frontier_row(delta: u64, margins: &FeasibilityMargins) -> Option<FrontierRow> {
    let params = ScheduleParams::new(delta, headline_k(delta));
    let schedule = Schedule::build(params).ok()?;
    let rep = schedule.feasibility_with_margins(margins);
    Some(FrontierRow {
        delta,
        k: params.k,
        num_colors: params.num_colors(),
        t1: rep.t1,
        s_t1: rep.s_t1,
        e_t1: rep.e_t1,
        feasible: rep.feasible,
    })
}

/// Scans Δ at k = ln(Δ)/67 and reports where the finite-scale margins start
/// holding. The resulting thresholds are outputs, not pass/fail numbers.
pub fn feasibility_frontier(config: &FrontierConfig) -> FrontierReport {
    assert!(config.samples >= 2 && config.delta_min >= 2 && config.delta_max > config.delta_min);
    let lo = (config.delta_min as f64).ln();
    let hi = (config.delta_max as f64).ln();
    let mut deltas: Vec<u64> = (0..config.samples)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (config.samples - 1) as f64;
            x.exp().round() as u64
        })
        .collect();
    deltas.dedup();
    let rows: Vec<FrontierRow> =
        deltas.iter().filter_map(|&d| frontier_row(d, &config.margins)).collect();
    let first_feasible_delta = rows.iter().find(|r| r.feasible).map(|r| r.delta);

    // nontrivial = at least one round; t1 >= 1 iff ln(delta)/67 >= 1/8, so
    // bisect on that monotone predicate, then confirm feasibility
    let nontrivial =
        |d: u64| frontier_row(d, &config.margins).is_some_and(|r| r.t1 >= 1 && r.feasible);
    let first_nontrivial_delta = if nontrivial(config.delta_max) {
        let (mut lo, mut hi) = (config.delta_min, config.delta_max);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if nontrivial(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    } else {
        None
    };
    FrontierReport { config: *config, rows, first_feasible_delta, first_nontrivial_delta }
}
