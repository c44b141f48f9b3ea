//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

use trifree::analysis::{
    addition_average, alpha_feasible_by_grid, alpha_interval, check_assumption,
    estimate_coloring_probability, estimate_equalization, removal_average_bound,
};
use trifree::engine::{
    complete_coloring, phase1_assign, phase2_resolve, phase3_cleanup, CleanupRecord,
    ColoringState, CompletionPolicy, RunOptions,
};
use trifree::experiment::{
    feasibility_frontier, run_experiment, ExperimentConfig, FrontierConfig, GraphSource,
};
use trifree::families::{generate, GraphFamily, GraphFamilySpec};
use trifree::schedule::{ratio_step, Schedule, ScheduleParams};
use trifree::{run_rounds, verify_proper, Graph};

fn report(num: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {num}: {name} — {detail}");
    assert!(pass, "criterion {num} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_schedule_exactness() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let step = ratio_step();
    let mut worst_ratio = 0.0f64;
    let mut worst_s = 0.0f64;
    let mut max_t1 = 0usize;
    for _ in 0..100 {
        let log_delta = rng.random_range(10f64.ln()..1e7f64.ln());
        let delta = log_delta.exp().round() as u64;
        let k = rng.random_range(0.2..8.0);
        let sch = Schedule::build(ScheduleParams::new(delta, k)).unwrap();
        let s0 = sch.s_seq[0];
        for t in 0..sch.t1 {
            let ratio = sch.d_seq[t] / sch.s_seq[t];
            let next = sch.d_seq[t + 1] / sch.s_seq[t + 1];
            worst_ratio = worst_ratio.max((next - (ratio - step)).abs());
        }
        for (t, &s) in sch.s_seq.iter().enumerate() {
            let closed = s0 * (-(t as f64) / 2.0).exp();
            worst_s = worst_s.max((s - closed).abs() / closed);
        }
        let bound = (16.0 * 0.5f64.exp() * k).ceil() as usize;
        assert!(sch.t1 <= bound, "t1 {} > bound {bound} at ({delta}, {k})", sch.t1);
        max_t1 = max_t1.max(sch.t1);
    }
    let elapsed = t0.elapsed();
    let pass = worst_ratio <= 1e-12 && worst_s <= 1e-12 && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        "schedule exactness",
        pass,
        &format!(
            "100 samples, ratio-law err {worst_ratio:.2e}, s closed-form rel err {worst_s:.2e}, \
             max t1 {max_t1}, {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_2_equalization_law() {
    let g = generate(&GraphFamilySpec::complete_bipartite(16)).unwrap();
    let params = ScheduleParams::new(16, 2.0); // 8 colors
    let rep = estimate_equalization(&g, params, 100_000, 4).unwrap();
    let pass = rep.pass && rep.checked_cells == rep.total_cells && rep.trials >= 100_000;
    report(
        2,
        "equalization law",
        pass,
        &format!(
            "{} trials, {}/{} cells within {}σ of {:.5}, worst {:.2}σ",
            rep.trials,
            rep.checked_cells,
            rep.total_cells,
            rep.tolerance_sigmas,
            rep.predicted,
            rep.worst_abs_sigmas
        ),
    );
}

#[test]
fn criterion_3_coloring_probability_bound() {
    let g = generate(&GraphFamilySpec::complete_bipartite(16)).unwrap();
    let params = ScheduleParams::new(16, 2.0);
    let rep = estimate_coloring_probability(&g, params, 20_000, 4, 0.05).unwrap();
    report(
        3,
        "coloring-probability bound",
        rep.pass,
        &format!(
            "empirical {:.4} >= bound {:.4} * 0.95 over {} trials",
            rep.empirical_mean, rep.predicted, rep.trials
        ),
    );
}

#[test]
fn criterion_4_averaging_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut equality_cases = 0usize;
    let mut worst_addition = 0.0f64;
    for i in 0..10_000 {
        let (values, q): (Vec<f64>, f64) = if i % 100 == 0 {
            // removal equality case: removed elements sit exactly at q * mu
            let q = rng.random_range(1.1..4.0);
            let n = rng.random_range(4..=100);
            let r = rng.random_range(1..=((n as f64 / q).floor() as usize).max(1).min(n - 1));
            // mean 1 by construction: r values of q, filler (n-rq)/(n-r)
            let filler = (n as f64 - r as f64 * q) / (n - r) as f64;
            assert!(filler >= 0.0 && filler < q);
            let mut v = vec![q; r];
            v.extend(std::iter::repeat(filler).take(n - r));
            (v, q)
        } else {
            let n = rng.random_range(2..=100);
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..100.0)).collect();
            (v, rng.random_range(1.01..5.0))
        };
        let n = values.len();
        let mu = values.iter().sum::<f64>() / n as f64;
        if mu <= 1e-9 {
            continue;
        }
        // remove every element at or above q * mu (guaranteed alpha <= 1/q)
        let removed: Vec<f64> =
            values.iter().copied().filter(|&v| v >= q * mu - 1e-12).collect();
        if removed.is_empty() || removed.len() == n {
            continue;
        }
        let alpha = removed.len() as f64 / n as f64;
        let actual = (mu * n as f64 - removed.iter().sum::<f64>())
            / (n - removed.len()) as f64;
        let bound = removal_average_bound(mu, alpha, q).unwrap_or(f64::INFINITY);
        assert!(actual <= bound + 1e-9 * mu.max(1.0), "removal bound violated at case {i}");
        if (actual - bound).abs() <= 1e-9 * mu.max(1.0) {
            equality_cases += 1;
        }

        // exact addition law on the same multiset
        let extra = rng.random_range(1..=30usize);
        let qa = rng.random_range(0.0..5.0);
        let direct =
            (mu * n as f64 + extra as f64 * qa * mu) / (n + extra) as f64;
        let got = addition_average(mu, extra as f64 / n as f64, qa);
        worst_addition = worst_addition.max((got - direct).abs() / direct.abs().max(1e-30));
    }
    let pass = equality_cases >= 50 && worst_addition <= 1e-12;
    report(
        4,
        "averaging-lemma oracles",
        pass,
        &format!(
            "10000 multisets, removal bound held with {equality_cases} equality cases, \
             addition rel err {worst_addition:.2e}"
        ),
    );
}

#[test]
fn criterion_5_base_case_and_alpha_solver() {
    // base case: alpha = 0 witnesses everywhere at t = 0, for every family
    let specs = [
        GraphFamilySpec::cycle(9),
        GraphFamilySpec::complete_bipartite(8),
        GraphFamilySpec::random_bipartite(120, 0.1, 1),
        GraphFamilySpec::random_triangle_free(120, 0.05, 2),
        GraphFamilySpec {
            family: GraphFamily::RegularHighGirthAttempt,
            n: 60,
            degree_target: 4,
            edge_probability: 0.0,
            seed: 3,
        },
    ];
    let mut base_ok = true;
    for spec in &specs {
        let g = generate(spec).unwrap();
        let delta = g.max_degree().max(2) as u64;
        let schedule = Schedule::build(ScheduleParams::new(delta, 2.0)).unwrap();
        let state = ColoringState::init(&g, schedule.params.num_colors() as usize);
        for w in check_assumption(&g, &state, &schedule, 0) {
            base_ok &= w.alpha == Some(0.0) && w.palette_ok && w.avg_ok && w.max_ok;
        }
    }

    // solver vs 0.001-step grid search on random witness instances
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut grid_ok = true;
    let mut feasible = 0usize;
    for _ in 0..10_000 {
        let s_t = rng.random_range(1.0..50.0);
        let d_t = rng.random_range(1.0..50.0);
        let e_t = rng.random_range(0.0..0.5);
        let s_u = rng.random_range(0.0..s_t * 1.2);
        let d_u = rng.random_range(0.0..d_t * 1.5);
        let interval = alpha_interval(s_u, d_u, s_t, d_t, e_t);
        let by_grid = alpha_feasible_by_grid(s_u, d_u, s_t, d_t, e_t, 0.001);
        match interval {
            Some((lo, hi)) => {
                feasible += 1;
                // the grid may only miss intervals narrower than its step
                grid_ok &= by_grid || hi - lo < 0.001;
            }
            None => grid_ok &= !by_grid,
        }
    }
    let pass = base_ok && grid_ok && feasible > 1000;
    report(
        5,
        "base case and alpha-solver",
        pass,
        &format!(
            "alpha=0 on {} families; solver/grid agree on 10000 instances ({feasible} feasible)",
            specs.len()
        ),
    );
}

struct ZooRun {
    spec: GraphFamilySpec,
    k: f64,
    seed: u64,
    fallback: bool,
}

/// 1000 seeded runs: cycles, K_{Δ,Δ} for Δ in {8,16,32}, and random
/// triangle-free graphs up to n = 5000.
fn zoo_runs() -> Vec<ZooRun> {
    let mut runs = Vec::new();
    let mut push = |spec: GraphFamilySpec, k: f64, seeds: u64| {
        for seed in 0..seeds {
            runs.push(ZooRun { spec: spec.clone(), k, seed, fallback: seed % 2 == 0 });
        }
    };
    for n in [5usize, 9, 17, 33] {
        push(GraphFamilySpec::cycle(n), 0.5, 60); // 4 colors on Δ = 2
    }
    for d in [8usize, 16, 32] {
        push(GraphFamilySpec::complete_bipartite(d), 2.0, 84);
    }
    push(GraphFamilySpec::random_triangle_free(50, 0.1, 7), 2.0, 200);
    push(GraphFamilySpec::random_triangle_free(200, 0.04, 8), 2.0, 200);
    push(GraphFamilySpec::random_triangle_free(1000, 0.01, 9), 2.0, 104);
    push(GraphFamilySpec::random_triangle_free(5000, 0.002, 10), 2.0, 4);
    assert_eq!(runs.len(), 1000);
    runs
}

#[test]
fn criterion_6_end_to_end_propriety() {
    let runs = zoo_runs();
    let total = runs.len();
    // generate each distinct graph once
    let mut graphs: Vec<(GraphFamilySpec, Graph)> = Vec::new();
    for run in &runs {
        if !graphs.iter().any(|(s, _)| *s == run.spec) {
            graphs.push((run.spec.clone(), generate(&run.spec).unwrap()));
        }
    }
    let results: Vec<(bool, bool)> = runs
        .par_iter()
        .map(|run| {
            let g = &graphs.iter().find(|(s, _)| *s == run.spec).unwrap().1;
            let params = ScheduleParams::new(g.max_degree().max(2) as u64, run.k);
            let opts = RunOptions { verify_rounds: true, fail_on_empty_palette: false };
            // verify_rounds re-checks propriety at every round boundary
            let result = match run_rounds(g, params, run.seed, opts) {
                Ok(r) => r,
                Err(_) => return (false, false),
            };
            let policy = if run.fallback {
                CompletionPolicy::greedy_fallback()
            } else {
                CompletionPolicy::retry(10)
            };
            match complete_coloring(g, &result.state, &policy, run.seed) {
                Ok(out) => (true, verify_proper(g, &out.coloring).unwrap_or(false)),
                Err(_) => (true, true), // a reported failure claims nothing
            }
        })
        .collect();
    let rounds_clean = results.iter().all(|r| r.0);
    let successes_proper = results.iter().all(|r| r.1);
    let pass = rounds_clean && successes_proper;
    report(
        6,
        "end-to-end propriety",
        pass,
        &format!("{total} zoo runs, every round boundary proper, every success verified"),
    );
}

fn audit_cleanup(
    g: &Graph,
    state: &ColoringState,
    records: &[CleanupRecord],
) -> Result<(), String> {
    for rec in records {
        if state.is_uncolored(rec.vertex) {
            for c in state.palette(rec.vertex).iter() {
                let deg = state.conflict_degree(g, rec.vertex, c) as f64;
                if deg >= rec.threshold {
                    return Err(format!(
                        "vertex {} keeps color {c} at degree {deg} >= {}",
                        rec.vertex, rec.threshold
                    ));
                }
            }
        }
        let frac = rec.removed as f64 / rec.palette_before as f64;
        if rec.q.is_finite() && rec.q > 1.0 && frac > 1.0 / rec.q + 1e-12 {
            return Err(format!(
                "vertex {} removed fraction {frac} > 1/q = {}",
                rec.vertex,
                1.0 / rec.q
            ));
        }
        if rec.removed > 0 && rec.q <= 1.0 {
            return Err(format!("vertex {} removed colors at q = {} <= 1", rec.vertex, rec.q));
        }
    }
    Ok(())
}

#[test]
fn criterion_7_cleanup_soundness() {
    let specs = [
        (GraphFamilySpec::cycle(17), 0.5, 20u64),
        (GraphFamilySpec::complete_bipartite(16), 2.0, 20),
        (GraphFamilySpec::random_triangle_free(300, 0.02, 12), 2.0, 10),
    ];
    let mut rounds_audited = 0usize;
    for (spec, k, seeds) in &specs {
        let g = generate(spec).unwrap();
        let params = ScheduleParams::new(g.max_degree().max(2) as u64, *k);
        let schedule = Schedule::build(params).unwrap();
        for seed in 0..*seeds {
            let mut state = ColoringState::init(&g, params.num_colors() as usize);
            for t in 0..schedule.t1 {
                let tentative = phase1_assign(&g, &state, &schedule, seed);
                phase2_resolve(&g, &mut state, &tentative, &schedule, seed);
                let (_, records) = phase3_cleanup(&g, &mut state, &schedule);
                if let Err(detail) = audit_cleanup(&g, &state, &records) {
                    report(7, "cleanup soundness", false, &format!("round {t}: {detail}"));
                }
                rounds_audited += 1;
                state.round = t + 1;
            }
        }
    }
    report(
        7,
        "cleanup soundness",
        rounds_audited > 1000,
        &format!("{rounds_audited} rounds audited: no surviving degree at threshold, removed fraction <= 1/q"),
    );
}

#[test]
fn criterion_8_determinism() {
    let mut config = ExperimentConfig::new(GraphSource::Family(
        GraphFamilySpec::random_triangle_free(150, 0.05, 21),
    ));
    config.k = Some(2.0);
    config.trials = 8;
    config.seed = 99;
    config.keep_traces = true;
    config.checks = vec![
        trifree::experiment::CheckKind::Feasibility,
        trifree::experiment::CheckKind::PaletteSurvival,
    ];
    config.estimator_trials = 500;
    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&config).unwrap();
    let reports_equal = a.to_json() == b.to_json();
    let traces_equal = a.trace_jsonl() == b.trace_jsonl();
    let pass = reports_equal && traces_equal && !a.trace_jsonl().is_empty();
    report(
        8,
        "determinism",
        pass,
        &format!(
            "report bodies identical: {reports_equal}; trace bodies identical: {traces_equal} \
             ({} trace bytes)",
            a.trace_jsonl().len()
        ),
    );
}

#[test]
fn criterion_9_feasibility_frontier() {
    let rep = feasibility_frontier(&FrontierConfig::default());
    let threshold = rep.first_nontrivial_delta;
    // sanity: every sampled point at or past the threshold stays feasible
    let stable = match threshold {
        Some(t) => rep.rows.iter().filter(|r| r.delta >= t).all(|r| r.feasible),
        None => false,
    };
    let pass = threshold.is_some() && rep.first_feasible_delta.is_some() && stable;
    report(
        9,
        "feasibility frontier",
        pass,
        &format!(
            "k = ln(Δ)/67 meets s_t1 >= 10ψ and e_t1 <= 0.1 from Δ = {:?}; \
             first schedule with t1 >= 1 feasible at Δ = {:?} (reported output, not a target)",
            rep.first_feasible_delta, threshold
        ),
    );
}
