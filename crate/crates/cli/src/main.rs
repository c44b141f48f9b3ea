//! Command-line experiment runner.
//!
//! Subcommands: `generate` (write instances), `color` (run the iterative
//! coloring), `estimate` (Monte Carlo checks only), `compare` (against greedy
//! and DSATUR), `schedule` (print the d/s/e sequences, feasibility, and the
//! feasibility frontier).
//!
//! Exit codes: 0 success, 1 check/coloring failure, 2 usage error.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use trifree::analysis::{
    estimate_coloring_probability, estimate_equalization, estimate_palette_survival,
};
use trifree::engine::{CompletionPolicy, CompletionStrategy};
use trifree::experiment::{
    compare_baselines, compare_rows_to_csv, feasibility_frontier, run_experiment, CheckKind,
    CompareConfig, ExperimentConfig, FrontierConfig, GraphSource,
};
use trifree::families::{generate, GraphFamily, GraphFamilySpec};
use trifree::schedule::{Schedule, ScheduleParams};
use trifree::Graph;

#[derive(Parser)]
#[command(name = "trifree", version, about = "Iterative semi-random coloring of triangle-free graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph instance and write it in DIMACS .col format.
    Generate(GenerateArgs),
    /// Run seeded coloring trials and report success rates and traces.
    Color(ColorArgs),
    /// Run the Monte Carlo estimators without completing colorings.
    Estimate(EstimateArgs),
    /// Compare against greedy and DSATUR over a set of families.
    Compare(CompareArgs),
    /// Print the deterministic schedule and its feasibility.
    Schedule(ScheduleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cycle,
    CompleteBipartite,
    RandomBipartite,
    RandomTriangleFree,
    RegularHighGirthAttempt,
}

impl From<FamilyArg> for GraphFamily {
    fn from(f: FamilyArg) -> GraphFamily {
        match f {
            FamilyArg::Cycle => GraphFamily::Cycle,
            FamilyArg::CompleteBipartite => GraphFamily::CompleteBipartite,
            FamilyArg::RandomBipartite => GraphFamily::RandomBipartite,
            FamilyArg::RandomTriangleFree => GraphFamily::RandomTriangleFree,
            FamilyArg::RegularHighGirthAttempt => GraphFamily::RegularHighGirthAttempt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Graph selection shared by `color` and `estimate`: a DIMACS file or family
/// flags.
#[derive(Args)]
struct GraphArgs {
    /// DIMACS .col input file.
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long)]
    family: Option<FamilyArg>,
    /// Vertex count for families that take one.
    #[arg(long)]
    n: Option<usize>,
    /// Side degree (complete bipartite) or target degree (high girth).
    #[arg(long)]
    degree: Option<usize>,
    /// Edge probability for random families.
    #[arg(long)]
    p: Option<f64>,
    /// Generator seed (independent of the run seed).
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

impl GraphArgs {
    fn source(&self) -> Result<Option<GraphSource>> {
        if let Some(path) = &self.graph {
            return Ok(Some(GraphSource::DimacsPath(path.clone())));
        }
        let Some(family) = self.family else { return Ok(None) };
        let spec = GraphFamilySpec {
            family: family.into(),
            n: self.n.unwrap_or(0),
            degree_target: self.degree.unwrap_or(0),
            edge_probability: self.p.unwrap_or(0.0),
            seed: self.graph_seed,
        };
        spec.validate()?;
        Ok(Some(GraphSource::Family(spec)))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: FamilyArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ColorArgs {
    /// JSON experiment config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: Option<f64>,
    /// Explicit color budget (exactly one of --k / --colors).
    #[arg(long, conflicts_with = "k")]
    colors: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// single_shot | retry[:attempts] | local_resample[:rounds] | greedy_fallback
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated: assumption,equalization,palette_survival,coloring_probability,feasibility
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    estimator_trials: Option<usize>,
    /// Include per-round traces in the report.
    #[arg(long)]
    keep_traces: bool,
    /// Write the trace stream (JSON lines) here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of: equalization,palette_survival,coloring_probability
    #[arg(long, default_value = "palette_survival,coloring_probability,equalization")]
    checks: String,
    #[arg(long, default_value_t = 0.05)]
    slack: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON CompareConfig; flags override its top-level keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    delta: Option<u64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Scan Δ at k = ln(Δ)/67 and report the feasibility thresholds.
    #[arg(long)]
    frontier: bool,
    #[arg(long, default_value_t = 10)]
    delta_min: u64,
    #[arg(long, default_value_t = 100_000_000)]
    delta_max: u64,
    #[arg(long, default_value_t = 40)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_policy(text: &str) -> Result<CompletionPolicy> {
    let (name, budget) = match text.split_once(':') {
        Some((n, b)) => (n, Some(b.parse::<u32>().context("policy budget must be an integer")?)),
        None => (text, None),
    };
    Ok(match name {
        "single_shot" => CompletionPolicy::single_shot(),
        "retry" => CompletionPolicy::retry(budget.unwrap_or(10)),
        "local_resample" => CompletionPolicy::local_resample(budget.unwrap_or(10)),
        "greedy_fallback" => CompletionPolicy::greedy_fallback(),
        other => bail!("unknown policy {other:?}"),
    })
}

fn parse_checks(text: &str) -> Result<Vec<CheckKind>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            Ok(match s {
                "assumption" => CheckKind::Assumption,
                "equalization" => CheckKind::Equalization,
                "palette_survival" => CheckKind::PaletteSurvival,
                "coloring_probability" => CheckKind::ColoringProbability,
                "feasibility" => CheckKind::Feasibility,
                other => bail!("unknown check {other:?}"),
            })
        })
        .collect()
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(err) = writeln!(stdout, "{text}") {
                // downstream consumer hung up; not our error
                if err.kind() == std::io::ErrorKind::BrokenPipe {
                    return Ok(());
                }
                return Err(err.into());
            }
        }
    }
    Ok(())
}

fn load_graph(source: &GraphSource) -> Result<Graph> {
    Ok(match source {
        GraphSource::Family(spec) => generate(spec)?,
        GraphSource::DimacsPath(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            trifree::dimacs::read_dimacs(&text)?
        }
    })
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode> {
    let spec = GraphFamilySpec {
        family: args.family.into(),
        n: args.n.unwrap_or(0),
        degree_target: args.degree.unwrap_or(0),
        edge_probability: args.p.unwrap_or(0.0),
        seed: args.seed,
    };
    let g = generate(&spec)?;
    emit(&trifree::dimacs::write_dimacs(&g), &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_color(args: &ColorArgs) -> Result<ExitCode> {
    let mut config: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).context("parsing experiment config")?
        }
        None => {
            let source = args
                .graph
                .source()?
                .context("give --graph, --family, or --config")?;
            ExperimentConfig::new(source)
        }
    };
    if args.config.is_some() {
        if let Some(source) = args.graph.source()? {
            config.graph = source;
        }
    }
    if args.k.is_some() {
        config.k = args.k;
        config.num_colors = None;
    }
    if args.colors.is_some() {
        config.num_colors = args.colors;
        config.k = None;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(p) = &args.policy {
        config.completion = parse_policy(p)?;
    }
    if args.psi.is_some() {
        config.psi = args.psi;
    }
    if let Some(b) = args.beta {
        config.beta = b;
    }
    if let Some(c) = &args.checks {
        config.checks = parse_checks(c)?;
    }
    if let Some(t) = args.estimator_trials {
        config.estimator_trials = t;
    }
    config.keep_traces |= args.keep_traces || args.trace_out.is_some();
    if args.out.is_some() {
        config.output = args.out.clone();
    }

    let report = run_experiment(&config)?;
    if let Some(path) = &args.trace_out {
        std::fs::write(path, report.trace_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let body = match args.format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut s = String::from("trial,success,rounds_run,colors_used,completion_attempts\n");
            for t in &report.trials {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    t.trial,
                    t.success,
                    t.rounds_run,
                    t.colors_used.map(|c| c.to_string()).unwrap_or_default(),
                    t.completion_attempts
                ));
            }
            s
        }
    };
    emit(&body, &config.output)?;

    let failed = report.aggregate.success_rate == 0.0 || report.aggregate.checks_failed > 0;
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_estimate(args: &EstimateArgs) -> Result<ExitCode> {
    let source = args.graph.source()?.context("give --graph or --family")?;
    let g = load_graph(&source)?;
    let delta = g.max_degree().max(1) as u64;
    let num_colors = match (args.k, args.colors) {
        (Some(_), Some(_)) | (None, None) => bail!("give exactly one of --k / --colors"),
        (Some(k), None) => ((delta as f64 / k).floor() as usize).max(1),
        (None, Some(c)) => c.max(1),
    };
    let params = ScheduleParams::new(delta, delta as f64 / num_colors as f64);

    let mut body = serde_json::Map::new();
    let mut any_failed = false;
    for check in parse_checks(&args.checks)? {
        match check {
            CheckKind::PaletteSurvival => {
                let rep = estimate_palette_survival(&g, params, args.trials, args.seed)?;
                any_failed |= !rep.pass;
                body.insert("palette_survival".into(), serde_json::to_value(&rep)?);
            }
            CheckKind::ColoringProbability => {
                let rep = estimate_coloring_probability(
                    &g, params, args.trials, args.seed, args.slack,
                )?;
                any_failed |= !rep.pass;
                body.insert("coloring_probability".into(), serde_json::to_value(&rep)?);
            }
            CheckKind::Equalization => {
                let rep = estimate_equalization(&g, params, args.trials, args.seed)?;
                any_failed |= !rep.pass;
                body.insert("equalization".into(), serde_json::to_value(&rep)?);
            }
            other => bail!("check {other:?} is not an estimator; use `color --checks`"),
        }
    }
    emit(&serde_json::to_string_pretty(&body)?, &args.out)?;
    Ok(if any_failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn default_compare_config() -> CompareConfig {
    CompareConfig {
        specs: vec![
            GraphFamilySpec::cycle(33),
            GraphFamilySpec::complete_bipartite(16),
            GraphFamilySpec::random_triangle_free(500, 0.01, 1),
        ],
        k: 2.0,
        trials: 10,
        seed: 0,
        completion: CompletionPolicy {
            strategy: CompletionStrategy::GreedyFallback,
            max_attempts: 1,
            resample_rounds: 0,
        },
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).context("parsing compare config")?
        }
        None => default_compare_config(),
    };
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(p) = &args.policy {
        config.completion = parse_policy(p)?;
    }
    let rows = compare_baselines(&config)?;
    let body = match args.format {
        Format::Csv => compare_rows_to_csv(&rows),
        Format::Json => serde_json::to_string_pretty(&rows)?,
    };
    emit(&body, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_schedule(args: &ScheduleArgs) -> Result<ExitCode> {
    if args.frontier {
        let report = feasibility_frontier(&FrontierConfig {
            delta_min: args.delta_min,
            delta_max: args.delta_max,
            samples: args.samples,
            ..FrontierConfig::default()
        });
        emit(&serde_json::to_string_pretty(&report)?, &args.out)?;
        return Ok(ExitCode::SUCCESS);
    }
    let delta = args.delta.context("give --delta (or --frontier)")?;
    let k = match (args.k, args.colors) {
        (Some(_), Some(_)) | (None, None) => bail!("give exactly one of --k / --colors"),
        (Some(k), None) => k,
        (None, Some(c)) => delta as f64 / c as f64,
    };
    let mut params = ScheduleParams::new(delta, k);
    if let Some(psi) = args.psi {
        params.psi = psi;
    }
    if let Some(beta) = args.beta {
        params.beta = beta;
    }
    let schedule = Schedule::build(params)?;
    let body = serde_json::json!({
        "schedule": schedule,
        "feasibility": schedule.feasibility(),
    });
    emit(&serde_json::to_string_pretty(&body)?, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::Color(args) => cmd_color(args),
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Compare(args) => cmd_compare(args),
        Cmd::Schedule(args) => cmd_schedule(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
