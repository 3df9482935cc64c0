use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::{json, Value};

use wardrop_core::dynamics::{
    integrate_ode, simulate_exponential_learning, simulate_sde, Dynamics, Trajectory,
};
use wardrop_core::equilibria::{
    solve_social_optimum, solve_wardrop, verify_wardrop, EquilibriumReport, SolverOptions,
    DEFAULT_TOLERANCE,
};
use wardrop_core::experiments::{
    check_adjoint_lemmas, estimate_hitting_time, estimate_invariant_measure, slow_learning_check,
    stability_by_radius, stability_probability, ExperimentReport, HittingOptions, InvariantOptions,
    Verdict,
};
use wardrop_core::io::{
    builtin, parse_config, write_trajectory, write_trajectory_csv, Parsed, RunManifest,
};
use wardrop_core::net::Flow;
use wardrop_core::{Error, Result};

const EXIT_USAGE: u8 = 1;
const EXIT_VERDICT_FAIL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "wardrop",
    version,
    about = "Wardrop equilibria and replicator learning on congestion networks"
)]
struct Cli {
    /// Master seed; overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Equilibrium tolerance used for verification and classification.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Redundancy, equilibrium and classification of a network.
    Analyze {
        /// JSON configuration file.
        config: PathBuf,
        /// Also compute the social optimum.
        #[arg(long)]
        social: bool,
    },
    /// Integrate the replicator (or BNN) ODE and write a trajectory CSV.
    SimulateOde {
        #[command(flatten)]
        run: RunArgs,
        /// Use the Brown–von Neumann–Nash field instead of the replicator.
        #[arg(long)]
        bnn: bool,
    },
    /// Simulate the stochastic replicator dynamics.
    SimulateSde {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Simulate exponential learning on path scores.
    SimulateExp {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean hitting time of an L1 ball around a strict equilibrium.
    HittingTime {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 0.2)]
        delta: f64,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        /// Cap on each run (default: 20 times the theoretical bound).
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Probability of staying near a strict equilibrium.
    Stability {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Start radii (L1); more than one also checks monotonicity.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        radius: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, default_value_t = 0.95)]
        target: f64,
    },
    /// Occupancy of projective balls around an interior equilibrium.
    InvariantMeasure {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 100.0)]
        burn_in: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1")]
        theta: Vec<f64>,
    },
    /// Sample the adjoint-potential lower bounds along random rays.
    CheckLemmas {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Number of sampled rays.
        #[arg(long, default_value_t = 10_000)]
        rays: usize,
    },
    /// Print a built-in configuration.
    Example {
        /// One of braess, fig1a, fig1b, parallel2, pigou.
        name: String,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration file.
    config: PathBuf,
    /// Initial flow, comma separated path coordinates (default: uniform).
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<f64>>,
    /// Override the horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Override the step.
    #[arg(long)]
    dt: Option<f64>,
    /// Skip solving for an equilibrium; diagnostics relative to it become nan.
    #[arg(long)]
    no_reference: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON configuration file.
    config: PathBuf,
    /// Reference equilibrium (default: solved).
    #[arg(long, value_delimiter = ',')]
    reference: Option<Vec<f64>>,
    /// Initial flow (default: uniform).
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<f64>>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Write per-replicate values to this CSV.
    #[arg(long)]
    samples: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Info
        })
        .parse_env("WARDROP_LOG")
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let doc = json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{doc}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::OutOfRange(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    match &cli.command {
        Command::Example { name } => {
            let config = builtin::by_name(name)?;
            emit_text(cli, &(config.to_json() + "\n"))?;
            Ok(0)
        }
        Command::Analyze { config, social } => {
            let started = Instant::now();
            let parsed = load(cli, config)?;
            let net = &parsed.network;
            let opts = solver_options(tol);
            let eq = solve_wardrop(net, &opts)?;
            let mut doc = json!({
                "network": {
                    "nodes": net.nodes().len(),
                    "edges": net.edge_count(),
                    "users": net.user_count(),
                    "paths": (0..net.path_count()).map(|a| net.path_name(a)).collect::<Vec<_>>(),
                    "redundancy": net.redundancy().redundancy,
                    "redundancy_lower_bound": net.redundancy_lower_bound(),
                    "tangent_dimension": net.redundancy().tangent_dimension,
                },
                "equilibrium": eq,
            });
            if *social {
                let opt = solve_social_optimum(net, &opts)?;
                doc["price_of_anarchy"] = json!(eq.aggregate_delay / opt.aggregate_delay);
                doc["social_optimum"] = serde_json::to_value(&opt)?;
            }
            emit_report(cli, "analyze", &parsed, doc, started)?;
            Ok(0)
        }
        Command::SimulateOde { run, bnn } => {
            let dynamics = if *bnn {
                Dynamics::Bnn
            } else {
                Dynamics::Replicator
            };
            simulate(cli, run, tol, "simulate-ode", |p, x0| {
                integrate_ode(&p.network, x0, &p.sim, dynamics)
            })
        }
        Command::SimulateSde { run } => simulate(cli, run, tol, "simulate-sde", |p, x0| {
            simulate_sde(&p.network, x0, &p.sim, &p.noise)
        }),
        Command::SimulateExp { run } => simulate(cli, run, tol, "simulate-exp", |p, x0| {
            simulate_exponential_learning(&p.network, x0, &p.sim, &p.noise)
        }),
        Command::HittingTime {
            exp,
            delta,
            replicates,
            t_max,
        } => experiment(cli, exp, tol, "hitting-time", |p, q, x0| {
            let opts = HittingOptions {
                replicates: *replicates,
                t_max: *t_max,
                ..Default::default()
            };
            estimate_hitting_time(&p.network, q, *delta, x0, &p.sim, &p.noise, &opts)
        }),
        Command::Stability {
            exp,
            radius,
            replicates,
            target,
        } => experiment(cli, exp, tol, "stability", |p, q, _| {
            if radius.len() == 1 {
                stability_probability(
                    &p.network,
                    q,
                    radius[0],
                    &p.sim,
                    &p.noise,
                    *replicates,
                    *target,
                )
            } else {
                stability_by_radius(
                    &p.network,
                    q,
                    radius,
                    &p.sim,
                    &p.noise,
                    *replicates,
                    *target,
                )
            }
        }),
        Command::InvariantMeasure {
            exp,
            burn_in,
            theta,
        } => experiment(cli, exp, tol, "invariant-measure", |p, q, _| {
            let opts = InvariantOptions {
                burn_in: *burn_in,
                theta_grid: theta.clone(),
                ..Default::default()
            };
            estimate_invariant_measure(&p.network, q, &p.sim, &p.noise, &opts)
        }),
        Command::CheckLemmas { exp, rays } => {
            experiment(cli, exp, tol, "check-lemmas", |p, q, _| {
                check_adjoint_lemmas(&p.network, q, *rays, p.sim.seed)
            })
        }
    }
}

fn solver_options(tol: f64) -> SolverOptions {
    SolverOptions {
        tol: tol.min(1e-10),
        classify_tol: tol,
        ..Default::default()
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Parsed> {
    let mut parsed = parse_config(path)?;
    if let Some(seed) = cli.seed {
        parsed.sim.seed = seed;
    }
    Ok(parsed)
}

fn flow_arg(parsed: &Parsed, values: &Option<Vec<f64>>) -> Result<Flow> {
    match values {
        Some(v) => parsed.network.flow(v.clone()),
        None => Ok(parsed.network.uniform_flow()),
    }
}

fn solved_reference(parsed: &Parsed, tol: f64) -> Result<Flow> {
    let eq: EquilibriumReport = solve_wardrop(&parsed.network, &solver_options(tol))?;
    info!(
        "reference equilibrium {:?} (relative gap {:e})",
        eq.flow.values(),
        eq.relative_gap
    );
    Ok(eq.flow)
}

fn simulate(
    cli: &Cli,
    args: &RunArgs,
    tol: f64,
    command: &str,
    body: impl FnOnce(&Parsed, &Flow) -> Result<Trajectory>,
) -> Result<u8> {
    let started = Instant::now();
    let mut parsed = load(cli, &args.config)?;
    if let Some(h) = args.horizon {
        parsed.sim.horizon = h;
    }
    if let Some(dt) = args.dt {
        parsed.sim.dt = dt;
    }
    if !args.no_reference {
        parsed.sim.reference = Some(solved_reference(&parsed, tol)?);
    }
    let x0 = flow_arg(&parsed, &args.start)?;
    let traj = body(&parsed, &x0)?;
    if !traj.is_complete() {
        warn!("run ended early: {:?}", traj.status);
    }
    match &cli.out {
        Some(path) => {
            let mut manifest = RunManifest::new(command, &parsed.config, Some(parsed.sim.seed));
            manifest.wall_seconds = started.elapsed().as_secs_f64();
            write_trajectory(&traj, path, Some(&manifest))?;
            info!("wrote {} rows to {}", traj.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            write_trajectory_csv(&traj, stdout.lock())?;
        }
    }
    Ok(if traj.is_complete() { 0 } else { 3 })
}

fn experiment(
    cli: &Cli,
    args: &ExperimentArgs,
    tol: f64,
    command: &str,
    body: impl FnOnce(&Parsed, &Flow, &Flow) -> Result<ExperimentReport>,
) -> Result<u8> {
    let started = Instant::now();
    let mut parsed = load(cli, &args.config)?;
    if let Some(h) = args.horizon {
        parsed.sim.horizon = h;
    }
    if let Some(dt) = args.dt {
        parsed.sim.dt = dt;
    }
    let q = match &args.reference {
        Some(v) => {
            let q = parsed.network.flow(v.clone())?;
            let check = verify_wardrop(&parsed.network, &q, tol)?;
            if !check.pass {
                return Err(Error::NotWardrop(format!("{:?}", check.violations)));
            }
            q
        }
        None => solved_reference(&parsed, tol)?,
    };
    let x0 = flow_arg(&parsed, &args.start)?;
    if let Ok(slow) = slow_learning_check(&parsed.network, &q, &parsed.sim.lambda, &parsed.noise) {
        info!(
            "slow-learning: {} vs threshold {} ({})",
            slow.value,
            slow.threshold,
            if slow.pass { "met" } else { "unmet" }
        );
    }
    let report = body(&parsed, &q, &x0)?;
    if let Some(path) = &args.samples {
        report.write_samples_csv(path)?;
    }
    for c in &report.checks {
        info!(
            "{} {}: {} {} {} (slack {})",
            c.verdict.as_str(),
            c.name,
            c.empirical,
            c.relation,
            c.bound,
            c.slack
        );
    }
    let verdict = report.verdict;
    emit_report(
        cli,
        command,
        &parsed,
        serde_json::to_value(&report)?,
        started,
    )?;
    Ok(match verdict {
        Verdict::Fail => EXIT_VERDICT_FAIL,
        Verdict::Inconclusive => {
            warn!("verdict inconclusive");
            0
        }
        Verdict::Pass => 0,
    })
}

/// Writes `{"manifest": ..., "report": ...}` to `--out` or stdout.
fn emit_report(
    cli: &Cli,
    command: &str,
    parsed: &Parsed,
    report: Value,
    started: Instant,
) -> Result<()> {
    let mut manifest = RunManifest::new(command, &parsed.config, Some(parsed.sim.seed));
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    let doc = json!({ "manifest": manifest, "report": report });
    emit_text(cli, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn emit_text(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::Cli;

    #[test]
    fn arguments_are_consistent() {
        Cli::command().debug_assert();
    }
}
