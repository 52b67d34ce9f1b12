use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use lemonsim_core::acceptance::{self, Settings};
use lemonsim_core::config::{load_config, Config};
use lemonsim_core::harness::{compare_scenarios, sensitivity_sweep, standard_adjustments, Experiment, MeanRecord};
use lemonsim_core::io;
use lemonsim_core::policy::scenario;
use lemonsim_core::{make_scenario, run_experiment, Exec, ScenarioName, REFERENCE_SEED};

/// Agent-based simulator of AI-washing disclosure and policy interventions.
///
/// LEMONSIM_THREADS caps replication parallelism (0 or unset = all cores).
#[derive(Parser)]
#[command(name = "lemonsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes trajectory.csv and summary.csv.
    Run(RunArgs),
    /// Run all six scenarios; writes policy.csv, trajectory.csv and summary.csv.
    ComparePolicies(CommonArgs),
    /// One-at-a-time parameter sweep of the baseline; writes sweep.csv.
    Sweep(CommonArgs),
    /// Full acceptance pass with a markdown report. Exits nonzero if any check fails.
    ReplicateTables(CommonArgs),
    /// Score a disclosure panel CSV with washing and peer washing indices.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// INI config file; absent keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replications per scenario.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed for replication seeds.
    #[arg(long, default_value_t = REFERENCE_SEED)]
    seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "lemonsim-out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "baseline")]
    scenario: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct MetricsArgs {
    /// Panel with firm_id, industry_id, period, n_descriptive, n_substantive, green_output.
    #[arg(long = "in")]
    input: PathBuf,
    /// Scored panel destination.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every acceptance check passed (always true outside
/// replicate-tables).
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => cmd_run(&a).map(|_| true),
        Command::ComparePolicies(a) => cmd_compare(&a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| true),
        Command::ReplicateTables(a) => cmd_replicate(&a),
        Command::Metrics(a) => cmd_metrics(&a).map(|_| true),
    }
}

fn load(a: &CommonArgs) -> Result<Config> {
    match &a.config {
        Some(path) => load_config(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(Config::default()),
    }
}

fn out_dir(a: &CommonArgs) -> Result<&Path> {
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    Ok(&a.out)
}

const CHECKPOINTS: [usize; 9] = [0, 25, 50, 75, 100, 125, 150, 175, 200];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn print_checkpoints(exp: &Experiment) {
    println!("period | washer % | green % | honest % | washer green % | utility");
    let row = |r: &MeanRecord| {
        println!(
            "{:>6} | {:>8.1} | {:>7.2} | {:>8} | {:>14} | {:>7.1}",
            r.period,
            r.washer_share_pct,
            r.green_intensity_pct,
            opt(r.honest_intensity_pct),
            opt(r.washer_intensity_pct),
            r.utility_index
        );
    };
    let traj = &exp.mean_trajectory;
    for &t in &CHECKPOINTS {
        if let Some(r) = traj.get(t) {
            row(r);
        }
    }
    let last = exp.final_mean();
    if !CHECKPOINTS.contains(&last.period) {
        row(last);
    }
    let first = &traj[0];
    let delta = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => format!("{:+.2}", b - a),
        _ => "-".into(),
    };
    println!(
        "change 0→{}: washer {:+.1} pp, green {:+.2} pp, honest {}, washer green {}, utility {:+.1}",
        last.period,
        last.washer_share_pct - first.washer_share_pct,
        last.green_intensity_pct - first.green_intensity_pct,
        delta(first.honest_intensity_pct, last.honest_intensity_pct),
        delta(first.washer_intensity_pct, last.washer_intensity_pct),
        last.utility_index - first.utility_index
    );
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg = load(&a.common)?;
    let s = cfg.policy.apply(&make_scenario(&a.scenario)?);
    let reps = a.common.reps.unwrap_or(cfg.params.n_reps);
    let exp = run_experiment(&cfg.params, &s, reps, a.common.seed, Exec::from_env())?;
    let dir = out_dir(&a.common)?;
    io::write_trajectory(&dir.join("trajectory.csv"), &[&exp])?;
    io::write_summary(&dir.join("summary.csv"), &[&exp])?;
    println!("scenario {} | {} replications | base seed {}", s.name, reps, a.common.seed);
    print_checkpoints(&exp);
    Ok(())
}

fn cmd_compare(a: &CommonArgs) -> Result<()> {
    let cfg = load(a)?;
    let reps = a.reps.unwrap_or(cfg.params.n_reps);
    let scenarios: Vec<_> = ScenarioName::ALL.iter().map(|n| cfg.policy.apply(&scenario(*n))).collect();
    let cmp = compare_scenarios(&cfg.params, &scenarios, reps, a.seed, Exec::from_env())?;
    let dir = out_dir(a)?;
    io::write_policy(&dir.join("policy.csv"), &cmp.rows)?;
    let exps: Vec<&Experiment> = cmp.experiments.iter().collect();
    io::write_trajectory(&dir.join("trajectory.csv"), &exps)?;
    io::write_summary(&dir.join("summary.csv"), &exps)?;
    println!("scenario   | washer % | green % | utility | cost | welfare % | reference welfare %");
    for r in &cmp.rows {
        let cost = r.implementation_cost.map_or_else(|| "-".into(), |c| format!("{c:.0}"));
        let w = |v: Option<f64>| v.map_or_else(|| "-".into(), |v| format!("{v:.1}"));
        println!(
            "{:<10} | {:>8.1} | {:>7.2} | {:>7.1} | {:>4} | {:>9} | {:>8}",
            r.scenario.as_str(),
            r.washer_share_pct,
            r.green_intensity_pct,
            r.utility_index,
            cost,
            w(r.welfare_computed),
            w(r.welfare_reference)
        );
    }
    Ok(())
}

fn cmd_sweep(a: &CommonArgs) -> Result<()> {
    let cfg = load(a)?;
    let reps = a.reps.unwrap_or(Settings::default().sweep_reps);
    let results = sensitivity_sweep(&cfg.params, &standard_adjustments(), reps, a.seed, Exec::from_env())?;
    io::write_sweep(&out_dir(a)?.join("sweep.csv"), &results)?;
    println!("parameter              | from → to    | washer %      | green %       | direction     | coefficient");
    for r in &results {
        println!(
            "{:<22} | {:>5} → {:<4} | {:>5.1} → {:>5.1} | {:>5.2} → {:>5.2} | {:<13} | {:.2}",
            r.parameter.as_str(),
            r.baseline_value,
            r.adjusted_value,
            r.reference_washer_share_pct,
            r.washer_share_pct,
            r.reference_green_intensity_pct,
            r.green_intensity_pct,
            r.direction.as_str(),
            r.sensitivity_coefficient
        );
    }
    Ok(())
}

fn cmd_replicate(a: &CommonArgs) -> Result<bool> {
    let cfg = load(a)?;
    let mut settings = Settings { base_seed: a.seed, ..Settings::default() };
    if let Some(reps) = a.reps {
        settings.reps = reps;
    }
    let rep = acceptance::replicate(&cfg.params, &cfg.policy, settings, Exec::from_env())?;
    let dir = out_dir(a)?;
    io::write_policy(&dir.join("policy.csv"), &rep.comparison.rows)?;
    io::write_sweep(&dir.join("sweep.csv"), &rep.sweeps)?;
    io::write_robustness(&dir.join("robustness.csv"), rep.baseline())?;
    let exps: Vec<&Experiment> = rep.comparison.experiments.iter().collect();
    io::write_summary(&dir.join("summary.csv"), &exps)?;
    io::write_text(&dir.join("report.md"), &acceptance::render_report(&rep))?;
    for o in &rep.outcomes {
        println!("{o}");
    }
    println!("report written to {}", dir.join("report.md").display());
    Ok(rep.all_pass())
}

fn cmd_metrics(a: &MetricsArgs) -> Result<()> {
    let panel = io::read_panel(&a.input)?;
    io::write_scored_panel(&a.out, &panel)?;
    println!("scored {} firm-periods into {}", panel.len(), a.out.display());
    Ok(())
}
