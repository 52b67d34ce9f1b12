//! Acceptance checks and the replication report.
//!
//! Each check returns an [`Outcome`] rather than panicking, so the same code
//! backs the acceptance test target and the `replicate-tables` command.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::PolicyOverrides;
use crate::engine::{run_replication, MarketState};
use crate::error::SimError;
use crate::exec::{replication_seed, Exec};
use crate::harness::{
    correlation_echo_runs, run_experiment, sensitivity_sweep, standard_adjustments, Experiment, Metric,
    PolicyComparison, SweepResult,
};
use crate::metrics::{ai_tone, panel_peer_indices, peer_washing_index, washing_index, DisclosureRecord, PanelCell};
use crate::params::SimParams;
use crate::policy::{scenario, ScenarioName};
use crate::reference::{self, BASELINE_ROWS, POLICY_ROWS, ROBUSTNESS_ROWS};
use crate::stats::{summarize, summary_from_moments, StatSummary};

/// Batch sizes and seed for a full acceptance pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub reps: usize,
    pub sweep_reps: usize,
    pub correlation_reps: usize,
    pub conservation_reps: usize,
    pub base_seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            reps: 100,
            sweep_reps: 20,
            correlation_reps: 10,
            conservation_reps: 5,
            base_seed: crate::REFERENCE_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    /// Keys of the sub-checks that failed.
    pub failed: Vec<&'static str>,
    pub detail: String,
    pub elapsed: Duration,
    pub time_limit: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}): {} [{:.1} s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Collects named sub-checks into one outcome.
struct Checks {
    parts: Vec<String>,
    failed: Vec<&'static str>,
}

impl Checks {
    fn new() -> Self {
        Self { parts: Vec::new(), failed: Vec::new() }
    }

    fn check(&mut self, key: &'static str, ok: bool, text: String) {
        if !ok {
            self.failed.push(key);
        }
        self.parts.push(if ok { text } else { format!("{text} ✗") });
    }

    fn finish(mut self, id: u8, name: &'static str, elapsed: Duration, time_limit: Duration) -> Outcome {
        let in_time = elapsed <= time_limit;
        if !in_time {
            self.check("runtime", false, format!("runtime over {} s", time_limit.as_secs()));
        }
        Outcome {
            id,
            name,
            pass: self.failed.is_empty(),
            failed: self.failed,
            detail: self.parts.join("; "),
            elapsed,
            time_limit,
        }
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Washing index and tone identities on random records, and peer-index self
/// exclusion under perturbation of the focal firm.
pub fn formula_oracle(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Checks::new();

    let records: Vec<DisclosureRecord> = (0..10_000)
        .map(|_| DisclosureRecord::new(rng.random_range(0..5_000), rng.random_range(0..5_000)))
        .collect();
    let worst = records
        .iter()
        .map(|d| (washing_index(d) - (1.0 + f64::from(d.n_descriptive)).ln()).abs())
        .fold(0.0, f64::max);
    c.check("washing_index", worst <= 1e-12, format!("max |index - ln(1+desc)| = {worst:.1e} over 10000 records"));
    let tone_ok = records.iter().all(|d| (0.0..=1.0).contains(&ai_tone(d)));
    c.check("tone", tone_ok, "tone within [0,1]".into());

    // 60 firms over 4 industries; perturb each focal firm's own index.
    let n = 60;
    let mut idx: HashMap<usize, f64> = (0..n).map(|i| (i, washing_index(&records[i]))).collect();
    let industry: HashMap<usize, usize> = (0..n).map(|i| (i, i % 4)).collect();
    let mut worst_shift = 0.0f64;
    let mut worst_brute = 0.0f64;
    for focal in 0..n {
        let before = peer_washing_index(&idx, &industry, &focal).expect("every industry has peers");
        let others: Vec<f64> =
            (0..n).filter(|&j| j != focal && industry[&j] == industry[&focal]).map(|j| idx[&j]).collect();
        let brute = others.iter().sum::<f64>() / others.len() as f64;
        let saved = idx[&focal];
        idx.insert(focal, saved + rng.random_range(0.5..5.0));
        let after = peer_washing_index(&idx, &industry, &focal).expect("every industry has peers");
        idx.insert(focal, saved);
        worst_shift = worst_shift.max((after - before).abs());
        worst_brute = worst_brute.max((before - brute).abs());
    }
    c.check(
        "peer_exclusion",
        worst_shift <= 1e-12 && worst_brute <= 1e-12,
        format!("peer index unmoved by focal perturbation (max shift {worst_shift:.1e}, max error {worst_brute:.1e})"),
    );

    let cells: Vec<PanelCell> = records[..n]
        .iter()
        .enumerate()
        .map(|(i, d)| PanelCell::scored(i as u32, (i % 4) as u32, 0, *d, 0))
        .collect();
    let mut bumped = cells.clone();
    bumped[0] = PanelCell::scored(0, 0, 0, DisclosureRecord::new(cells[0].disclosure.n_descriptive + 100, 0), 0);
    let (a, b) = (panel_peer_indices(&cells), panel_peer_indices(&bumped));
    let panel_ok = matches!((&a, &b), (Ok(a), Ok(b)) if (a[&(0, 0)] - b[&(0, 0)]).abs() <= 1e-12);
    c.check("panel_exclusion", panel_ok, "panel scoring excludes the focal firm".into());

    c.finish(1, "disclosure formulas", start.elapsed(), secs(1))
}

/// Moments by direct summation, used as the oracle for [`summarize`].
fn brute_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
    (m(3) / m(2).powf(1.5), m(4) / m(2).powi(2))
}

pub fn statistics_oracle() -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let s = summary_from_moments(45.03, 2.87, 500);
    let cv = s.cv.map_or(f64::NAN, |v| 100.0 * v);
    c.check("cv", (cv - 6.4).abs() <= 0.1, format!("cv {cv:.2}% (6.4 ± 0.1)"));
    c.check(
        "ci",
        (s.ci_lo - 44.78).abs() <= 0.01 && (s.ci_hi - 45.28).abs() <= 0.01,
        format!("ci [{:.3}, {:.3}] ([44.78, 45.28] ± 0.01)", s.ci_lo, s.ci_hi),
    );
    let datasets: [&[f64]; 5] = [
        &[1.0, 2.0, 3.0, 4.0, 10.0],
        &[2.5, 2.5, 3.0, 7.0],
        &[-3.0, -1.0, 0.0, 0.5, 8.0, 9.0],
        &[44.1, 45.7, 43.2, 46.9, 45.0, 41.8, 47.3],
        &[0.01, 0.02, 0.02, 0.03, 0.5],
    ];
    let mut worst = 0.0f64;
    for xs in datasets {
        let (skew, kurt) = brute_moments(xs);
        match summarize(xs) {
            Ok(StatSummary { skewness: Some(s3), kurtosis: Some(s4), .. }) => {
                worst = worst.max((s3 - skew).abs()).max((s4 - kurt).abs());
            }
            _ => worst = f64::INFINITY,
        }
    }
    c.check("moments", worst <= 1e-9, format!("skewness/kurtosis vs direct moments, max error {worst:.1e}"));
    c.finish(2, "summary statistics", start.elapsed(), secs(1))
}

pub fn baseline_bands(baseline: &Experiment, elapsed: Duration) -> Outcome {
    let mut c = Checks::new();
    let opening = baseline.trajectories.iter().all(|t| t.records[0].washer_share == 0.10);
    c.check("opening", opening, "period-0 washer share 10.0% in every replication".into());
    let last = baseline.final_mean();
    let w = last.washer_share_pct;
    c.check("washer_band", (40.0..=50.0).contains(&w), format!("endpoint washer share {w:.1}% in [40, 50]"));
    let g = last.green_intensity_pct;
    c.check("green_band", (3.5..=5.0).contains(&g), format!("endpoint green intensity {g:.2}% in [3.5, 5.0]"));
    let h0 = baseline.mean_trajectory[0].honest_intensity_pct.unwrap_or(f64::NAN);
    let (lo, hi) = baseline
        .mean_trajectory
        .iter()
        .filter_map(|r| r.honest_intensity_pct)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let band = (lo >= 0.85 * h0) && (hi <= 1.15 * h0);
    c.check("honest_band", band, format!("honest intensity {lo:.2}..{hi:.2}% within ±15% of {h0:.2}%"));
    let x = last.washer_intensity_pct.unwrap_or(f64::NAN);
    c.check("washer_green", x < 3.5, format!("washer intensity {x:.2}% < 3.5"));
    let u = last.utility_index;
    c.check("utility_band", (76.0..=87.0).contains(&u), format!("utility index {u:.1} in [76, 87]"));
    c.finish(3, "baseline trajectory bands", elapsed, secs(180))
}

const ORDER: [ScenarioName; 5] = [
    ScenarioName::Combined,
    ScenarioName::Reputation,
    ScenarioName::Education,
    ScenarioName::Regulation,
    ScenarioName::Baseline,
];

pub fn policy_orderings(cmp: &PolicyComparison, elapsed: Duration) -> Outcome {
    let mut c = Checks::new();
    let w: Vec<f64> = ORDER.iter().map(|n| cmp.row(*n).washer_share_pct).collect();
    let g: Vec<f64> = ORDER.iter().map(|n| cmp.row(*n).green_intensity_pct).collect();
    let fmt_list = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.p$}")).collect::<Vec<_>>().join(" < ");
    let w_ok = w.windows(2).all(|p| p[1] - p[0] >= 2.0);
    c.check("washer_order", w_ok, format!("washer share {} (gaps ≥ 2 pp)", fmt_list(&w, 1)));
    let g_ok = g.windows(2).all(|p| p[0] > p[1]);
    let g_rev: Vec<f64> = g.iter().rev().copied().collect();
    c.check("green_order", g_ok, format!("green intensity {} reversed", fmt_list(&g_rev, 2)));
    let opt = cmp.row(ScenarioName::Optimum);
    c.check("optimum_share", opt.washer_share_pct < 2.0, format!("optimum washer share {:.2}% < 2", opt.washer_share_pct));
    let u_max = cmp
        .rows
        .iter()
        .filter(|r| r.scenario != ScenarioName::Optimum)
        .map(|r| r.utility_index)
        .fold(f64::NEG_INFINITY, f64::max);
    c.check(
        "optimum_utility",
        opt.utility_index >= u_max,
        format!("optimum utility {:.1} ≥ others (max {u_max:.1})", opt.utility_index),
    );
    c.finish(4, "policy orderings", elapsed, secs(300))
}

pub fn sweep_directions(results: &[SweepResult], elapsed: Duration) -> Outcome {
    let mut c = Checks::new();
    let mut matched = 0;
    for r in results {
        let expected = reference::sweep_row(r.parameter, r.adjusted_value).map(|s| s.direction);
        let ok = expected == Some(r.direction);
        matched += usize::from(ok);
        if !ok {
            c.check(
                r.parameter.as_str(),
                false,
                format!(
                    "{} {}→{}: {} (washer {:.1}→{:.1}, green {:.2}→{:.2})",
                    r.parameter.as_str(),
                    r.baseline_value,
                    r.adjusted_value,
                    r.direction.as_str(),
                    r.reference_washer_share_pct,
                    r.washer_share_pct,
                    r.reference_green_intensity_pct,
                    r.green_intensity_pct
                ),
            );
        }
    }
    let all = results.len() == reference::SWEEP_ROWS.len();
    c.check("directions", all && matched == results.len(), format!("{matched}/{} directions match", reference::SWEEP_ROWS.len()));
    c.finish(5, "sensitivity directions", elapsed, secs(120))
}

pub fn robustness(baseline: &Experiment) -> Outcome {
    let mut c = Checks::new();
    c.check("replications", baseline.n_reps() >= 100, format!("{} replications", baseline.n_reps()));
    for m in Metric::ALL {
        let cv = baseline.summary(m).cv.map_or(f64::NAN, |v| 100.0 * v.abs());
        c.check(m.as_str(), cv < 10.0, format!("cv {} {cv:.1}%", m.as_str()));
    }
    c.finish(6, "Monte Carlo robustness", Duration::ZERO, secs(1))
}

pub fn correlation(r: Result<f64, SimError>, elapsed: Duration) -> Outcome {
    let mut c = Checks::new();
    match r {
        Ok(r) => c.check("sign", r < -0.05, format!("pooled r = {r:.4} (< -0.05)")),
        Err(e) => c.check("sign", false, format!("correlation failed: {e}")),
    }
    c.finish(7, "peer washing vs green output", elapsed, secs(120))
}

/// Replays runs for byte identity, compares thread counts, and steps
/// replications by hand to audit every period's accounting.
pub fn determinism_and_conservation(params: &SimParams, settings: &Settings) -> Outcome {
    let start = Instant::now();
    let mut c = Checks::new();
    let base = scenario(ScenarioName::Baseline);
    let seed = replication_seed(settings.base_seed, 0);
    let same = match (run_replication(params, &base, seed), run_replication(params, &base, seed)) {
        (Ok(a), Ok(b)) => format!("{a:?}") == format!("{b:?}"),
        _ => false,
    };
    c.check("replay", same, "repeated run byte-identical".into());

    let reps = settings.conservation_reps.max(2);
    let threads = match (
        run_experiment(params, &base, reps, settings.base_seed, Exec::SEQUENTIAL),
        run_experiment(params, &base, reps, settings.base_seed, Exec::new(4)),
    ) {
        (Ok(a), Ok(b)) => a.mean_trajectory == b.mean_trajectory && a.summaries == b.summaries,
        _ => false,
    };
    c.check("threads", threads, "1-thread and 4-thread aggregates identical".into());

    let mut violations = Vec::new();
    let mut periods = 0usize;
    for name in [ScenarioName::Baseline, ScenarioName::Combined] {
        for k in 0..reps {
            match audit_replication(params, name, replication_seed(settings.base_seed, k)) {
                Ok(n) => periods += n,
                Err(e) => violations.push(format!("{name} rep {k}: {e}")),
            }
        }
    }
    c.check(
        "accounting",
        violations.is_empty(),
        if violations.is_empty() {
            format!("share sum, spending = revenue and cash ledger hold on {periods} periods")
        } else {
            violations.join(", ")
        },
    );
    c.finish(8, "determinism and conservation", start.elapsed(), secs(60))
}

/// Steps one replication, checking the per-period identities. Returns the
/// number of periods audited.
fn audit_replication(params: &SimParams, name: ScenarioName, seed: u64) -> Result<usize, String> {
    let (mut state, first) = MarketState::new(params.clone(), scenario(name), seed).map_err(|e| e.to_string())?;
    // opening cash is taken after the period-0 settlement
    let mut ledger: Vec<f64> = state.firms.iter().map(|f| f.cash).collect();
    let mut record = first;
    for t in 0..=params.n_periods {
        if t > 0 {
            record = state.step();
            for (l, f) in ledger.iter_mut().zip(&state.firms) {
                *l += f.last_profit;
            }
        }
        if record.purchases != params.n_consumers {
            return Err(format!("period {t}: {} purchases", record.purchases));
        }
        if (record.share_sum - 1.0).abs() > 1e-9 {
            return Err(format!("period {t}: share sum {}", record.share_sum));
        }
        let scale = record.firm_revenue.abs().max(1.0);
        if (record.consumer_spending - record.firm_revenue).abs() > 1e-6 * scale {
            return Err(format!("period {t}: spending {} vs revenue {}", record.consumer_spending, record.firm_revenue));
        }
        if let Some(f) = state.firms.iter().zip(&ledger).find(|(f, l)| f.cash != **l).map(|(f, _)| f) {
            return Err(format!("period {t}: firm {} cash off ledger", f.id));
        }
    }
    Ok(params.n_periods + 1)
}

/// Everything a full replication pass produces.
#[derive(Debug, Clone)]
pub struct Replication {
    pub settings: Settings,
    pub comparison: PolicyComparison,
    pub sweeps: Vec<SweepResult>,
    pub correlation: Option<f64>,
    pub outcomes: Vec<Outcome>,
}

impl Replication {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    pub fn baseline(&self) -> &Experiment {
        self.comparison.experiment(ScenarioName::Baseline)
    }
}

/// Runs every acceptance check at the given batch sizes. `policy` adjusts
/// the intervention scenarios; the baseline has no interventions to adjust.
pub fn replicate(
    params: &SimParams,
    policy: &PolicyOverrides,
    settings: Settings,
    exec: Exec,
) -> Result<Replication, SimError> {
    let mut outcomes = vec![formula_oracle(settings.base_seed), statistics_oracle()];

    let t = Instant::now();
    let baseline = run_experiment(params, &scenario(ScenarioName::Baseline), settings.reps, settings.base_seed, exec)?;
    let baseline_time = t.elapsed();
    outcomes.push(baseline_bands(&baseline, baseline_time));

    let t = Instant::now();
    let mut experiments = vec![baseline];
    for name in ScenarioName::ALL.into_iter().filter(|n| *n != ScenarioName::Baseline) {
        let s = policy.apply(&scenario(name));
        experiments.push(run_experiment(params, &s, settings.reps, settings.base_seed, exec)?);
    }
    let comparison = PolicyComparison::from_experiments(experiments);
    outcomes.push(policy_orderings(&comparison, baseline_time + t.elapsed()));

    let t = Instant::now();
    let sweeps = sensitivity_sweep(params, &standard_adjustments(), settings.sweep_reps, settings.base_seed, exec)?;
    outcomes.push(sweep_directions(&sweeps, t.elapsed()));

    outcomes.push(robustness(comparison.experiment(ScenarioName::Baseline)));

    let t = Instant::now();
    let r = correlation_echo_runs(params, settings.correlation_reps, settings.base_seed, exec);
    let pooled_r = r.as_ref().ok().copied();
    outcomes.push(correlation(r, t.elapsed()));

    outcomes.push(determinism_and_conservation(params, &settings));

    Ok(Replication { settings, comparison, sweeps, correlation: pooled_r, outcomes })
}

fn cell(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "–".to_string(), |v| format!("{v:.prec$}"))
}

/// Markdown report: acceptance verdicts, then simulated values next to the
/// published ones.
pub fn render_report(rep: &Replication) -> String {
    let mut out = String::new();
    let s = &rep.settings;
    let _ = writeln!(out, "# lemonsim replication report\n");
    let _ = writeln!(
        out,
        "Base seed {}; {} replications per scenario, {} per sweep point, {} for the correlation panel.\n",
        s.base_seed, s.reps, s.sweep_reps, s.correlation_reps
    );

    let _ = writeln!(out, "## Acceptance\n\n| # | check | result | detail | runtime (s) |\n|---|---|---|---|---|");
    for o in &rep.outcomes {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.1} (limit {}) |",
            o.id,
            o.name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail.replace('|', "/"),
            o.elapsed.as_secs_f64(),
            o.time_limit.as_secs()
        );
    }
    let verdict = if rep.all_pass() { "all checks pass" } else { "at least one check fails" };
    let _ = writeln!(out, "\nOverall: {verdict}.\n");

    let _ = writeln!(out, "## Baseline trajectory\n");
    let _ = writeln!(
        out,
        "| period | washer % | ref | green % | ref | honest % | ref | washer green % | ref | utility | ref |\n|---|---|---|---|---|---|---|---|---|---|---|"
    );
    let traj = &rep.baseline().mean_trajectory;
    for r in BASELINE_ROWS {
        let Some(m) = traj.get(r.period) else { continue };
        let _ = writeln!(
            out,
            "| {} | {:.1} | {:.1} | {:.2} | {:.2} | {} | {:.2} | {} | {:.2} | {:.1} | {:.1} |",
            r.period,
            m.washer_share_pct,
            r.washer_share_pct,
            m.green_intensity_pct,
            r.green_intensity_pct,
            cell(m.honest_intensity_pct, 2),
            r.honest_intensity_pct,
            cell(m.washer_intensity_pct, 2),
            r.washer_intensity_pct,
            m.utility_index,
            r.utility_index
        );
    }

    let _ = writeln!(out, "\n## Policy scenarios at the final period\n");
    let _ = writeln!(
        out,
        "| scenario | washer % | ref | green % | ref | utility | ref | cost | welfare % | ref welfare % |\n|---|---|---|---|---|---|---|---|---|---|"
    );
    for row in &rep.comparison.rows {
        let r = POLICY_ROWS.iter().find(|p| p.scenario == row.scenario);
        let _ = writeln!(
            out,
            "| {} | {:.1} | {} | {:.2} | {} | {:.1} | {} | {} | {} | {} |",
            row.scenario,
            row.washer_share_pct,
            cell(r.map(|r| r.washer_share_pct), 1),
            row.green_intensity_pct,
            cell(r.map(|r| r.green_intensity_pct), 2),
            row.utility_index,
            cell(r.map(|r| r.utility_index), 1),
            cell(row.implementation_cost, 0),
            cell(row.welfare_computed, 1),
            cell(row.welfare_reference, 1)
        );
    }

    let _ = writeln!(out, "\n## Sensitivity\n");
    let _ = writeln!(
        out,
        "| parameter | from | to | washer % (at from) | washer % | ref | green % (at from) | green % | ref | direction | ref | coefficient | ref |\n|---|---|---|---|---|---|---|---|---|---|---|---|---|"
    );
    for r in &rep.sweeps {
        let p = reference::sweep_row(r.parameter, r.adjusted_value);
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.1} | {:.1} | {} | {:.2} | {:.2} | {} | {} | {} | {:.2} | {} |",
            r.parameter.as_str(),
            r.baseline_value,
            r.adjusted_value,
            r.reference_washer_share_pct,
            r.washer_share_pct,
            cell(p.map(|p| p.washer_share_pct), 1),
            r.reference_green_intensity_pct,
            r.green_intensity_pct,
            cell(p.map(|p| p.green_intensity_pct), 2),
            r.direction.as_str(),
            p.map_or("–", |p| p.direction.as_str()),
            r.sensitivity_coefficient,
            cell(p.map(|p| p.coefficient), 2)
        );
    }

    let _ = writeln!(out, "\n## Robustness of baseline endpoints\n");
    let _ = writeln!(
        out,
        "| indicator | n | mean | sd | cv % | ci95 | skewness | kurtosis | ref mean | ref sd | ref cv % |\n|---|---|---|---|---|---|---|---|---|---|---|"
    );
    for m in Metric::ALL {
        let st = rep.baseline().summary(m);
        let r = ROBUSTNESS_ROWS.iter().find(|r| r.indicator == m.as_str());
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {} | [{:.2}, {:.2}] | {} | {} | {} | {} | {} |",
            m.as_str(),
            st.n,
            st.mean,
            st.sd,
            cell(st.cv.map(|v| 100.0 * v), 1),
            st.ci_lo,
            st.ci_hi,
            cell(st.skewness, 2),
            cell(st.kurtosis, 2),
            cell(r.map(|r| r.mean), 2),
            cell(r.map(|r| r.sd), 2),
            cell(r.map(|r| r.cv_pct), 1)
        );
    }

    let _ = writeln!(
        out,
        "\n## Peer washing and green output\n\nPooled Pearson r: {} (reported on firm data: {}; only the sign is a target).",
        cell(rep.correlation, 4),
        reference::PEER_GREEN_CORRELATION
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_pass() {
        let o = formula_oracle(3);
        assert!(o.pass, "{o}");
        let o = statistics_oracle();
        assert!(o.pass, "{o}");
    }

    #[test]
    fn failed_subcheck_marks_outcome() {
        let mut c = Checks::new();
        c.check("fine", true, "fine".into());
        c.check("broken", false, "broken".into());
        let o = c.finish(9, "demo", Duration::ZERO, secs(1));
        assert!(!o.pass);
        assert_eq!(o.detail, "fine; broken ✗");
        assert_eq!(o.failed, ["broken"]);
        assert!(o.to_string().starts_with("FAIL criterion 9 (demo)"));
    }

    #[test]
    fn slow_check_fails() {
        let o = Checks::new().finish(9, "demo", secs(5), secs(1));
        assert!(!o.pass);
        assert_eq!(o.failed, ["runtime"]);
    }

    #[test]
    fn small_audit_holds() {
        let mut p = crate::default_params();
        p.n_periods = 30;
        p.n_firms = 20;
        p.n_consumers = 200;
        let s = Settings { conservation_reps: 2, ..Settings::default() };
        let o = determinism_and_conservation(&p, &s);
        assert!(o.pass, "{o}");
    }
}
