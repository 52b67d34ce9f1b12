//! Monte Carlo experiments: replication batches, policy comparison,
//! one-at-a-time sensitivity sweeps and the peer-washing / green-output
//! correlation on the simulated panel.

use std::fmt;

use crate::engine::{run_replication, run_replication_with_panel, PeriodRecord, Trajectory};
use crate::error::SimError;
use crate::exec::{replication_seed, Exec};
use crate::metrics::{panel_peer_indices, pearson, PanelCell};
use crate::params::SimParams;
use crate::policy::{scenario, welfare_from_endpoints, PolicyScenario, ScenarioName};
use crate::reference;
use crate::stats::{summarize, StatSummary};

/// Endpoint indicators summarized across replications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Percent of firms washing.
    WasherShare,
    /// Market-mean green intensity, percent of revenue.
    GreenIntensity,
    /// Consumer utility index (period 0 = 100).
    UtilityIndex,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::WasherShare, Metric::GreenIntensity, Metric::UtilityIndex];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::WasherShare => "washer_share_pct",
            Metric::GreenIntensity => "green_intensity_pct",
            Metric::UtilityIndex => "consumer_utility_index",
        }
    }

    pub fn of(self, r: &PeriodRecord) -> f64 {
        match self {
            Metric::WasherShare => 100.0 * r.washer_share,
            Metric::GreenIntensity => 100.0 * r.mean_green_intensity_all,
            Metric::UtilityIndex => r.consumer_utility_index,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cross-replication mean of one period, in percent where applicable.
/// Group means average over the replications where the group is non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecord {
    pub period: usize,
    pub washer_share_pct: f64,
    pub green_intensity_pct: f64,
    pub honest_intensity_pct: Option<f64>,
    pub washer_intensity_pct: Option<f64>,
    pub utility_index: f64,
    pub mean_washing_index: f64,
    pub mean_peer_washing_index: f64,
    pub detected_count: f64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub scenario: PolicyScenario,
    pub base_seed: u64,
    pub trajectories: Vec<Trajectory>,
    pub mean_trajectory: Vec<MeanRecord>,
    /// Per metric, endpoint values in replication order.
    pub endpoints: Vec<(Metric, Vec<f64>)>,
    pub summaries: Vec<(Metric, StatSummary)>,
}

impl Experiment {
    pub fn n_reps(&self) -> usize {
        self.trajectories.len()
    }

    pub fn endpoint(&self, m: Metric) -> &[f64] {
        &self.endpoints.iter().find(|(k, _)| *k == m).expect("all metrics recorded").1
    }

    pub fn summary(&self, m: Metric) -> &StatSummary {
        &self.summaries.iter().find(|(k, _)| *k == m).expect("all metrics summarized").1
    }

    pub fn final_mean(&self) -> &MeanRecord {
        self.mean_trajectory.last().expect("at least period 0")
    }
}

/// Runs `n_reps` replications. Replication `k` uses
/// [`replication_seed`]`(base_seed, k)`; results are reduced in index order.
pub fn run_experiment(
    params: &SimParams,
    scenario: &PolicyScenario,
    n_reps: usize,
    base_seed: u64,
    exec: Exec,
) -> Result<Experiment, SimError> {
    if n_reps < 2 {
        return Err(SimError::TooFewReps(n_reps));
    }
    params.validate().map_err(SimError::InvalidParams)?;
    scenario.validate()?;
    let trajectories = exec
        .map(n_reps, |k| run_replication(params, scenario, replication_seed(base_seed, k)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mean_trajectory = mean_trajectory(&trajectories);
    let mut endpoints = Vec::new();
    let mut summaries = Vec::new();
    for m in Metric::ALL {
        let values: Vec<f64> = trajectories.iter().map(|t| m.of(t.last())).collect();
        summaries.push((m, summarize(&values)?));
        endpoints.push((m, values));
    }
    Ok(Experiment {
        scenario: scenario.clone(),
        base_seed,
        trajectories,
        mean_trajectory,
        endpoints,
        summaries,
    })
}

fn mean_trajectory(trajectories: &[Trajectory]) -> Vec<MeanRecord> {
    let periods = trajectories[0].records.len();
    let n = trajectories.len() as f64;
    (0..periods)
        .map(|t| {
            let rows = trajectories.iter().map(|tr| &tr.records[t]);
            let avg = |f: &dyn Fn(&PeriodRecord) -> f64| rows.clone().map(f).sum::<f64>() / n;
            let avg_opt = |f: &dyn Fn(&PeriodRecord) -> Option<f64>| {
                let (s, k) = rows.clone().filter_map(f).fold((0.0, 0usize), |(s, k), v| (s + v, k + 1));
                (k > 0).then(|| s / k as f64)
            };
            MeanRecord {
                period: t,
                washer_share_pct: 100.0 * avg(&|r| r.washer_share),
                green_intensity_pct: 100.0 * avg(&|r| r.mean_green_intensity_all),
                honest_intensity_pct: avg_opt(&|r| r.mean_green_intensity_honest).map(|v| 100.0 * v),
                washer_intensity_pct: avg_opt(&|r| r.mean_green_intensity_washer).map(|v| 100.0 * v),
                utility_index: avg(&|r| r.consumer_utility_index),
                mean_washing_index: avg(&|r| r.mean_washing_index),
                mean_peer_washing_index: avg(&|r| r.mean_peer_washing_index),
                detected_count: avg(&|r| r.detected_count as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRow {
    pub scenario: ScenarioName,
    pub washer_share_pct: f64,
    pub green_intensity_pct: f64,
    pub utility_index: f64,
    pub implementation_cost: Option<f64>,
    /// Recovered share of the baseline-to-optimum utility gap; `None` when
    /// the optimum does not beat the baseline.
    pub welfare_computed: Option<f64>,
    /// The printed welfare column, for side-by-side reporting.
    pub welfare_reference: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PolicyComparison {
    pub rows: Vec<PolicyRow>,
    pub experiments: Vec<Experiment>,
}

impl PolicyComparison {
    pub fn row(&self, name: ScenarioName) -> &PolicyRow {
        self.rows.iter().find(|r| r.scenario == name).expect("all scenarios compared")
    }

    pub fn experiment(&self, name: ScenarioName) -> &Experiment {
        self.experiments.iter().find(|e| e.scenario.name == name).expect("all scenarios run")
    }
}

/// All six canonical scenarios under a shared base seed.
pub fn compare_policies(params: &SimParams, n_reps: usize, base_seed: u64, exec: Exec) -> Result<PolicyComparison, SimError> {
    let scenarios: Vec<PolicyScenario> = ScenarioName::ALL.iter().map(|n| scenario(*n)).collect();
    compare_scenarios(params, &scenarios, n_reps, base_seed, exec)
}

/// Like [`compare_policies`] with caller-supplied parameterizations. The
/// list must contain a baseline and an optimum for the welfare column.
pub fn compare_scenarios(
    params: &SimParams,
    scenarios: &[PolicyScenario],
    n_reps: usize,
    base_seed: u64,
    exec: Exec,
) -> Result<PolicyComparison, SimError> {
    let experiments = scenarios
        .iter()
        .map(|s| run_experiment(params, s, n_reps, base_seed, exec))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolicyComparison::from_experiments(experiments))
}

impl PolicyComparison {
    /// Builds the comparison rows from finished experiments, so a baseline
    /// batch run elsewhere can be reused.
    pub fn from_experiments(experiments: Vec<Experiment>) -> Self {
        let utility = |name| {
            experiments
                .iter()
                .find(|e| e.scenario.name == name)
                .map(|e| e.final_mean().utility_index)
        };
        let base_u = utility(ScenarioName::Baseline);
        let opt_u = utility(ScenarioName::Optimum);
        let rows = experiments
            .iter()
            .map(|e| {
                let last = e.final_mean();
                let welfare_computed = match (base_u, opt_u) {
                    (Some(b), Some(o)) if e.scenario.name != ScenarioName::Optimum || o > b => {
                        welfare_from_endpoints(last.utility_index, b, o).ok()
                    }
                    _ => None,
                };
                PolicyRow {
                    scenario: e.scenario.name,
                    washer_share_pct: last.washer_share_pct,
                    green_intensity_pct: last.green_intensity_pct,
                    utility_index: last.utility_index,
                    implementation_cost: e.scenario.implementation_cost,
                    welfare_computed,
                    welfare_reference: reference::policy_row(e.scenario.name).welfare,
                }
            })
            .collect();
        PolicyComparison { rows, experiments }
    }
}

/// Parameters the one-at-a-time sweep can move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    LearningRate,
    ShareLossRate,
    WashCostSavings,
    PaybackPeriod,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::LearningRate => "learning_rate",
            SweepParam::ShareLossRate => "share_loss_rate",
            SweepParam::WashCostSavings => "wash_cost_savings_rate",
            SweepParam::PaybackPeriod => "payback_period",
        }
    }

    pub fn apply(self, p: &SimParams, value: f64) -> SimParams {
        let mut q = p.clone();
        match self {
            SweepParam::LearningRate => q.learning_rate = value,
            SweepParam::ShareLossRate => q.share_loss_rate = value,
            SweepParam::WashCostSavings => q.wash_cost_savings_rate = Some(value),
            SweepParam::PaybackPeriod => q.payback_period = value.round() as usize,
        }
        q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAdjustment {
    pub parameter: SweepParam,
    pub baseline: f64,
    pub adjusted: f64,
}

/// The eight published one-at-a-time adjustments.
pub fn standard_adjustments() -> Vec<SweepAdjustment> {
    reference::SWEEP_ROWS
        .iter()
        .map(|r| SweepAdjustment { parameter: r.parameter, baseline: r.baseline, adjusted: r.adjusted })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Improvement,
    Deterioration,
}

impl Direction {
    /// Improvement iff washing fell and green intensity rose.
    pub fn classify(ref_washer: f64, ref_green: f64, washer: f64, green: f64) -> Self {
        if washer < ref_washer && green > ref_green {
            Direction::Improvement
        } else {
            Direction::Deterioration
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Improvement => "Improvement",
            Direction::Deterioration => "Deterioration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub baseline_value: f64,
    pub adjusted_value: f64,
    /// Endpoint means of the run at the baseline value.
    pub reference_washer_share_pct: f64,
    pub reference_green_intensity_pct: f64,
    pub washer_share_pct: f64,
    pub green_intensity_pct: f64,
    pub direction: Direction,
    pub param_change_pct: f64,
    pub outcome_change_pct: f64,
    /// `|outcome change %| / |parameter change %|` on endpoint washer share.
    pub sensitivity_coefficient: f64,
}

/// Reruns the baseline with one parameter moved at a time. Each row is
/// compared with a run at that row's own baseline value, which for the
/// cost-savings rows differs from the default washing cost.
pub fn sensitivity_sweep(
    params: &SimParams,
    adjustments: &[SweepAdjustment],
    n_reps: usize,
    base_seed: u64,
    exec: Exec,
) -> Result<Vec<SweepResult>, SimError> {
    let base = scenario(ScenarioName::Baseline);
    let mut cache: Vec<(SimParams, (f64, f64))> = Vec::new();
    let mut endpoint = |p: SimParams| -> Result<(f64, f64), SimError> {
        if let Some((_, v)) = cache.iter().find(|(q, _)| *q == p) {
            return Ok(*v);
        }
        let e = run_experiment(&p, &base, n_reps, base_seed, exec)?;
        let last = e.final_mean();
        let v = (last.washer_share_pct, last.green_intensity_pct);
        cache.push((p, v));
        Ok(v)
    };
    let mut out = Vec::new();
    for adj in adjustments {
        if adj.adjusted == adj.baseline {
            continue;
        }
        let (rw, rg) = endpoint(adj.parameter.apply(params, adj.baseline))?;
        let (w, g) = endpoint(adj.parameter.apply(params, adj.adjusted))?;
        let param_change_pct = 100.0 * (adj.adjusted - adj.baseline) / adj.baseline;
        let outcome_change_pct = 100.0 * (w - rw) / rw;
        out.push(SweepResult {
            parameter: adj.parameter,
            baseline_value: adj.baseline,
            adjusted_value: adj.adjusted,
            reference_washer_share_pct: rw,
            reference_green_intensity_pct: rg,
            washer_share_pct: w,
            green_intensity_pct: g,
            direction: Direction::classify(rw, rg, w, g),
            param_change_pct,
            outcome_change_pct,
            sensitivity_coefficient: outcome_change_pct.abs() / param_change_pct.abs(),
        });
    }
    Ok(out)
}

/// Series pair of the correlation study for one panel: peer washing index
/// and `ln(1 + green output)` per firm-period.
pub fn correlation_series(panel: &[PanelCell]) -> Result<(Vec<f64>, Vec<f64>), SimError> {
    let peers = panel_peer_indices(panel)?;
    let xs = panel.iter().map(|c| peers[&(c.firm_id, c.period)]).collect();
    let ys = panel.iter().map(|c| (c.green_output as f64).ln_1p()).collect();
    Ok((xs, ys))
}

/// Pooled Pearson r between peer washing index and `ln(1 + green output)`.
pub fn correlation_echo(panel: &[PanelCell]) -> Result<f64, SimError> {
    let (xs, ys) = correlation_series(panel)?;
    Ok(pearson(&xs, &ys)?)
}

/// [`correlation_echo`] pooled over `n_reps` baseline replications.
pub fn correlation_echo_runs(params: &SimParams, n_reps: usize, base_seed: u64, exec: Exec) -> Result<f64, SimError> {
    let base = scenario(ScenarioName::Baseline);
    let series = exec
        .map(n_reps, |k| {
            let (_, panel) = run_replication_with_panel(params, &base, replication_seed(base_seed, k))?;
            correlation_series(&panel)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (x, y) in series {
        xs.extend(x);
        ys.extend(y);
    }
    Ok(pearson(&xs, &ys)?)
}
