//! One replication of the market, period by period.
//!
//! A period runs in a fixed order: strategy revision, green investment,
//! disclosure, true-quality refresh, consumer learning, policy hooks, market
//! clearing, settlement, recording. Every random draw comes from the
//! replication's single stream, firms in id order before consumers in id
//! order within each phase, so a (params, scenario, seed) triple fixes the
//! whole trajectory.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Poisson, StandardNormal};

use crate::error::SimError;
use crate::metrics::{washing_index, DisclosureRecord, PanelCell};
use crate::params::SimParams;
use crate::policy::{self, PolicyScenario};
use crate::population::{claimed_quality, green_target, sample_population};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Honest,
    Washer,
}

impl Strategy {
    pub fn opposite(self) -> Self {
        match self {
            Strategy::Honest => Strategy::Washer,
            Strategy::Washer => Strategy::Honest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirmState {
    pub id: usize,
    pub industry_id: usize,
    pub tech: f64,
    pub finance: f64,
    pub reputation: f64,
    pub strategy: Strategy,
    /// Green R&D as a fraction of revenue.
    pub green_intensity: f64,
    /// Green stock per period, oldest first; the last entry is current.
    pub green_stock: Vec<f64>,
    pub cash: f64,
    pub detected: bool,
    /// Set when the firm was flagged during the current period.
    pub newly_detected: bool,
    pub blacklist_remaining: u32,
    pub profit_history: VecDeque<f64>,
    pub market_share: f64,
    pub prev_market_share: f64,
    pub evasion_skill: f64,
    pub disclosure: DisclosureRecord,
    pub claimed_quality: f64,
    pub true_quality: f64,
    /// Posted price before any sanction discount; consumers compare these.
    pub posted_price: f64,
    /// Price actually charged.
    pub price: f64,
    pub units: u32,
    pub revenue: f64,
    pub last_profit: f64,
    pub last_fine: f64,
    /// Caught by an inspection this period; fined at settlement.
    pub fine_pending: bool,
    pub violations: u32,
    pub green_output: u64,
}

impl FirmState {
    pub fn current_stock(&self) -> f64 {
        *self.green_stock.last().expect("green stock history is never empty")
    }

    /// Green stock `lag` periods ago, clamped to the oldest entry.
    pub fn lagged_stock(&self, lag: usize) -> f64 {
        let n = self.green_stock.len();
        self.green_stock[n.saturating_sub(1 + lag)]
    }

    pub fn rolling_profit(&self) -> f64 {
        if self.profit_history.is_empty() {
            0.0
        } else {
            self.profit_history.iter().sum::<f64>() / self.profit_history.len() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsumerState {
    pub id: usize,
    /// Perceived quality of each firm, indexed by firm id.
    pub beliefs: Vec<f64>,
    pub last_firm: Option<usize>,
    /// True quality of the last product bought; source of the experience signal.
    pub last_quality: f64,
    pub premium: bool,
    /// Detected firms this consumer walked away from.
    pub abandoned: Vec<usize>,
}

/// Market aggregates for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: usize,
    pub washer_share: f64,
    pub mean_green_intensity_all: f64,
    pub mean_green_intensity_honest: Option<f64>,
    pub mean_green_intensity_washer: Option<f64>,
    pub consumer_utility_index: f64,
    pub mean_washing_index: f64,
    pub mean_peer_washing_index: f64,
    pub detected_count: usize,
    pub mean_profit_honest: Option<f64>,
    pub mean_profit_washer: Option<f64>,
    pub mean_price: f64,
    pub green_output_total: u64,
    pub purchases: usize,
    pub consumer_spending: f64,
    pub firm_revenue: f64,
    pub share_sum: f64,
    pub total_fines: f64,
}

/// Records for periods `0..=n_periods`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<PeriodRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &PeriodRecord {
        self.records.last().expect("trajectory always holds period 0")
    }
}

/// What the last clearing produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Clearing {
    pub purchases: usize,
    pub spending: f64,
    pub mean_utility: f64,
}

pub struct MarketState {
    pub period: usize,
    pub firms: Vec<FirmState>,
    pub consumers: Vec<ConsumerState>,
    pub scenario: PolicyScenario,
    pub params: SimParams,
    pub rng: ChaCha8Rng,
    /// Mean realized utility at period 0; the utility index divides by it.
    pub baseline_mean_utility: f64,
    pub last_clearing: Clearing,
    industries: Vec<Vec<usize>>,
    scratch: Vec<f64>,
    panel: Option<Vec<PanelCell>>,
}

impl MarketState {
    /// Samples the population and plays period 0: disclosure, one clearing
    /// on prior beliefs, settlement. No learning, revision or policy runs at
    /// period 0, so every scenario shares the same opening snapshot.
    pub fn new(params: SimParams, scenario: PolicyScenario, seed: u64) -> Result<(Self, PeriodRecord), SimError> {
        params.validate().map_err(SimError::InvalidParams)?;
        scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (firms, consumers) = sample_population(&params, &mut rng)?;
        let mut industries = vec![Vec::new(); params.n_industries];
        for f in &firms {
            industries[f.industry_id].push(f.id);
        }
        let n_firms = firms.len();
        let mut state = Self {
            period: 0,
            firms,
            consumers,
            scenario,
            params,
            rng,
            baseline_mean_utility: 0.0,
            last_clearing: Clearing::default(),
            industries,
            scratch: vec![0.0; n_firms],
            panel: None,
        };
        for f in &mut state.firms {
            f.green_output = draw_patents(&mut state.rng, state.params.patent_rate * f.current_stock());
        }
        state.emit_disclosures();
        state.refresh_quality();
        state.clear_market();
        state.baseline_mean_utility = state.last_clearing.mean_utility;
        state.settle_profits();
        let record = state.record();
        Ok((state, record))
    }

    /// Keeps a firm-period panel (period 0 onward) for correlation studies.
    pub fn collect_panel(&mut self) {
        let mut cells = Vec::new();
        self.push_panel(&mut cells);
        self.panel = Some(cells);
    }

    pub fn take_panel(&mut self) -> Vec<PanelCell> {
        self.panel.take().unwrap_or_default()
    }

    pub fn step(&mut self) -> PeriodRecord {
        self.period += 1;
        for f in &mut self.firms {
            f.newly_detected = false;
            f.last_fine = 0.0;
        }
        self.revise_strategies();
        self.choose_investments();
        self.emit_disclosures();
        self.refresh_quality();
        self.consumer_learning();
        self.apply_policy_hooks();
        self.clear_market();
        self.settle_profits();
        let record = self.record();
        if let Some(mut cells) = self.panel.take() {
            self.push_panel(&mut cells);
            self.panel = Some(cells);
        }
        record
    }

    pub fn learning_rate(&self) -> f64 {
        self.scenario.effective_learning_rate(self.params.learning_rate)
    }

    /// Imitation step. Each firm revises with `revision_prob`; a reviser
    /// compares the opposite group's mean rolling profit with its own and
    /// switches with logistic probability.
    pub fn revise_strategies(&mut self) {
        let p = &self.params;
        let rolling: Vec<f64> = self.firms.iter().map(FirmState::rolling_profit).collect();
        let group_mean = |s: Strategy| {
            let (sum, n) = self
                .firms
                .iter()
                .zip(&rolling)
                .filter(|(f, _)| f.strategy == s)
                .fold((0.0, 0usize), |(a, n), (_, r)| (a + r, n + 1));
            (n > 0).then(|| sum / n as f64)
        };
        let honest = group_mean(Strategy::Honest);
        let washer = group_mean(Strategy::Washer);
        let scale = rolling.iter().map(|r| r.abs()).sum::<f64>() / rolling.len() as f64;
        let temperature = (p.imitation_temperature * scale).max(1e-6);
        for (f, own) in self.firms.iter_mut().zip(&rolling) {
            let roll: f64 = self.rng.random();
            if roll >= p.revision_prob {
                continue;
            }
            let other = match f.strategy.opposite() {
                Strategy::Honest => honest,
                Strategy::Washer => washer,
            };
            let Some(other) = other else { continue };
            let switch_prob = switch_probability(other - own, temperature);
            let roll: f64 = self.rng.random();
            if roll < switch_prob {
                f.strategy = f.strategy.opposite();
            }
        }
    }

    /// Sets this period's green intensity, adds it to the depreciated green
    /// stock and draws the period's green patent count.
    pub fn choose_investments(&mut self) {
        let p = &self.params;
        for f in &mut self.firms {
            let noise = if p.green_noise > 0.0 {
                self.rng.random_range(-p.green_noise..=p.green_noise)
            } else {
                0.0
            };
            let share_delta = f.market_share - f.prev_market_share;
            let mut g = (green_target(p, f.strategy) + p.share_feedback_gain * share_delta + noise)
                .clamp(p.green_floor, p.green_cap);
            if f.cash < 0.0 {
                g = p.green_floor;
            }
            f.green_intensity = g;
            let stock = (1.0 - p.green_depreciation) * f.current_stock() + g;
            f.green_stock.push(stock);
            f.green_output = draw_patents(&mut self.rng, p.patent_rate * stock);
        }
    }

    /// Draws each firm's statement counts and sets its claimed quality.
    pub fn emit_disclosures(&mut self) {
        let p = &self.params;
        let honest_beta = Beta::new(p.honest_desc_beta.0, p.honest_desc_beta.1).expect("validated beta");
        let washer_beta = Beta::new(p.washer_desc_beta.0, p.washer_desc_beta.1).expect("validated beta");
        for f in &mut self.firms {
            let (base, slope, beta) = match f.strategy {
                Strategy::Honest => (p.honest_base_statements, p.honest_statement_slope, &honest_beta),
                Strategy::Washer => (p.washer_base_statements, p.washer_statement_slope, &washer_beta),
            };
            let total = base + (slope * f.tech).round() as u32;
            let frac: f64 = beta.sample(&mut self.rng);
            let desc = ((frac * f64::from(total)).round() as u32).min(total);
            f.disclosure = DisclosureRecord::new(desc, total - desc);
            f.claimed_quality = claimed_quality(p, f.tech);
        }
    }

    pub fn refresh_quality(&mut self) {
        let lag = self.params.payback_period;
        let industry_stock: Vec<f64> = self
            .industries
            .iter()
            .map(|ids| ids.iter().map(|&i| self.firms[i].lagged_stock(lag)).sum::<f64>() / ids.len() as f64)
            .collect();
        for f in &mut self.firms {
            f.true_quality = true_quality(f, industry_stock[f.industry_id], &self.params);
        }
    }

    /// Experience updates from last period's purchases, then, on revelation
    /// periods, a public belief correction toward true quality and the
    /// claim-gap detection test. A firm whose AI claim misses its delivered
    /// AI quality by more than the threshold is flagged with probability
    /// `discovery_scale * lambda` (capped at 1), unless it evades. Flags are
    /// raised again at every revelation the firm still fails.
    pub fn consumer_learning(&mut self) {
        let lambda = self.learning_rate();
        let sd = self.params.signal_noise_sd;
        for c in &mut self.consumers {
            if let Some(j) = c.last_firm {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                let signal = c.last_quality + sd * z;
                c.beliefs[j] = (1.0 - lambda) * c.beliefs[j] + lambda * signal;
            }
        }
        if self.scenario.optimum || !self.period.is_multiple_of(self.params.info_update_frequency) {
            return;
        }
        for c in &mut self.consumers {
            for (b, f) in c.beliefs.iter_mut().zip(&self.firms) {
                *b = (1.0 - lambda) * *b + lambda * f.true_quality;
            }
        }
        let threshold = self.params.detection_threshold;
        let discovery = (self.params.discovery_scale * lambda).min(1.0);
        let mut cleared = Vec::new();
        for f in &mut self.firms {
            let gap = f.claimed_quality - delivered_ai_quality(f, &self.params);
            if gap.abs() > threshold {
                let found = discovery >= 1.0 || self.rng.random::<f64>() < discovery;
                let evaded = found && f.evasion_skill > 0.0 && self.rng.random::<f64>() < f.evasion_skill;
                if found && !evaded {
                    f.detected = true;
                    f.newly_detected = true;
                }
            } else if f.detected && f.strategy == Strategy::Honest {
                f.detected = false;
                f.blacklist_remaining = 0;
                cleared.push(f.id);
            }
        }
        if !cleared.is_empty() {
            for c in &mut self.consumers {
                c.abandoned.retain(|j| !cleared.contains(j));
            }
        }
    }

    pub fn apply_policy_hooks(&mut self) {
        policy::apply_regulation(self.period, &mut self.firms, &self.scenario.regulation, &mut self.rng);
        policy::apply_reputation_sanctions(&mut self.firms, &self.scenario.reputation);
        if self.scenario.optimum {
            policy::apply_optimum(&self.firms, &mut self.consumers);
        }
    }

    /// Sets prices, lets every consumer pick one firm by logit choice over
    /// `belief - posted price`, and books units, revenue and market shares.
    /// Sanction discounts are charged at the till: they cut the detected
    /// firm's revenue but do not attract extra buyers.
    pub fn clear_market(&mut self) {
        let p = &self.params;
        let rep = &self.scenario.reputation;
        let list = p.list_price();
        for f in &mut self.firms {
            let mult = policy::price_multiplier(f, p.price_discount_rate, rep);
            f.posted_price = list * (1.0 + p.reputation_price_slope * (f.reputation - 0.5));
            f.price = f.posted_price * mult;
            f.units = 0;
        }
        let excluded_for_premium: Vec<usize> = if rep.active && rep.premium_exclusion {
            self.firms
                .iter()
                .filter(|f| f.detected && f.blacklist_remaining > 0)
                .map(|f| f.id)
                .collect()
        } else {
            Vec::new()
        };

        let inv_t = 1.0 / p.logit_temperature;
        let mut spending = 0.0;
        let mut utility = 0.0;
        for c in &mut self.consumers {
            if let Some(j) = c.last_firm {
                if self.firms[j].detected && !c.abandoned.contains(&j) {
                    let roll: f64 = self.rng.random();
                    if roll < p.share_loss_rate {
                        c.abandoned.push(j);
                    }
                }
            }
            let values = &mut self.scratch;
            for ((v, b), f) in values.iter_mut().zip(&c.beliefs).zip(&self.firms) {
                *v = b - f.posted_price;
            }
            for &j in &c.abandoned {
                values[j] = f64::NEG_INFINITY;
            }
            if c.premium {
                for &j in &excluded_for_premium {
                    values[j] = f64::NEG_INFINITY;
                }
            }
            let mut vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if vmax == f64::NEG_INFINITY {
                // everything excluded: fall back to the full choice set
                for ((v, b), f) in values.iter_mut().zip(&c.beliefs).zip(&self.firms) {
                    *v = b - f.posted_price;
                }
                vmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            }
            let mut total = 0.0;
            for v in values.iter_mut() {
                *v = ((*v - vmax) * inv_t).exp();
                total += *v;
            }
            let roll: f64 = self.rng.random();
            let chosen = pick(values, roll * total);
            let f = &mut self.firms[chosen];
            f.units += 1;
            spending += f.price;
            utility += f.true_quality - f.price + p.reservation_utility;
            c.last_firm = Some(chosen);
            c.last_quality = f.true_quality;
        }
        let n = self.consumers.len() as f64;
        for f in &mut self.firms {
            f.revenue = f.price * f64::from(f.units);
            f.prev_market_share = f.market_share;
            f.market_share = f64::from(f.units) / n;
        }
        self.last_clearing = Clearing {
            purchases: self.consumers.len(),
            spending,
            mean_utility: utility / n,
        };
    }

    /// Books each firm's profit net of AI, green and fine costs.
    pub fn settle_profits(&mut self) {
        let p = &self.params;
        let fine_rate = self.scenario.regulation.fine_rate;
        let wash_cost = p.effective_wash_cost();
        for f in &mut self.firms {
            let ai_rate = match f.strategy {
                Strategy::Honest => p.ai_substantive_cost,
                Strategy::Washer => wash_cost,
            };
            let gross = (f.price - p.unit_cost) * f64::from(f.units) - ai_rate * f.revenue - f.green_intensity * f.revenue;
            let fine = if f.fine_pending { policy::fine_for(gross, fine_rate) } else { 0.0 };
            f.fine_pending = false;
            f.last_fine = fine;
            let profit = gross - fine;
            f.last_profit = profit;
            f.cash += profit;
            f.profit_history.push_back(profit);
            while f.profit_history.len() > p.profit_window {
                f.profit_history.pop_front();
            }
        }
    }

    fn washing_and_peer_indices(&self) -> (Vec<f64>, Vec<f64>) {
        let idx: Vec<f64> = self.firms.iter().map(|f| washing_index(&f.disclosure)).collect();
        let mut peers = vec![0.0; idx.len()];
        for ids in &self.industries {
            let sum: f64 = ids.iter().map(|&i| idx[i]).sum();
            let denom = (ids.len() - 1) as f64;
            for &i in ids {
                peers[i] = (sum - idx[i]) / denom;
            }
        }
        (idx, peers)
    }

    pub fn record(&self) -> PeriodRecord {
        let n = self.firms.len() as f64;
        let mean_of = |s: Strategy, field: fn(&FirmState) -> f64| {
            let (sum, k) = self
                .firms
                .iter()
                .filter(|f| f.strategy == s)
                .fold((0.0, 0usize), |(a, k), f| (a + field(f), k + 1));
            (k > 0).then(|| sum / k as f64)
        };
        let washers = self.firms.iter().filter(|f| f.strategy == Strategy::Washer).count();
        let (idx, peers) = self.washing_and_peer_indices();
        PeriodRecord {
            period: self.period,
            washer_share: washers as f64 / n,
            mean_green_intensity_all: self.firms.iter().map(|f| f.green_intensity).sum::<f64>() / n,
            mean_green_intensity_honest: mean_of(Strategy::Honest, |f| f.green_intensity),
            mean_green_intensity_washer: mean_of(Strategy::Washer, |f| f.green_intensity),
            consumer_utility_index: 100.0 * (self.last_clearing.mean_utility / self.baseline_mean_utility),
            mean_washing_index: idx.iter().sum::<f64>() / n,
            mean_peer_washing_index: peers.iter().sum::<f64>() / n,
            detected_count: self.firms.iter().filter(|f| f.detected).count(),
            mean_profit_honest: mean_of(Strategy::Honest, |f| f.last_profit),
            mean_profit_washer: mean_of(Strategy::Washer, |f| f.last_profit),
            mean_price: self.firms.iter().map(|f| f.price).sum::<f64>() / n,
            green_output_total: self.firms.iter().map(|f| f.green_output).sum(),
            purchases: self.last_clearing.purchases,
            consumer_spending: self.last_clearing.spending,
            firm_revenue: self.firms.iter().map(|f| f.revenue).sum(),
            share_sum: self.firms.iter().map(|f| f.market_share).sum(),
            total_fines: self.firms.iter().map(|f| f.last_fine).sum(),
        }
    }

    fn push_panel(&self, cells: &mut Vec<PanelCell>) {
        for f in &self.firms {
            cells.push(PanelCell::scored(
                f.id as u32,
                f.industry_id as u32,
                self.period as u32,
                f.disclosure,
                f.green_output,
            ));
        }
    }
}

/// Quality actually delivered: base, the AI gain for substantive adopters,
/// the firm's own lagged green stock and the industry's lagged mean stock.
pub fn true_quality(firm: &FirmState, industry_mean_lagged_stock: f64, p: &SimParams) -> f64 {
    let ai = match firm.strategy {
        Strategy::Honest => p.quality_ai_gain * firm.tech,
        Strategy::Washer => 0.0,
    };
    p.quality_base
        + ai
        + p.green_quality_gain * firm.lagged_stock(p.payback_period).min(1.0)
        + p.spillover_coeff * industry_mean_lagged_stock.min(1.0)
}

/// The part of true quality that AI claims speak to: base plus the AI gain
/// actually delivered. Green and spillover gains are never claimed, so the
/// detection test leaves them out.
pub fn delivered_ai_quality(firm: &FirmState, p: &SimParams) -> f64 {
    match firm.strategy {
        Strategy::Honest => p.quality_base + p.quality_ai_gain * firm.tech,
        Strategy::Washer => p.quality_base,
    }
}

/// Logistic switching probability for a profit gap at a given temperature.
pub fn switch_probability(gap: f64, temperature: f64) -> f64 {
    1.0 / (1.0 + (-gap / temperature).exp())
}

/// Index of the bucket containing `target` in the cumulative weights.
/// Zero-weight buckets are never chosen.
fn pick(weights: &[f64], target: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

fn draw_patents(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate > 0.0 && rate.is_finite() {
        Poisson::new(rate).expect("positive rate").sample(rng) as u64
    } else {
        0
    }
}

/// Full trajectory, periods `0..=n_periods`.
pub fn run_replication(params: &SimParams, scenario: &PolicyScenario, seed: u64) -> Result<Trajectory, SimError> {
    let (mut state, first) = MarketState::new(params.clone(), scenario.clone(), seed)?;
    let mut records = Vec::with_capacity(params.n_periods + 1);
    records.push(first);
    for _ in 0..params.n_periods {
        records.push(state.step());
    }
    Ok(Trajectory { records })
}

/// Like [`run_replication`] but also returns the firm-period panel.
pub fn run_replication_with_panel(
    params: &SimParams,
    scenario: &PolicyScenario,
    seed: u64,
) -> Result<(Trajectory, Vec<PanelCell>), SimError> {
    let (mut state, first) = MarketState::new(params.clone(), scenario.clone(), seed)?;
    state.collect_panel();
    let mut records = Vec::with_capacity(params.n_periods + 1);
    records.push(first);
    for _ in 0..params.n_periods {
        records.push(state.step());
    }
    let panel = state.take_panel();
    Ok((Trajectory { records }, panel))
}
