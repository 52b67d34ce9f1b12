//! Initial firm and consumer populations.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use crate::engine::{ConsumerState, FirmState, Strategy};
use crate::error::SimError;
use crate::metrics::DisclosureRecord;
use crate::params::SimParams;

/// Share of consumers flagged as premium ("high-quality") customers.
pub const PREMIUM_FRACTION: f64 = 0.25;

/// Quality a firm advertises: every firm claims the substantive-AI quality
/// its technology would support.
pub fn claimed_quality(p: &SimParams, tech: f64) -> f64 {
    p.quality_base + p.quality_ai_gain * tech
}

pub fn green_target(p: &SimParams, s: Strategy) -> f64 {
    match s {
        Strategy::Honest => p.honest_green_target,
        Strategy::Washer => p.washer_green_target,
    }
}

/// Draws a population. Consumes the stream in a fixed order: endowments
/// (firm by firm: tech, finance, reputation), washer assignment, initial
/// green intensities, premium-consumer assignment.
pub fn sample_population<R: Rng + ?Sized>(
    p: &SimParams,
    rng: &mut R,
) -> Result<(Vec<FirmState>, Vec<ConsumerState>), SimError> {
    p.validate().map_err(SimError::InvalidParams)?;

    let mut firms: Vec<FirmState> = (0..p.n_firms)
        .map(|id| {
            let tech = rng.random_range(p.tech_lo..=p.tech_hi);
            let finance = rng.random_range(p.fin_lo..=p.fin_hi);
            let reputation = rng.random_range(p.rep_lo..=p.rep_hi);
            FirmState::new(id, id % p.n_industries, tech, finance, reputation, p)
        })
        .collect();

    let n_washers = washer_count(p);
    for i in index::sample(rng, p.n_firms, n_washers) {
        firms[i].strategy = Strategy::Washer;
    }

    // green stock starts at the steady state of a fair-share firm
    let initial_history = p.payback_period + 1;
    for f in &mut firms {
        let noise = if p.green_noise > 0.0 {
            rng.random_range(-p.green_noise..=p.green_noise)
        } else {
            0.0
        };
        f.green_intensity = (green_target(p, f.strategy) + noise).clamp(p.green_floor, p.green_cap);
        let stock = if p.green_depreciation > 0.0 {
            f.green_intensity / p.green_depreciation
        } else {
            0.0
        };
        f.green_stock = vec![stock; initial_history];
    }

    let n_premium = (PREMIUM_FRACTION * p.n_consumers as f64).round() as usize;
    let mut premium = vec![false; p.n_consumers];
    for i in index::sample(rng, p.n_consumers, n_premium) {
        premium[i] = true;
    }
    let priors: Vec<f64> = firms.iter().map(|f| claimed_quality(p, f.tech)).collect();
    let consumers = premium
        .into_iter()
        .enumerate()
        .map(|(id, premium)| ConsumerState {
            id,
            beliefs: priors.clone(),
            last_firm: None,
            last_quality: 0.0,
            premium,
            abandoned: Vec::new(),
        })
        .collect();

    Ok((firms, consumers))
}

/// `round(initial_washer_share * n_firms)`.
pub fn washer_count(p: &SimParams) -> usize {
    (p.initial_washer_share * p.n_firms as f64).round() as usize
}

impl FirmState {
    fn new(id: usize, industry_id: usize, tech: f64, finance: f64, reputation: f64, p: &SimParams) -> Self {
        Self {
            id,
            industry_id,
            tech,
            finance,
            reputation,
            strategy: Strategy::Honest,
            green_intensity: p.honest_green_target,
            green_stock: Vec::new(),
            cash: finance * p.cash_endowment,
            detected: false,
            newly_detected: false,
            blacklist_remaining: 0,
            profit_history: VecDeque::with_capacity(p.profit_window + 1),
            market_share: 0.0,
            prev_market_share: 0.0,
            evasion_skill: 0.0,
            disclosure: DisclosureRecord::default(),
            claimed_quality: claimed_quality(p, tech),
            true_quality: p.quality_base,
            posted_price: p.list_price(),
            price: p.list_price(),
            units: 0,
            revenue: 0.0,
            last_profit: 0.0,
            last_fine: 0.0,
            fine_pending: false,
            violations: 0,
            green_output: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn draw(p: &SimParams, seed: u64) -> (Vec<FirmState>, Vec<ConsumerState>) {
        sample_population(p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn twenty_washers_of_two_hundred() {
        for seed in 0..5 {
            let (firms, consumers) = draw(&default_params(), seed);
            assert_eq!(firms.len(), 200);
            assert_eq!(consumers.len(), 1000);
            assert_eq!(firms.iter().filter(|f| f.strategy == crate::engine::Strategy::Washer).count(), 20);
            assert_eq!(consumers.iter().filter(|c| c.premium).count(), 250);
        }
    }

    #[test]
    fn endowments_in_range() {
        let p = default_params();
        let (firms, _) = draw(&p, 11);
        for f in &firms {
            assert!((0.3..=0.9).contains(&f.tech));
            assert!((0.2..=0.8).contains(&f.finance));
            assert!((0.4..=0.8).contains(&f.reputation));
            let target = green_target(&p, f.strategy);
            assert!((f.green_intensity - target).abs() <= p.green_noise + 1e-15);
            assert_eq!(f.green_stock.len(), p.payback_period + 1);
        }
    }

    #[test]
    fn priors_are_claims() {
        let p = default_params();
        let (firms, consumers) = draw(&p, 2);
        for c in &consumers {
            for (b, f) in c.beliefs.iter().zip(&firms) {
                assert_eq!(*b, p.quality_base + p.quality_ai_gain * f.tech);
            }
        }
    }

    #[test]
    fn same_seed_same_population() {
        let p = default_params();
        let (a, ca) = draw(&p, 99);
        let (b, cb) = draw(&p, 99);
        assert_eq!(a, b);
        assert_eq!(ca, cb);
        let (c, _) = draw(&p, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn tech_mean_law_of_large_numbers() {
        let p = SimParams { n_firms: 10_000, ..default_params() };
        let (firms, _) = draw(&p, 5);
        let mean = firms.iter().map(|f| f.tech).sum::<f64>() / firms.len() as f64;
        assert!((mean - 0.6).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn invalid_params_rejected() {
        let p = SimParams { n_firms: 1, ..default_params() };
        assert!(sample_population(&p, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn washer_count_exact(share in 0.0f64..=1.0, n in 2usize..120, seed in any::<u64>()) {
            let p = SimParams { initial_washer_share: share, n_firms: n, n_consumers: 10, ..default_params() };
            let (firms, _) = draw(&p, seed);
            let washers = firms.iter().filter(|f| f.strategy == crate::engine::Strategy::Washer).count();
            prop_assert_eq!(washers, (share * n as f64).round() as usize);
        }
    }
}
