use lemonsim_core::engine::{delivered_ai_quality, switch_probability, true_quality};
use lemonsim_core::policy::scenario;
use lemonsim_core::population::claimed_quality;
use lemonsim_core::{default_params, run_replication, MarketState, PolicyScenario, ScenarioName, SimParams, Strategy};
use proptest::prelude::*;

fn small() -> SimParams {
    SimParams {
        n_firms: 24,
        n_consumers: 300,
        n_periods: 40,
        n_industries: 4,
        ..default_params()
    }
}

fn state(p: SimParams, seed: u64) -> MarketState {
    MarketState::new(p, PolicyScenario::baseline(), seed).unwrap().0
}

#[test]
fn opening_snapshot() {
    let t = run_replication(&default_params(), &PolicyScenario::baseline(), 3).unwrap();
    assert_eq!(t.records.len(), 201);
    let first = &t.records[0];
    assert_eq!(first.period, 0);
    assert_eq!(first.washer_share, 0.10);
    assert_eq!(first.consumer_utility_index, 100.0);
    for (i, r) in t.records.iter().enumerate() {
        assert_eq!(r.period, i);
    }
}

#[test]
fn same_seed_same_trajectory() {
    let p = small();
    for name in ScenarioName::ALL {
        let s = scenario(name);
        let a = run_replication(&p, &s, 99).unwrap();
        let b = run_replication(&p, &s, 99).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"), "{name}");
    }
    let c = run_replication(&p, &PolicyScenario::baseline(), 100).unwrap();
    assert_ne!(run_replication(&p, &PolicyScenario::baseline(), 99).unwrap(), c);
}

#[test]
fn invalid_params_rejected() {
    let p = SimParams { n_consumers: 0, ..small() };
    assert!(run_replication(&p, &PolicyScenario::baseline(), 1).is_err());
}

#[test]
fn claimed_quality_ignores_strategy() {
    let p = default_params();
    assert!((claimed_quality(&p, 0.9) - 0.86).abs() < 1e-12);
}

#[test]
fn washer_without_stock_has_base_quality() {
    let p = default_params();
    let mut s = state(small(), 1);
    let f = &mut s.firms[0];
    f.strategy = Strategy::Washer;
    f.green_stock = vec![0.0; p.payback_period + 1];
    assert_eq!(true_quality(f, 0.0, &p), p.quality_base);
    assert_eq!(delivered_ai_quality(f, &p), p.quality_base);
}

#[test]
fn full_learning_rate_copies_experienced_quality() {
    let p = SimParams { learning_rate: 1.0, signal_noise_sd: 0.0, info_update_frequency: 1000, ..small() };
    let mut s = state(p, 4);
    let bought: Vec<(usize, f64)> = s.consumers.iter().map(|c| (c.last_firm.unwrap(), c.last_quality)).collect();
    s.period = 1;
    s.consumer_learning();
    for (c, (j, q)) in s.consumers.iter().zip(bought) {
        assert_eq!(c.beliefs[j], q);
    }
}

#[test]
fn honest_market_never_flags() {
    let p = SimParams { initial_washer_share: 0.0, revision_prob: 0.0, ..small() };
    let t = run_replication(&p, &PolicyScenario::baseline(), 8).unwrap();
    assert!(t.records.iter().all(|r| r.detected_count == 0 && r.washer_share == 0.0));
}

fn duopoly(temperature: f64) -> MarketState {
    let p = SimParams {
        n_firms: 2,
        n_industries: 1,
        n_consumers: 10_000,
        initial_washer_share: 0.0,
        logit_temperature: temperature,
        ..default_params()
    };
    let mut s = state(p, 12);
    for f in &mut s.firms {
        f.reputation = 0.5;
        f.detected = false;
    }
    for c in &mut s.consumers {
        c.beliefs = vec![0.8, 0.8];
        c.abandoned.clear();
    }
    s
}

#[test]
fn symmetric_duopoly_splits_evenly() {
    let mut s = duopoly(0.05);
    s.clear_market();
    for f in &s.firms {
        assert!((f.market_share - 0.5).abs() < 0.02, "{}", f.market_share);
    }
    assert!((s.firms[0].market_share + s.firms[1].market_share - 1.0).abs() < 1e-12);
}

#[test]
fn cold_logit_picks_argmax() {
    let mut s = duopoly(1e-6);
    for c in &mut s.consumers {
        c.beliefs = vec![0.80, 0.81];
    }
    s.clear_market();
    assert_eq!(s.firms[1].units, 10_000);
}

#[test]
fn detected_firm_charges_discounted_price() {
    let mut s = duopoly(0.05);
    s.firms[0].detected = true;
    s.clear_market();
    let f = &s.firms[0];
    assert!((f.price - 0.9 * f.posted_price).abs() < 1e-12);
    assert_eq!(s.firms[1].price, s.firms[1].posted_price);
    assert!((f.revenue - f.price * f64::from(f.units)).abs() < 1e-9);
}

#[test]
fn idle_firm_earns_nothing() {
    let mut s = duopoly(0.05);
    s.clear_market();
    let f = &mut s.firms[0];
    f.units = 0;
    f.revenue = 0.0;
    let cash = f.cash;
    s.settle_profits();
    assert_eq!(s.firms[0].last_profit, 0.0);
    assert_eq!(s.firms[0].cash, cash);
}

#[test]
fn washing_saves_the_ai_cost_gap() {
    let mut s = duopoly(0.05);
    s.clear_market();
    let template = s.firms[0].clone();
    s.firms[1].strategy = Strategy::Washer;
    for f in &mut s.firms {
        f.price = template.price;
        f.units = template.units;
        f.revenue = template.revenue;
        f.green_intensity = template.green_intensity;
    }
    s.settle_profits();
    let gap = s.firms[1].last_profit - s.firms[0].last_profit;
    assert!((gap - 0.10 * template.revenue).abs() < 1e-9, "{gap}");
}

#[test]
fn even_profits_switch_half_the_time() {
    assert_eq!(switch_probability(0.0, 0.3), 0.5);
    assert!(switch_probability(1.0, 0.3) > 0.5);
    assert!(switch_probability(-1.0, 0.3) < 0.5);
}

#[test]
fn no_opposite_group_no_switching() {
    let p = SimParams { initial_washer_share: 0.0, revision_prob: 1.0, ..small() };
    let mut s = state(p, 2);
    s.revise_strategies();
    assert!(s.firms.iter().all(|f| f.strategy == Strategy::Honest));
}

#[test]
fn green_intensity_rule() {
    let p = SimParams { green_noise: 0.0, ..small() };
    let mut s = state(p, 6);
    for f in &mut s.firms {
        f.strategy = Strategy::Washer;
        f.prev_market_share = f.market_share;
        f.cash = 1.0;
    }
    s.firms[0].cash = -1.0;
    s.choose_investments();
    assert_eq!(s.firms[0].green_intensity, 0.02);
    for f in &s.firms[1..] {
        assert!((f.green_intensity - 0.032).abs() < 1e-12);
    }
}

#[test]
fn optimum_has_no_stale_beliefs() {
    let p = small();
    let mut s = MarketState::new(p, scenario(ScenarioName::Optimum), 5).unwrap().0;
    for _ in 0..10 {
        s.step();
        for c in &s.consumers {
            for (b, f) in c.beliefs.iter().zip(&s.firms) {
                assert_eq!(*b, f.true_quality);
            }
        }
    }
}

/// First period at which two trajectories differ.
fn divergence(a: &[lemonsim_core::PeriodRecord], b: &[lemonsim_core::PeriodRecord]) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| x != y)
}

#[test]
fn scenarios_track_baseline_until_a_hook_fires() {
    let p = small();
    for seed in 0..4 {
        let base = run_replication(&p, &PolicyScenario::baseline(), seed).unwrap().records;
        let first_detection = base.iter().position(|r| r.detected_count > 0).unwrap_or(usize::MAX);

        let reg = scenario(ScenarioName::Regulation);
        let t = run_replication(&p, &reg, seed).unwrap().records;
        let d = divergence(&base, &t).expect("regulation changes the run");
        assert!(d >= reg.regulation.inspection_interval, "regulation diverged at {d}");

        let t = run_replication(&p, &scenario(ScenarioName::Reputation), seed).unwrap().records;
        if let Some(d) = divergence(&base, &t) {
            assert!(d >= first_detection, "reputation diverged at {d}, first detection {first_detection}");
        }

        for name in [ScenarioName::Education, ScenarioName::Combined, ScenarioName::Optimum] {
            let t = run_replication(&p, &scenario(name), seed).unwrap().records;
            assert_eq!(t[0], base[0], "{name}");
        }
    }
}

fn scenario_strategy() -> impl proptest::strategy::Strategy<Value = ScenarioName> {
    prop::sample::select(ScenarioName::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conservation_every_period(seed in any::<u64>(), name in scenario_strategy(), noise in 0.0..0.2f64) {
        let p = SimParams { signal_noise_sd: noise, ..small() };
        let (mut s, first) = MarketState::new(p.clone(), scenario(name), seed).unwrap();
        let mut ledger: Vec<f64> = s.firms.iter().map(|f| f.cash).collect();
        let mut records = vec![first];
        for _ in 0..p.n_periods {
            records.push(s.step());
            for (cash, f) in ledger.iter_mut().zip(&s.firms) {
                *cash += f.last_profit;
                prop_assert_eq!(*cash, f.cash);
            }
            for c in &s.consumers {
                prop_assert!(c.beliefs.iter().all(|b| b.is_finite()));
            }
        }
        for r in &records {
            prop_assert_eq!(r.purchases, p.n_consumers);
            prop_assert!((r.share_sum - 1.0).abs() <= 1e-9);
            prop_assert!((r.consumer_spending - r.firm_revenue).abs() <= 1e-6 * r.firm_revenue.abs().max(1.0));
            prop_assert!((0.0..=1.0).contains(&r.washer_share));
        }
    }

    #[test]
    fn beliefs_stay_in_the_signal_hull(seed in any::<u64>(), name in scenario_strategy()) {
        // with noiseless signals every signal is some period's true quality
        let p = SimParams { signal_noise_sd: 0.0, ..small() };
        let (mut s, _) = MarketState::new(p.clone(), scenario(name), seed).unwrap();
        let mut hull: Vec<(f64, f64)> = s
            .firms
            .iter()
            .map(|f| (f.claimed_quality.min(f.true_quality), f.claimed_quality.max(f.true_quality)))
            .collect();
        for _ in 0..p.n_periods {
            s.step();
            for (h, f) in hull.iter_mut().zip(&s.firms) {
                h.0 = h.0.min(f.true_quality);
                h.1 = h.1.max(f.true_quality);
            }
            for c in &s.consumers {
                for (b, (lo, hi)) in c.beliefs.iter().zip(&hull) {
                    prop_assert!(*b >= lo - 1e-12 && *b <= hi + 1e-12, "{} outside [{}, {}]", b, lo, hi);
                }
            }
        }
    }

    #[test]
    fn steeper_discount_never_raises_detected_revenue(seed in any::<u64>(), low in 0.0..0.3f64, extra in 0.01..0.5f64) {
        let base = SimParams { detection_threshold: 0.05, discovery_scale: 5.0, ..small() };
        let mut a = state(SimParams { price_discount_rate: low, ..base.clone() }, seed);
        let mut b = state(SimParams { price_discount_rate: (low + extra).min(0.95), ..base.clone() }, seed);
        for _ in 0..base.n_periods {
            let ra = a.step();
            let rb = b.step();
            if ra.detected_count > 0 {
                for (fa, fb) in a.firms.iter().zip(&b.firms) {
                    prop_assert_eq!(fa.units, fb.units);
                    if fa.detected {
                        prop_assert!(fb.revenue <= fa.revenue);
                    }
                }
                break;
            }
            prop_assert_eq!(ra, rb);
        }
    }
}
