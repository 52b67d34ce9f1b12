//! Policy scenarios and the per-period intervention hooks.
//!
//! Hooks run inside the engine step after consumer learning and before
//! market clearing. Every hook consumes random draws only when it fires, so a
//! scenario's trajectory matches the baseline's until its first intervention.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::engine::{ConsumerState, FirmState, Strategy};
use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioName {
    Baseline,
    Regulation,
    Education,
    Reputation,
    Combined,
    Optimum,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::Baseline,
        ScenarioName::Regulation,
        ScenarioName::Education,
        ScenarioName::Reputation,
        ScenarioName::Combined,
        ScenarioName::Optimum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Baseline => "baseline",
            ScenarioName::Regulation => "regulation",
            ScenarioName::Education => "education",
            ScenarioName::Reputation => "reputation",
            ScenarioName::Combined => "combined",
            ScenarioName::Optimum => "optimum",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| SimError::UnknownScenario(s.to_string()))
    }
}

/// Periodic inspections with fines and growing evasion.
#[derive(Debug, Clone, PartialEq)]
pub struct Regulation {
    pub active: bool,
    pub inspection_interval: usize,
    /// Fraction of the current-period profit levied on a caught firm.
    pub fine_rate: f64,
    pub detection_prob: f64,
    /// Added to a caught firm's evasion skill.
    pub evasion_growth: f64,
    pub evasion_cap: f64,
}

/// Consumer education scales the learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Education {
    pub active: bool,
    pub learning_rate_multiplier: f64,
}

/// Blacklist sanctions on newly detected firms.
#[derive(Debug, Clone, PartialEq)]
pub struct Reputation {
    pub active: bool,
    pub blacklist_duration: u32,
    /// Price discount while blacklisted, replacing the ordinary detection discount.
    pub sanction_discount: f64,
    /// Premium consumers drop blacklisted firms from their choice set.
    pub premium_exclusion: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyScenario {
    pub name: ScenarioName,
    pub regulation: Regulation,
    pub education: Education,
    pub reputation: Reputation,
    /// Full information: beliefs equal true quality every period.
    pub optimum: bool,
    /// Exogenous cost index (regulation = 100); `None` where no cost is reported.
    pub implementation_cost: Option<f64>,
}

impl PolicyScenario {
    pub fn baseline() -> Self {
        Self {
            name: ScenarioName::Baseline,
            regulation: Regulation {
                active: false,
                inspection_interval: 10,
                fine_rate: 0.5,
                detection_prob: 0.6,
                evasion_growth: 0.05,
                evasion_cap: 0.9,
            },
            education: Education { active: false, learning_rate_multiplier: 1.5 },
            reputation: Reputation {
                active: false,
                blacklist_duration: 5,
                sanction_discount: 0.20,
                premium_exclusion: true,
            },
            optimum: false,
            implementation_cost: Some(0.0),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidScenario(format!("{}: {m}", self.name)));
        let r = &self.regulation;
        let any_single = r.active || self.education.active || self.reputation.active;
        if self.optimum && any_single {
            return bad("optimum excludes every other intervention");
        }
        let all = r.active && self.education.active && self.reputation.active;
        if (self.name == ScenarioName::Combined) != all {
            return bad("combined iff regulation, education and reputation are all active");
        }
        if (self.name == ScenarioName::Optimum) != self.optimum {
            return bad("optimum flag must match the scenario name");
        }
        if r.inspection_interval == 0 {
            return bad("inspection_interval must be ≥ 1");
        }
        for (k, v) in [
            ("fine_rate", r.fine_rate),
            ("detection_prob", r.detection_prob),
            ("evasion_growth", r.evasion_growth),
            ("evasion_cap", r.evasion_cap),
            ("sanction_discount", self.reputation.sanction_discount),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{k} must lie in [0,1], got {v}"));
            }
        }
        if r.evasion_cap >= 1.0 {
            return bad("evasion_cap must be < 1");
        }
        if !(self.education.learning_rate_multiplier >= 0.0) {
            return bad("learning_rate_multiplier must be ≥ 0");
        }
        Ok(())
    }

    /// Learning rate after the education multiplier, capped at 1.
    pub fn effective_learning_rate(&self, base: f64) -> f64 {
        if self.education.active {
            (base * self.education.learning_rate_multiplier).min(1.0)
        } else {
            base
        }
    }
}

/// Canonical parameterization of a named scenario.
pub fn make_scenario(name: &str) -> Result<PolicyScenario, SimError> {
    let name: ScenarioName = name.parse()?;
    Ok(scenario(name))
}

pub fn scenario(name: ScenarioName) -> PolicyScenario {
    let mut s = PolicyScenario::baseline();
    s.name = name;
    match name {
        ScenarioName::Baseline => {}
        ScenarioName::Regulation => {
            s.regulation.active = true;
            s.implementation_cost = Some(100.0);
        }
        ScenarioName::Education => {
            s.education.active = true;
            s.implementation_cost = Some(65.0);
        }
        ScenarioName::Reputation => {
            s.reputation.active = true;
            s.implementation_cost = Some(80.0);
        }
        ScenarioName::Combined => {
            s.regulation.active = true;
            s.education.active = true;
            s.reputation.active = true;
            s.implementation_cost = Some(140.0);
        }
        ScenarioName::Optimum => {
            s.optimum = true;
            s.implementation_cost = None;
        }
    }
    s
}

/// Runs an inspection when `period` is a multiple of the interval.
///
/// Every washer rolls once; a caught washer is flagged, marked for a fine at
/// settlement and gets better at evading the next inspection. Returns the
/// number of firms caught.
pub fn apply_regulation<R: Rng + ?Sized>(
    period: usize,
    firms: &mut [FirmState],
    reg: &Regulation,
    rng: &mut R,
) -> usize {
    if !reg.active || !period.is_multiple_of(reg.inspection_interval) {
        return 0;
    }
    let mut caught = 0;
    for f in firms.iter_mut().filter(|f| f.strategy == Strategy::Washer) {
        let p = reg.detection_prob * (1.0 - f.evasion_skill);
        let roll: f64 = rng.random();
        if roll < p {
            caught += 1;
            f.fine_pending = true;
            f.violations += 1;
            f.detected = true;
            f.newly_detected = true;
            f.evasion_skill = (f.evasion_skill + reg.evasion_growth).min(reg.evasion_cap);
        }
    }
    caught
}

/// Fine owed on a period's pre-fine profit.
pub fn fine_for(profit: f64, fine_rate: f64) -> f64 {
    fine_rate * profit.max(0.0)
}

/// Advances blacklist timers and blacklists firms detected this period.
pub fn apply_reputation_sanctions(firms: &mut [FirmState], rep: &Reputation) {
    if !rep.active {
        return;
    }
    for f in firms.iter_mut() {
        if f.newly_detected {
            f.blacklist_remaining = rep.blacklist_duration;
        } else if f.blacklist_remaining > 0 {
            f.blacklist_remaining -= 1;
        }
    }
}

/// Overwrites every belief with the firm's current true quality.
pub fn apply_optimum(firms: &[FirmState], consumers: &mut [ConsumerState]) {
    for c in consumers.iter_mut() {
        for (b, f) in c.beliefs.iter_mut().zip(firms) {
            *b = f.true_quality;
        }
    }
}

/// Price multiplier implied by a firm's detection and blacklist state.
pub fn price_multiplier(firm: &FirmState, discount_rate: f64, rep: &Reputation) -> f64 {
    if !firm.detected {
        1.0
    } else if rep.active && firm.blacklist_remaining > 0 {
        1.0 - rep.sanction_discount
    } else {
        1.0 - discount_rate
    }
}

/// Share of the baseline-to-optimum utility gap a scenario recovers, in percent.
///
/// Uses the final consumer utility index of each trajectory.
pub fn welfare_improvement(scenario: &[f64], baseline: &[f64], optimum: &[f64]) -> Result<f64, SimError> {
    if scenario.len() != baseline.len() || baseline.len() != optimum.len() || scenario.is_empty() {
        return Err(SimError::LengthMismatch);
    }
    let last = |v: &[f64]| v[v.len() - 1];
    welfare_from_endpoints(last(scenario), last(baseline), last(optimum))
}

pub fn welfare_from_endpoints(scenario: f64, baseline: f64, optimum: f64) -> Result<f64, SimError> {
    if !(optimum > baseline) {
        return Err(SimError::DegenerateWelfare { optimum, baseline });
    }
    Ok(100.0 * (scenario - baseline) / (optimum - baseline))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::default_params;
    use crate::population::sample_population;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_scenarios() {
        let edu = make_scenario("education").unwrap();
        assert!((edu.effective_learning_rate(0.20) - 0.30).abs() < 1e-12);

        let reg = make_scenario("regulation").unwrap();
        assert!(reg.regulation.active);
        assert_eq!(reg.regulation.inspection_interval, 10);
        assert_eq!(reg.regulation.fine_rate, 0.5);

        let base = make_scenario("baseline").unwrap();
        assert!(!base.regulation.active && !base.education.active && !base.reputation.active && !base.optimum);
        assert_eq!(base.implementation_cost, Some(0.0));
        assert_eq!(base.effective_learning_rate(0.2), 0.2);

        let costs: Vec<_> = ScenarioName::ALL.iter().map(|n| scenario(*n).implementation_cost).collect();
        assert_eq!(costs, [Some(0.0), Some(100.0), Some(65.0), Some(80.0), Some(140.0), None]);

        for n in ScenarioName::ALL {
            scenario(n).validate().unwrap();
        }
        assert!(matches!(make_scenario("laissez-faire"), Err(SimError::UnknownScenario(_))));
    }

    #[test]
    fn invalid_combinations() {
        let mut s = scenario(ScenarioName::Combined);
        s.education.active = false;
        assert!(s.validate().is_err());
        let mut s = scenario(ScenarioName::Optimum);
        s.regulation.active = true;
        assert!(s.validate().is_err());
    }

    fn population() -> Vec<FirmState> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        sample_population(&default_params(), &mut rng).unwrap().0
    }

    #[test]
    fn no_inspection_off_schedule() {
        let mut firms = population();
        let reg = scenario(ScenarioName::Regulation).regulation;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..10 {
            assert_eq!(apply_regulation(t, &mut firms, &reg, &mut rng), 0);
        }
        assert!(firms.iter().all(|f| !f.fine_pending));
    }

    #[test]
    fn inspection_targets_washers_only() {
        let mut firms = population();
        let mut reg = scenario(ScenarioName::Regulation).regulation;
        reg.detection_prob = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let caught = apply_regulation(10, &mut firms, &reg, &mut rng);
        assert_eq!(caught, 20);
        for f in &firms {
            let washer = f.strategy == Strategy::Washer;
            assert_eq!(f.fine_pending, washer);
            assert_eq!(f.detected, washer);
            if washer {
                assert!((f.evasion_skill - 0.05).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn evasion_capped() {
        let mut firms = population();
        let mut reg = scenario(ScenarioName::Regulation).regulation;
        reg.detection_prob = 1.0;
        reg.evasion_growth = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=5 {
            apply_regulation(10 * k, &mut firms, &reg, &mut rng);
        }
        assert!(firms.iter().all(|f| f.evasion_skill <= 0.9));
    }

    #[test]
    fn fine_is_half_of_profit() {
        assert_eq!(fine_for(10.0, 0.5), 5.0);
        assert_eq!(fine_for(-3.0, 0.5), 0.0);
    }

    #[test]
    fn blacklist_timers() {
        let mut firms = population();
        let rep = scenario(ScenarioName::Reputation).reputation;
        let base = PolicyScenario::baseline().reputation;
        firms[0].detected = true;
        firms[0].newly_detected = true;
        apply_reputation_sanctions(&mut firms, &rep);
        assert_eq!(firms[0].blacklist_remaining, 5);
        let mut seen = vec![price_multiplier(&firms[0], 0.10, &rep)];
        firms[0].newly_detected = false;
        for _ in 0..6 {
            apply_reputation_sanctions(&mut firms, &rep);
            seen.push(price_multiplier(&firms[0], 0.10, &rep));
        }
        assert_eq!(seen, [0.8, 0.8, 0.8, 0.8, 0.8, 0.9, 0.9]);
        assert_eq!(price_multiplier(&firms[0], 0.10, &base), 0.9);
        assert_eq!(price_multiplier(&firms[1], 0.10, &rep), 1.0);

        // inactive scenario never touches timers
        let mut firms = population();
        firms[0].detected = true;
        firms[0].newly_detected = true;
        apply_reputation_sanctions(&mut firms, &base);
        assert_eq!(firms[0].blacklist_remaining, 0);
        assert_eq!(price_multiplier(&firms[0], 0.10, &base), 0.9);
    }

    #[test]
    fn welfare_examples() {
        let b = [100.0, 81.3];
        let o = [100.0, 100.0];
        assert_eq!(welfare_improvement(&b, &b, &o).unwrap(), 0.0);
        assert_eq!(welfare_improvement(&o, &b, &o).unwrap(), 100.0);
        let reg = welfare_from_endpoints(88.7, 81.3, 100.0).unwrap();
        assert!((reg - 39.572_192_513).abs() < 1e-6);
        assert!(welfare_from_endpoints(90.0, 95.0, 95.0).is_err());
        assert!(welfare_improvement(&[1.0], &b, &o).is_err());
    }
}
