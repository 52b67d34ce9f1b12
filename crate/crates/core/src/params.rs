//! Calibration record for the market model and its validation.

use std::fmt;

/// Full parameter set for one simulated market.
///
/// Market-size, endowment, cost, learning, penalty and innovation fields carry
/// the published calibration. The remaining fields close gaps the calibration
/// leaves open (choice model, pricing, quality production, disclosure
/// generation) and are tuned so the baseline reproduces the reported
/// trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    // [market]
    pub n_firms: usize,
    pub n_consumers: usize,
    pub n_periods: usize,
    pub n_reps: usize,
    pub n_industries: usize,
    pub tech_lo: f64,
    pub tech_hi: f64,
    pub fin_lo: f64,
    pub fin_hi: f64,
    pub rep_lo: f64,
    pub rep_hi: f64,
    pub initial_washer_share: f64,

    // [costs]
    pub ai_substantive_cost: f64,
    pub ai_wash_cost: f64,
    /// When set, washing cost is `ai_substantive_cost * (1 - rate)` and
    /// `ai_wash_cost` is ignored.
    pub wash_cost_savings_rate: Option<f64>,
    pub green_cost_ref: f64,

    // [learning]
    pub learning_rate: f64,
    pub info_update_frequency: usize,
    pub signal_noise_sd: f64,

    // [penalty]
    pub share_loss_rate: f64,
    pub price_discount_rate: f64,
    pub detection_threshold: f64,
    /// Chance that a revelation reaches a firm whose claim gap exceeds the
    /// threshold, per unit of effective learning rate (capped at 1).
    pub discovery_scale: f64,

    // [innovation]
    pub payback_period: usize,
    pub spillover_coeff: f64,
    pub green_quality_gain: f64,
    pub green_depreciation: f64,
    pub honest_green_target: f64,
    pub washer_green_target: f64,
    pub green_floor: f64,
    pub green_cap: f64,
    pub green_noise: f64,
    pub share_feedback_gain: f64,
    pub patent_rate: f64,

    // [design]
    pub logit_temperature: f64,
    pub markup: f64,
    pub unit_cost: f64,
    pub reputation_price_slope: f64,
    pub quality_base: f64,
    pub quality_ai_gain: f64,
    pub revision_prob: f64,
    pub profit_window: usize,
    pub imitation_temperature: f64,
    pub reservation_utility: f64,
    pub cash_endowment: f64,
    pub honest_desc_beta: (f64, f64),
    pub washer_desc_beta: (f64, f64),
    pub honest_base_statements: u32,
    pub washer_base_statements: u32,
    pub honest_statement_slope: f64,
    pub washer_statement_slope: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        default_params()
    }
}

/// Calibrated defaults.
pub fn default_params() -> SimParams {
    SimParams {
        n_firms: 200,
        n_consumers: 1000,
        n_periods: 200,
        n_reps: 500,
        n_industries: 1,
        tech_lo: 0.3,
        tech_hi: 0.9,
        fin_lo: 0.2,
        fin_hi: 0.8,
        rep_lo: 0.4,
        rep_hi: 0.8,
        initial_washer_share: 0.10,

        ai_substantive_cost: 0.15,
        ai_wash_cost: 0.05,
        wash_cost_savings_rate: None,
        green_cost_ref: 0.10,

        learning_rate: 0.20,
        info_update_frequency: 5,
        signal_noise_sd: 0.1,

        share_loss_rate: 0.05,
        price_discount_rate: 0.10,
        detection_threshold: 0.14,
        discovery_scale: 2.75,

        payback_period: 4,
        spillover_coeff: 0.15,
        green_quality_gain: 0.3,
        green_depreciation: 0.1,
        honest_green_target: 0.088,
        washer_green_target: 0.032,
        green_floor: 0.02,
        green_cap: 0.15,
        green_noise: 0.005,
        share_feedback_gain: 0.5,
        patent_rate: 3.0,

        logit_temperature: 0.245,
        markup: 0.66,
        unit_cost: 0.8,
        reputation_price_slope: 0.2,
        quality_base: 0.5,
        quality_ai_gain: 0.4,
        revision_prob: 0.48,
        profit_window: 8,
        imitation_temperature: 0.03,
        reservation_utility: 1.0,
        cash_endowment: 10.0,
        honest_desc_beta: (2.0, 8.0),
        washer_desc_beta: (8.0, 2.0),
        honest_base_statements: 4,
        washer_base_statements: 8,
        honest_statement_slope: 6.0,
        washer_statement_slope: 8.0,
    }
}

impl SimParams {
    /// Washing cost as a fraction of revenue, after the savings-rate override.
    pub fn effective_wash_cost(&self) -> f64 {
        match self.wash_cost_savings_rate {
            Some(rate) => self.ai_substantive_cost * (1.0 - rate),
            None => self.ai_wash_cost,
        }
    }

    /// Cost-plus list price before reputation and discount adjustments.
    pub fn list_price(&self) -> f64 {
        self.unit_cost * (1.0 + self.markup)
    }

    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_params(self)
    }
}

/// One failed invariant, named by the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Collects every violated invariant; `Ok` only when the list is empty.
pub fn validate_params(p: &SimParams) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |field: &'static str, message: String| out.push(Violation { field, message });

    if p.n_firms < 2 {
        push("n_firms", format!("n_firms ≥ 2 required, got {}", p.n_firms));
    }
    for (field, v) in [
        ("n_consumers", p.n_consumers),
        ("n_periods", p.n_periods),
        ("n_reps", p.n_reps),
        ("n_industries", p.n_industries),
        ("info_update_frequency", p.info_update_frequency),
        ("profit_window", p.profit_window),
    ] {
        if v < 1 {
            push(field, format!("{field} ≥ 1 required, got {v}"));
        }
    }
    if p.n_industries >= 1 && p.n_firms / p.n_industries.max(1) < 2 {
        push(
            "n_industries",
            format!(
                "every industry needs ≥ 2 firms ({} firms over {} industries)",
                p.n_firms, p.n_industries
            ),
        );
    }

    for (lo_name, lo, hi_name, hi) in [
        ("tech_lo", p.tech_lo, "tech_hi", p.tech_hi),
        ("fin_lo", p.fin_lo, "fin_hi", p.fin_hi),
        ("rep_lo", p.rep_lo, "rep_hi", p.rep_hi),
        ("green_floor", p.green_floor, "green_cap", p.green_cap),
    ] {
        if !(lo < hi) {
            push(lo_name, format!("lo < hi required ({lo_name}={lo}, {hi_name}={hi})"));
        }
        if !unit(lo) {
            push(lo_name, format!("{lo_name} must lie in [0,1], got {lo}"));
        }
        if !unit(hi) {
            push(hi_name, format!("{hi_name} must lie in [0,1], got {hi}"));
        }
    }

    let fractions = [
        ("initial_washer_share", p.initial_washer_share),
        ("ai_substantive_cost", p.ai_substantive_cost),
        ("ai_wash_cost", p.ai_wash_cost),
        ("green_cost_ref", p.green_cost_ref),
        ("learning_rate", p.learning_rate),
        ("share_loss_rate", p.share_loss_rate),
        ("price_discount_rate", p.price_discount_rate),
        ("green_depreciation", p.green_depreciation),
        ("honest_green_target", p.honest_green_target),
        ("washer_green_target", p.washer_green_target),
        ("revision_prob", p.revision_prob),
        ("spillover_coeff", p.spillover_coeff),
    ];
    for (field, v) in fractions {
        if !unit(v) {
            push(field, format!("{field} must lie in [0,1], got {v}"));
        }
    }
    if let Some(rate) = p.wash_cost_savings_rate {
        if !unit(rate) {
            push("wash_cost_savings_rate", format!("must lie in [0,1], got {rate}"));
        } else if rate <= 0.0 || p.effective_wash_cost() >= p.ai_substantive_cost {
            push(
                "wash_cost_savings_rate",
                format!(
                    "derived ai_wash_cost {} must be < ai_substantive_cost {}",
                    p.effective_wash_cost(),
                    p.ai_substantive_cost
                ),
            );
        }
    }

    let positive = [
        ("logit_temperature", p.logit_temperature),
        ("unit_cost", p.unit_cost),
        ("imitation_temperature", p.imitation_temperature),
        ("honest_desc_beta", p.honest_desc_beta.0),
        ("honest_desc_beta", p.honest_desc_beta.1),
        ("washer_desc_beta", p.washer_desc_beta.0),
        ("washer_desc_beta", p.washer_desc_beta.1),
    ];
    for (field, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            push(field, format!("{field} must be positive and finite, got {v}"));
        }
    }
    let non_negative = [
        ("markup", p.markup),
        ("reputation_price_slope", p.reputation_price_slope),
        ("quality_base", p.quality_base),
        ("quality_ai_gain", p.quality_ai_gain),
        ("green_quality_gain", p.green_quality_gain),
        ("signal_noise_sd", p.signal_noise_sd),
        ("detection_threshold", p.detection_threshold),
        ("discovery_scale", p.discovery_scale),
        ("green_noise", p.green_noise),
        ("share_feedback_gain", p.share_feedback_gain),
        ("patent_rate", p.patent_rate),
        ("reservation_utility", p.reservation_utility),
        ("cash_endowment", p.cash_endowment),
        ("honest_statement_slope", p.honest_statement_slope),
        ("washer_statement_slope", p.washer_statement_slope),
    ];
    for (field, v) in non_negative {
        if !(v >= 0.0 && v.is_finite()) {
            push(field, format!("{field} must be ≥ 0 and finite, got {v}"));
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_defaults() {
        let p = default_params();
        assert_eq!((p.n_firms, p.n_consumers, p.n_periods, p.n_reps), (200, 1000, 200, 500));
        assert_eq!(p.learning_rate, 0.20);
        assert_eq!(p.share_loss_rate, 0.05);
        assert_eq!(p.price_discount_rate, 0.10);
        assert_eq!(p.ai_substantive_cost, 0.15);
        assert_eq!(p.ai_wash_cost, 0.05);
        assert_eq!(p.payback_period, 4);
        assert_eq!(p.spillover_coeff, 0.15);
        assert_eq!((p.tech_lo, p.tech_hi), (0.3, 0.9));
        assert_eq!((p.fin_lo, p.fin_hi), (0.2, 0.8));
        assert_eq!((p.rep_lo, p.rep_hi), (0.4, 0.8));
        assert_eq!(p.initial_washer_share, 0.10);
    }

    #[test]
    fn defaults_validate() {
        assert_eq!(validate_params(&default_params()), Ok(()));
    }

    #[test]
    fn single_firm_rejected() {
        let p = SimParams { n_firms: 1, ..default_params() };
        let v = validate_params(&p).unwrap_err();
        assert!(v.iter().any(|v| v.field == "n_firms" && v.message.contains("n_firms ≥ 2")));
    }

    #[test]
    fn inverted_interval_rejected() {
        let p = SimParams { tech_lo: 0.9, tech_hi: 0.3, ..default_params() };
        let v = validate_params(&p).unwrap_err();
        assert!(v.iter().any(|v| v.field == "tech_lo" && v.message.contains("lo < hi")));
    }

    #[test]
    fn every_violation_reported() {
        let p = SimParams {
            n_firms: 1,
            learning_rate: 1.5,
            rep_lo: 0.9,
            rep_hi: 0.1,
            ..default_params()
        };
        let fields: Vec<_> = validate_params(&p).unwrap_err().iter().map(|v| v.field).collect();
        assert!(fields.contains(&"n_firms"));
        assert!(fields.contains(&"learning_rate"));
        assert!(fields.contains(&"rep_lo"));
    }

    #[test]
    fn savings_rate_overrides_wash_cost() {
        let p = SimParams { wash_cost_savings_rate: Some(0.3), ..default_params() };
        assert!((p.effective_wash_cost() - 0.105).abs() < 1e-12);
        assert!(p.validate().is_ok());
        let p = SimParams { wash_cost_savings_rate: Some(0.0), ..default_params() };
        assert!(p.validate().is_err());
    }
}
