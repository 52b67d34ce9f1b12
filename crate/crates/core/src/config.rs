//! Sectioned `key = value` configuration files.
//!
//! ```text
//! [learning]
//! learning_rate = 0.30   # comment
//! [policy]
//! fine_rate = 0.5
//! ```
//!
//! Every parameter has exactly one home section. Unknown sections and keys
//! are errors; absent keys keep their defaults. `wash_cost_savings_rate`
//! accepts `none`. Beta shape pairs are written `(a, b)`.

use std::path::Path;

use crate::error::ConfigError;
use crate::params::{default_params, SimParams};
use crate::policy::PolicyScenario;

pub const SECTIONS: [&str; 7] = ["market", "costs", "learning", "penalty", "innovation", "design", "policy"];

/// (section, key) for every simulation parameter, in emission order.
pub const PARAM_KEYS: &[(&str, &str)] = &[
    ("market", "n_firms"),
    ("market", "n_consumers"),
    ("market", "n_periods"),
    ("market", "n_reps"),
    ("market", "n_industries"),
    ("market", "tech_lo"),
    ("market", "tech_hi"),
    ("market", "fin_lo"),
    ("market", "fin_hi"),
    ("market", "rep_lo"),
    ("market", "rep_hi"),
    ("market", "initial_washer_share"),
    ("costs", "ai_substantive_cost"),
    ("costs", "ai_wash_cost"),
    ("costs", "wash_cost_savings_rate"),
    ("costs", "green_cost_ref"),
    ("learning", "learning_rate"),
    ("learning", "info_update_frequency"),
    ("learning", "signal_noise_sd"),
    ("penalty", "share_loss_rate"),
    ("penalty", "price_discount_rate"),
    ("penalty", "detection_threshold"),
    ("penalty", "discovery_scale"),
    ("innovation", "payback_period"),
    ("innovation", "spillover_coeff"),
    ("innovation", "green_quality_gain"),
    ("innovation", "green_depreciation"),
    ("innovation", "honest_green_target"),
    ("innovation", "washer_green_target"),
    ("innovation", "green_floor"),
    ("innovation", "green_cap"),
    ("innovation", "green_noise"),
    ("innovation", "share_feedback_gain"),
    ("innovation", "patent_rate"),
    ("design", "logit_temperature"),
    ("design", "markup"),
    ("design", "unit_cost"),
    ("design", "reputation_price_slope"),
    ("design", "quality_base"),
    ("design", "quality_ai_gain"),
    ("design", "revision_prob"),
    ("design", "profit_window"),
    ("design", "imitation_temperature"),
    ("design", "reservation_utility"),
    ("design", "cash_endowment"),
    ("design", "honest_desc_beta"),
    ("design", "washer_desc_beta"),
    ("design", "honest_base_statements"),
    ("design", "washer_base_statements"),
    ("design", "honest_statement_slope"),
    ("design", "washer_statement_slope"),
];

pub const POLICY_KEYS: &[&str] = &[
    "inspection_interval",
    "fine_rate",
    "detection_prob",
    "evasion_growth",
    "evasion_cap",
    "learning_rate_multiplier",
    "blacklist_duration",
    "sanction_discount",
    "premium_exclusion",
];

/// Scenario parameter overrides from the `[policy]` section. Which
/// interventions are active always follows the scenario name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyOverrides {
    pub inspection_interval: Option<usize>,
    pub fine_rate: Option<f64>,
    pub detection_prob: Option<f64>,
    pub evasion_growth: Option<f64>,
    pub evasion_cap: Option<f64>,
    pub learning_rate_multiplier: Option<f64>,
    pub blacklist_duration: Option<u32>,
    pub sanction_discount: Option<f64>,
    pub premium_exclusion: Option<bool>,
}

impl PolicyOverrides {
    pub fn apply(&self, s: &PolicyScenario) -> PolicyScenario {
        let mut s = s.clone();
        let r = &mut s.regulation;
        set_opt(&mut r.inspection_interval, self.inspection_interval);
        set_opt(&mut r.fine_rate, self.fine_rate);
        set_opt(&mut r.detection_prob, self.detection_prob);
        set_opt(&mut r.evasion_growth, self.evasion_growth);
        set_opt(&mut r.evasion_cap, self.evasion_cap);
        set_opt(&mut s.education.learning_rate_multiplier, self.learning_rate_multiplier);
        set_opt(&mut s.reputation.blacklist_duration, self.blacklist_duration);
        set_opt(&mut s.reputation.sanction_discount, self.sanction_discount);
        set_opt(&mut s.reputation.premium_exclusion, self.premium_exclusion);
        s
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "inspection_interval" => self.inspection_interval = Some(parse(v)?),
            "fine_rate" => self.fine_rate = Some(parse(v)?),
            "detection_prob" => self.detection_prob = Some(parse(v)?),
            "evasion_growth" => self.evasion_growth = Some(parse(v)?),
            "evasion_cap" => self.evasion_cap = Some(parse(v)?),
            "learning_rate_multiplier" => self.learning_rate_multiplier = Some(parse(v)?),
            "blacklist_duration" => self.blacklist_duration = Some(parse(v)?),
            "sanction_discount" => self.sanction_discount = Some(parse(v)?),
            "premium_exclusion" => self.premium_exclusion = Some(parse(v)?),
            _ => return Err(format!("unknown policy key {key}")),
        }
        Ok(())
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        push("inspection_interval", self.inspection_interval.map(|v| v.to_string()));
        push("fine_rate", self.fine_rate.map(|v| v.to_string()));
        push("detection_prob", self.detection_prob.map(|v| v.to_string()));
        push("evasion_growth", self.evasion_growth.map(|v| v.to_string()));
        push("evasion_cap", self.evasion_cap.map(|v| v.to_string()));
        push("learning_rate_multiplier", self.learning_rate_multiplier.map(|v| v.to_string()));
        push("blacklist_duration", self.blacklist_duration.map(|v| v.to_string()));
        push("sanction_discount", self.sanction_discount.map(|v| v.to_string()));
        push("premium_exclusion", self.premium_exclusion.map(|v| v.to_string()));
        out
    }
}

fn set_opt<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub params: SimParams,
    pub policy: PolicyOverrides,
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

/// Parses config text over the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config { params: default_params(), policy: PolicyOverrides::default() };
    let mut section: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Parse { line: line_no, message: format!("malformed section header {line:?}") })?
                .trim();
            section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("unknown section [{name}]"),
            })?);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line: line_no, message: format!("expected key = value, got {line:?}") })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            return Err(ConfigError::Parse { line: line_no, message: format!("key {key:?} outside any section") });
        };
        let bad_value = |message: String| ConfigError::BadValue { line: line_no, key: key.to_string(), message };
        if sec == "policy" {
            if !POLICY_KEYS.contains(&key) {
                return Err(unknown(line_no, sec, key));
            }
            cfg.policy.set(key, value).map_err(bad_value)?;
        } else {
            if !PARAM_KEYS.contains(&(sec, key)) {
                return Err(unknown(line_no, sec, key));
            }
            set_param(&mut cfg.params, key, value).map_err(bad_value)?;
        }
    }
    cfg.params.validate().map_err(ConfigError::Invalid)?;
    Ok(cfg)
}

fn unknown(line: usize, section: &str, key: &str) -> ConfigError {
    ConfigError::UnknownKey { line, section: section.to_string(), key: key.to_string() }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Applies `key = value` pairs (keys without sections) to a copy of `p`.
pub fn apply_overrides(p: &SimParams, pairs: &[(String, String)]) -> Result<SimParams, ConfigError> {
    let mut q = p.clone();
    for (k, v) in pairs {
        if !PARAM_KEYS.iter().any(|(_, key)| key == k) {
            return Err(unknown(0, "-", k));
        }
        set_param(&mut q, k, v).map_err(|message| ConfigError::BadValue { line: 0, key: k.clone(), message })?;
    }
    q.validate().map_err(ConfigError::Invalid)?;
    Ok(q)
}

/// Writes a config that [`parse_config`] maps back to exactly `cfg`.
pub fn emit_config(cfg: &Config) -> String {
    let mut out = String::new();
    for sec in SECTIONS {
        out.push_str(&format!("[{sec}]\n"));
        if sec == "policy" {
            for (k, v) in cfg.policy.entries() {
                out.push_str(&format!("{k} = {v}\n"));
            }
        } else {
            for (_, k) in PARAM_KEYS.iter().filter(|(s, _)| *s == sec) {
                out.push_str(&format!("{k} = {}\n", get_param(&cfg.params, k)));
            }
        }
        out.push('\n');
    }
    out
}

fn parse<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

fn parse_pair(v: &str) -> Result<(f64, f64), String> {
    let inner = v
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("expected (a, b), got {v:?}"))?;
    let (a, b) = inner.split_once(',').ok_or_else(|| format!("expected (a, b), got {v:?}"))?;
    Ok((parse(a.trim())?, parse(b.trim())?))
}

fn set_param(p: &mut SimParams, key: &str, v: &str) -> Result<(), String> {
    match key {
        "n_firms" => p.n_firms = parse(v)?,
        "n_consumers" => p.n_consumers = parse(v)?,
        "n_periods" => p.n_periods = parse(v)?,
        "n_reps" => p.n_reps = parse(v)?,
        "n_industries" => p.n_industries = parse(v)?,
        "tech_lo" => p.tech_lo = parse(v)?,
        "tech_hi" => p.tech_hi = parse(v)?,
        "fin_lo" => p.fin_lo = parse(v)?,
        "fin_hi" => p.fin_hi = parse(v)?,
        "rep_lo" => p.rep_lo = parse(v)?,
        "rep_hi" => p.rep_hi = parse(v)?,
        "initial_washer_share" => p.initial_washer_share = parse(v)?,
        "ai_substantive_cost" => p.ai_substantive_cost = parse(v)?,
        "ai_wash_cost" => p.ai_wash_cost = parse(v)?,
        "wash_cost_savings_rate" => {
            p.wash_cost_savings_rate = if v.eq_ignore_ascii_case("none") { None } else { Some(parse(v)?) }
        }
        "green_cost_ref" => p.green_cost_ref = parse(v)?,
        "learning_rate" => p.learning_rate = parse(v)?,
        "info_update_frequency" => p.info_update_frequency = parse(v)?,
        "signal_noise_sd" => p.signal_noise_sd = parse(v)?,
        "share_loss_rate" => p.share_loss_rate = parse(v)?,
        "price_discount_rate" => p.price_discount_rate = parse(v)?,
        "detection_threshold" => p.detection_threshold = parse(v)?,
        "discovery_scale" => p.discovery_scale = parse(v)?,
        "payback_period" => p.payback_period = parse(v)?,
        "spillover_coeff" => p.spillover_coeff = parse(v)?,
        "green_quality_gain" => p.green_quality_gain = parse(v)?,
        "green_depreciation" => p.green_depreciation = parse(v)?,
        "honest_green_target" => p.honest_green_target = parse(v)?,
        "washer_green_target" => p.washer_green_target = parse(v)?,
        "green_floor" => p.green_floor = parse(v)?,
        "green_cap" => p.green_cap = parse(v)?,
        "green_noise" => p.green_noise = parse(v)?,
        "share_feedback_gain" => p.share_feedback_gain = parse(v)?,
        "patent_rate" => p.patent_rate = parse(v)?,
        "logit_temperature" => p.logit_temperature = parse(v)?,
        "markup" => p.markup = parse(v)?,
        "unit_cost" => p.unit_cost = parse(v)?,
        "reputation_price_slope" => p.reputation_price_slope = parse(v)?,
        "quality_base" => p.quality_base = parse(v)?,
        "quality_ai_gain" => p.quality_ai_gain = parse(v)?,
        "revision_prob" => p.revision_prob = parse(v)?,
        "profit_window" => p.profit_window = parse(v)?,
        "imitation_temperature" => p.imitation_temperature = parse(v)?,
        "reservation_utility" => p.reservation_utility = parse(v)?,
        "cash_endowment" => p.cash_endowment = parse(v)?,
        "honest_desc_beta" => p.honest_desc_beta = parse_pair(v)?,
        "washer_desc_beta" => p.washer_desc_beta = parse_pair(v)?,
        "honest_base_statements" => p.honest_base_statements = parse(v)?,
        "washer_base_statements" => p.washer_base_statements = parse(v)?,
        "honest_statement_slope" => p.honest_statement_slope = parse(v)?,
        "washer_statement_slope" => p.washer_statement_slope = parse(v)?,
        _ => return Err(format!("unknown key {key}")),
    }
    Ok(())
}

fn get_param(p: &SimParams, key: &str) -> String {
    let pair = |(a, b): (f64, f64)| format!("({a}, {b})");
    match key {
        "n_firms" => p.n_firms.to_string(),
        "n_consumers" => p.n_consumers.to_string(),
        "n_periods" => p.n_periods.to_string(),
        "n_reps" => p.n_reps.to_string(),
        "n_industries" => p.n_industries.to_string(),
        "tech_lo" => p.tech_lo.to_string(),
        "tech_hi" => p.tech_hi.to_string(),
        "fin_lo" => p.fin_lo.to_string(),
        "fin_hi" => p.fin_hi.to_string(),
        "rep_lo" => p.rep_lo.to_string(),
        "rep_hi" => p.rep_hi.to_string(),
        "initial_washer_share" => p.initial_washer_share.to_string(),
        "ai_substantive_cost" => p.ai_substantive_cost.to_string(),
        "ai_wash_cost" => p.ai_wash_cost.to_string(),
        "wash_cost_savings_rate" => p.wash_cost_savings_rate.map_or("none".to_string(), |v| v.to_string()),
        "green_cost_ref" => p.green_cost_ref.to_string(),
        "learning_rate" => p.learning_rate.to_string(),
        "info_update_frequency" => p.info_update_frequency.to_string(),
        "signal_noise_sd" => p.signal_noise_sd.to_string(),
        "share_loss_rate" => p.share_loss_rate.to_string(),
        "price_discount_rate" => p.price_discount_rate.to_string(),
        "detection_threshold" => p.detection_threshold.to_string(),
        "discovery_scale" => p.discovery_scale.to_string(),
        "payback_period" => p.payback_period.to_string(),
        "spillover_coeff" => p.spillover_coeff.to_string(),
        "green_quality_gain" => p.green_quality_gain.to_string(),
        "green_depreciation" => p.green_depreciation.to_string(),
        "honest_green_target" => p.honest_green_target.to_string(),
        "washer_green_target" => p.washer_green_target.to_string(),
        "green_floor" => p.green_floor.to_string(),
        "green_cap" => p.green_cap.to_string(),
        "green_noise" => p.green_noise.to_string(),
        "share_feedback_gain" => p.share_feedback_gain.to_string(),
        "patent_rate" => p.patent_rate.to_string(),
        "logit_temperature" => p.logit_temperature.to_string(),
        "markup" => p.markup.to_string(),
        "unit_cost" => p.unit_cost.to_string(),
        "reputation_price_slope" => p.reputation_price_slope.to_string(),
        "quality_base" => p.quality_base.to_string(),
        "quality_ai_gain" => p.quality_ai_gain.to_string(),
        "revision_prob" => p.revision_prob.to_string(),
        "profit_window" => p.profit_window.to_string(),
        "imitation_temperature" => p.imitation_temperature.to_string(),
        "reservation_utility" => p.reservation_utility.to_string(),
        "cash_endowment" => p.cash_endowment.to_string(),
        "honest_desc_beta" => pair(p.honest_desc_beta),
        "washer_desc_beta" => pair(p.washer_desc_beta),
        "honest_base_statements" => p.honest_base_statements.to_string(),
        "washer_base_statements" => p.washer_base_statements.to_string(),
        "honest_statement_slope" => p.honest_statement_slope.to_string(),
        "washer_statement_slope" => p.washer_statement_slope.to_string(),
        _ => unreachable!("PARAM_KEYS and get_param are kept in sync"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{scenario, ScenarioName};
    use proptest::prelude::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap().params, default_params());
        assert_eq!(parse_config("# nothing\n\n").unwrap().params, default_params());
    }

    #[test]
    fn learning_rate_override() {
        let cfg = parse_config("[learning]\nlearning_rate = 0.30\n").unwrap();
        assert_eq!(cfg.params.learning_rate, 0.30);
    }

    #[test]
    fn validation_failure_names_key() {
        let err = parse_config("[market]\nn_firms = 1\n").unwrap_err();
        assert!(err.to_string().contains("n_firms ≥ 2"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config("[market]\nn_firms = 10\nn_frims = 3\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "n_frims");
            }
            other => panic!("{other}"),
        }
        // right key, wrong section
        assert!(matches!(parse_config("[costs]\nn_firms = 10\n"), Err(ConfigError::UnknownKey { line: 2, .. })));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_config("[nope]\n"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("n_firms = 3\n"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("[market]\nn_firms\n"), Err(ConfigError::Parse { line: 2, .. })));
        assert!(matches!(
            parse_config("[market]\nn_firms = many\n"),
            Err(ConfigError::BadValue { line: 2, .. })
        ));
    }

    #[test]
    fn policy_section_overrides() {
        let cfg = parse_config("[policy]\nfine_rate = 0.25\npremium_exclusion = false\n").unwrap();
        let s = cfg.policy.apply(&scenario(ScenarioName::Combined));
        assert_eq!(s.regulation.fine_rate, 0.25);
        assert!(!s.reputation.premium_exclusion);
        assert!(s.regulation.active);
    }

    #[test]
    fn savings_rate_and_pairs() {
        let cfg = parse_config("[costs]\nwash_cost_savings_rate = 0.3\n[design]\nhonest_desc_beta = (3, 7)\n").unwrap();
        assert_eq!(cfg.params.wash_cost_savings_rate, Some(0.3));
        assert_eq!(cfg.params.honest_desc_beta, (3.0, 7.0));
    }

    #[test]
    fn emitted_defaults_round_trip() {
        let cfg = Config::default();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }

    proptest! {
        #[test]
        fn round_trip(
            lr in 0.0f64..=1.0,
            markup in 0.0f64..3.0,
            temp in 1e-4f64..1.0,
            savings in prop::option::of(0.01f64..0.99),
            firms in 2usize..500,
            beta in (0.1f64..20.0, 0.1f64..20.0),
            fine in prop::option::of(0.0f64..=1.0),
            excl in prop::option::of(any::<bool>()),
        ) {
            let params = SimParams {
                learning_rate: lr,
                markup,
                logit_temperature: temp,
                wash_cost_savings_rate: savings,
                n_firms: firms,
                honest_desc_beta: beta,
                ..default_params()
            };
            let policy = PolicyOverrides { fine_rate: fine, premium_exclusion: excl, ..Default::default() };
            let cfg = Config { params, policy };
            prop_assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
        }
    }
}
