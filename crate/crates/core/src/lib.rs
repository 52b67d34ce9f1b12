//! Agent-based market simulator for AI-washing disclosure.
//!
//! Firms choose between substantive AI investment and cheaper descriptive
//! "washing", pick a green R&D intensity, and disclose classified AI
//! statements. Consumers hold per-firm quality beliefs that they update from
//! purchases and periodic public revelations, and buy by logit choice. A
//! policy layer adds inspections, consumer education, blacklist sanctions or
//! full information. The harness runs seeded Monte Carlo batches, in
//! parallel with the `parallel` feature, with results independent of the
//! thread count.

pub mod acceptance;
pub mod config;
pub mod engine;
pub mod error;
pub mod exec;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod params;
pub mod policy;
pub mod population;
pub mod reference;
pub mod stats;

pub use engine::{run_replication, run_replication_with_panel, MarketState, PeriodRecord, Strategy, Trajectory};
pub use error::{ConfigError, IoError, MetricsError, SimError, StatsError};
pub use exec::Exec;
pub use harness::{compare_policies, run_experiment, sensitivity_sweep, Experiment, Metric};
pub use params::{default_params, validate_params, SimParams};
pub use policy::{make_scenario, PolicyScenario, ScenarioName};

/// Fixed seed behind the shipped acceptance numbers.
pub const REFERENCE_SEED: u64 = 20_240_601;
