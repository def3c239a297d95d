//! Scenario definitions, configuration files, Monte Carlo runs, sweeps and
//! result output.

pub mod builtin;
pub mod config;
pub mod montecarlo;
pub mod output;
pub mod stats;
pub mod tables;

pub use builtin::{builtin_scenario, BuiltinOptions, ScenarioId};
pub use config::{load_scenario, validate, ScenarioConfig};
pub use montecarlo::{monte_carlo, sweep, AggregateReport, Engine, Grid, SweepReport};
pub use tables::{reproduce_tables, TableOptions, TablesReport};
