//! Analytical and simulation models of IEEE 802.11 channel access with
//! non-primary channel access (NPCA) over multiple overlapping BSSs.
//!
//! - [`phy`]: frame durations, data rates and aggregation limits.
//! - [`ctmc`]: the Markov model of concurrent transmissions and its
//!   stationary throughput.
//! - [`trajectory`]: event-level walks of that chain for delay estimates.
//! - [`des`]: a slotted discrete-event simulator with binary exponential
//!   backoff, used to cross-check the analytical model.
//! - [`harness`]: scenario files, Monte Carlo runs, sweeps and reports.

pub mod band;
pub mod ctmc;
pub mod des;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod phy;
pub mod scenario;
pub mod trajectory;

pub use band::BandSet;
pub use error::{Diagnostic, Error, Result};
pub use phy::{McsMap, McsProfile, PhyParams};
pub use scenario::{BssSpec, Scenario, TxKind};
