//! Per-BSS configuration shared by the Markov model and the simulator.

use serde::Serialize;

use crate::band::BandSet;
use crate::error::{Error, Result};
use crate::phy::{dbps, Dbps, McsProfile, PhyParams};

pub const DEFAULT_PAYLOAD_BITS: u32 = 1400 * 8;
pub const DEFAULT_CW_MIN: u32 = 16;
pub const MAX_DELTA: u32 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct BssSpec {
    pub id: String,
    pub allocation: BandSet,
    pub primary_unit: u8,
    /// NPCA capability. Only effective when the scenario enables NPCA.
    pub npca_enabled: bool,
    pub cw_min: u32,
    /// Scale on the channel access rate.
    pub alpha: f64,
    /// Maximum A-MPDU size.
    pub delta: u32,
    pub mcs: McsProfile,
    pub n_ss: u8,
    pub payload_bits: u32,
}

impl BssSpec {
    pub fn new(id: impl Into<String>, allocation: BandSet, primary_unit: u8, mcs: McsProfile) -> Self {
        Self {
            id: id.into(),
            allocation,
            primary_unit,
            npca_enabled: false,
            cw_min: DEFAULT_CW_MIN,
            alpha: 1.0,
            delta: MAX_DELTA,
            mcs,
            n_ss: 2,
            payload_bits: DEFAULT_PAYLOAD_BITS,
        }
    }

    /// Half of the allocation holding the primary channel. A 20 MHz
    /// allocation is its own primary half.
    pub fn primary_half(&self) -> BandSet {
        self.allocation
            .split_at_unit(self.primary_unit)
            .map_or(self.allocation, |(p, _)| p)
    }

    /// The secondary half of the allocation, used for NPCA.
    pub fn npca_band(&self) -> Option<BandSet> {
        self.allocation.split_at_unit(self.primary_unit).map(|(_, s)| s)
    }

    /// 20 MHz channel inside the NPCA band where NPCA contention runs.
    pub fn npca_primary_unit(&self) -> Option<u8> {
        self.npca_band().map(BandSet::start)
    }

    pub fn dbps(&self, band: BandSet) -> Result<Dbps> {
        dbps(self.mcs, band.width(), self.n_ss)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidScenario(format!("BSS {}: {msg}", self.id)));
        if !self.allocation.contains_unit(self.primary_unit) {
            return fail(format!(
                "primary unit {} outside allocation {}",
                self.primary_unit, self.allocation
            ));
        }
        if self.npca_enabled && self.npca_band().is_none() {
            return fail("NPCA needs an allocation of at least 40 MHz".into());
        }
        if self.cw_min < 2 {
            return fail(format!("cw_min must be >= 2, got {}", self.cw_min));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(1..=MAX_DELTA).contains(&self.delta) {
            return fail(format!("delta must be in [1, {MAX_DELTA}], got {}", self.delta));
        }
        if !(1..=2).contains(&self.n_ss) {
            return fail(format!("n_ss must be 1 or 2, got {}", self.n_ss));
        }
        if self.payload_bits == 0 {
            return fail("payload must be non-empty".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub bsses: Vec<BssSpec>,
    pub phy: PhyParams,
    /// Global NPCA switch; a BSS uses NPCA only if this and its own
    /// capability flag are both set.
    pub npca: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TxKind {
    /// The full allocation.
    Legacy,
    /// A narrower band around the primary (dynamic channel bonding).
    Dcb,
    /// On the NPCA band while BSS `blocker` holds the primary.
    Npca { blocker: usize },
}

impl TxKind {
    pub fn is_npca(self) -> bool {
        matches!(self, TxKind::Npca { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionProfile {
    pub n_packets: u32,
    pub duration: f64,
    /// Completion rate, `1 / duration`.
    pub mu: f64,
    pub band: BandSet,
    pub kind: TxKind,
}

impl TransmissionProfile {
    /// MPDUs per second while the transmission is active.
    pub fn packet_rate(&self) -> f64 {
        self.mu * f64::from(self.n_packets)
    }
}

impl Scenario {
    pub fn new(bsses: Vec<BssSpec>, phy: PhyParams, npca: bool) -> Result<Self> {
        let s = Self { bsses, phy, npca };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bsses.is_empty() {
            return Err(Error::InvalidScenario("scenario has no BSS".into()));
        }
        self.phy.validate()?;
        for (i, b) in self.bsses.iter().enumerate() {
            b.validate()?;
            if self.bsses[..i].iter().any(|o| o.id == b.id) {
                return Err(Error::InvalidScenario(format!("duplicate BSS id {}", b.id)));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.bsses.iter().position(|b| b.id == id)
    }

    /// Whether BSS `n` may use NPCA in this scenario.
    pub fn uses_npca(&self, n: usize) -> bool {
        self.npca && self.bsses[n].npca_enabled
    }

    pub fn lambda(&self, n: usize) -> Result<f64> {
        let b = &self.bsses[n];
        self.phy.lambda_from_cw(b.cw_min, b.alpha)
    }

    /// Profile of a Legacy or DCB access on `band`: as many MPDUs as fit
    /// in T_max, capped at Δ.
    pub fn access_profile(&self, n: usize, band: BandSet) -> Result<TransmissionProfile> {
        let b = &self.bsses[n];
        let kind = if band == b.allocation {
            TxKind::Legacy
        } else {
            TxKind::Dcb
        };
        self.sized_profile(n, band, kind, self.phy.t_max)
    }

    /// Profile of one NPCA TXOP inside a blocking transmission lasting
    /// `blocker_duration`. `n_packets` is 0 when nothing fits.
    pub fn npca_profile(&self, n: usize, blocker: usize, blocker_duration: f64) -> Result<TransmissionProfile> {
        let band = self.bsses[n]
            .npca_band()
            .ok_or_else(|| Error::InvalidScenario(format!("BSS {} has no NPCA band", self.bsses[n].id)))?;
        let budget = self.phy.npca_budget(blocker_duration).min(self.phy.t_max);
        self.sized_profile(n, band, TxKind::Npca { blocker }, budget)
    }

    fn sized_profile(&self, n: usize, band: BandSet, kind: TxKind, budget: f64) -> Result<TransmissionProfile> {
        let b = &self.bsses[n];
        let rate = b.dbps(band)?;
        let n_packets = self.phy.max_packets_within(budget, b.payload_bits, rate, b.delta);
        let duration = self.phy.txop_duration(n_packets.max(1), b.payload_bits, rate);
        Ok(TransmissionProfile {
            n_packets,
            duration,
            mu: 1.0 / duration,
            band,
            kind,
        })
    }
}
