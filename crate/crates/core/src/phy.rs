//! 802.11ax timing and rate arithmetic.
//!
//! Everything here is a pure function of [`PhyParams`] and the link
//! configuration: data bits per OFDM symbol, A-MPDU transmission durations,
//! the largest aggregate that fits a time budget, the NPCA time budget left
//! inside an OBSS transmission, and the exponential backoff rate used by
//! the Markov model.
//!
//! Data bits per symbol are kept as an exact rational so the only rounding
//! is the ceiling on the number of OFDM symbols.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RTS/CTS/BACK frames carry a 16-bit SERVICE field and 6 tail bits in the
/// legacy (non-HT) OFDM format.
const LEGACY_SERVICE_AND_TAIL_BITS: u32 = 16 + 6;

/// Slack used when comparing accumulated durations against a budget.
const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyParams {
    /// Empty backoff slot, T_e.
    pub slot_time: f64,
    pub difs: f64,
    pub sifs: f64,
    /// HE data OFDM symbol including guard interval.
    pub ofdm_symbol: f64,
    pub legacy_preamble: f64,
    /// HE preamble in front of every A-MPDU, T_PHY.
    pub he_preamble: f64,
    pub rts_bits: u32,
    pub cts_bits: u32,
    pub back_bits: u32,
    pub mac_header_bits: u32,
    pub mpdu_delimiter_bits: u32,
    pub tail_bits: u32,
    /// Basic rate for control frames, sent on 20 MHz with one stream.
    pub control_rate: f64,
    pub legacy_symbol: f64,
    /// Delay from OBSS start until NPCA contention may begin (RTS/CTS).
    pub t_npca: f64,
    /// Time needed to hop back from the NPCA primary to the primary.
    pub t_switch: f64,
    /// Maximum TXOP duration.
    pub t_max: f64,
    pub per: f64,
    /// Total airtime of RTS + CTS + BACK. Replaces the computed value.
    pub ctrl_overhead_override: Option<f64>,
}

impl Default for PhyParams {
    fn default() -> Self {
        Self {
            slot_time: 9e-6,
            difs: 34e-6,
            sifs: 16e-6,
            ofdm_symbol: 13.6e-6,
            legacy_preamble: 20e-6,
            he_preamble: 100e-6,
            rts_bits: 160,
            cts_bits: 112,
            back_bits: 240,
            mac_header_bits: 240,
            mpdu_delimiter_bits: 32,
            tail_bits: 18,
            control_rate: 6e6,
            legacy_symbol: 4e-6,
            t_npca: 136e-6,
            t_switch: 16e-6,
            t_max: 5e-3,
            per: 0.1,
            ctrl_overhead_override: None,
        }
    }
}

/// Control airtime that makes the 968/484/29 aggregation figures exact.
pub const CALIBRATED_CONTROL_OVERHEAD: f64 = 274e-6;

impl PhyParams {
    /// Default parameters with control frames pinned to
    /// [`CALIBRATED_CONTROL_OVERHEAD`].
    pub fn calibrated() -> Self {
        Self {
            ctrl_overhead_override: Some(CALIBRATED_CONTROL_OVERHEAD),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("slot_time", self.slot_time),
            ("difs", self.difs),
            ("sifs", self.sifs),
            ("ofdm_symbol", self.ofdm_symbol),
            ("legacy_preamble", self.legacy_preamble),
            ("he_preamble", self.he_preamble),
            ("legacy_symbol", self.legacy_symbol),
            ("t_npca", self.t_npca),
            ("t_switch", self.t_switch),
            ("t_max", self.t_max),
            ("control_rate", self.control_rate),
        ];
        for (name, v) in durations {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if let Some(v) = self.ctrl_overhead_override {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "ctrl_overhead_override must be strictly positive, got {v}"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.per) {
            return Err(Error::InvalidParameter(format!(
                "per must lie in [0, 1), got {}",
                self.per
            )));
        }
        Ok(())
    }

    /// Airtime of one legacy-format control frame of `bits` MAC bits.
    pub fn control_frame_time(&self, bits: u32) -> f64 {
        let bits_per_symbol = self.control_rate * self.legacy_symbol;
        let symbols = (f64::from(bits + LEGACY_SERVICE_AND_TAIL_BITS) / bits_per_symbol - 1e-9).ceil();
        self.legacy_preamble + symbols * self.legacy_symbol
    }

    pub fn rts_time(&self) -> f64 {
        self.control_frame_time(self.rts_bits)
    }

    /// T_RTS + T_CTS + T_BACK.
    pub fn control_time(&self) -> f64 {
        self.ctrl_overhead_override.unwrap_or_else(|| {
            self.control_frame_time(self.rts_bits)
                + self.control_frame_time(self.cts_bits)
                + self.control_frame_time(self.back_bits)
        })
    }

    /// Every term of a TXOP except the A-MPDU payload symbols.
    fn fixed_txop_time(&self) -> f64 {
        self.control_time() + 3.0 * self.sifs + self.he_preamble + self.difs + self.slot_time
    }

    fn payload_bits(&self, n_packets: u32, payload: u32) -> u64 {
        u64::from(self.mac_header_bits)
            + u64::from(n_packets) * u64::from(self.mpdu_delimiter_bits + payload)
            + u64::from(self.tail_bits)
    }

    /// OFDM symbols needed for an A-MPDU of `n_packets` MPDUs.
    pub fn data_symbols(&self, n_packets: u32, payload: u32, dbps: Dbps) -> u64 {
        dbps.symbols_for(self.payload_bits(n_packets, payload))
    }

    /// T_DATA: HE preamble plus the symbol-rounded A-MPDU.
    pub fn data_duration(&self, n_packets: u32, payload: u32, dbps: Dbps) -> f64 {
        self.he_preamble + self.data_symbols(n_packets, payload, dbps) as f64 * self.ofdm_symbol
    }

    /// Full RTS/CTS-protected TXOP:
    /// RTS + 3 SIFS + CTS + DATA + BACK + DIFS + T_e.
    pub fn txop_duration(&self, n_packets: u32, payload: u32, dbps: Dbps) -> f64 {
        self.control_time()
            + 3.0 * self.sifs
            + self.data_duration(n_packets, payload, dbps)
            + self.difs
            + self.slot_time
    }

    /// Largest aggregate whose TXOP fits in `budget`, capped at `delta`.
    /// Returns 0 when not even a single MPDU fits.
    pub fn max_packets_within(&self, budget: f64, payload: u32, dbps: Dbps, delta: u32) -> u32 {
        let spare = budget - self.fixed_txop_time();
        if spare < 0.0 || delta == 0 {
            return 0;
        }
        let symbols = (spare / self.ofdm_symbol + 1e-9).floor() as u64;
        let overhead = u64::from(self.mac_header_bits + self.tail_bits) as u128;
        let per_packet = u64::from(self.mpdu_delimiter_bits + payload) as u128;
        let capacity_scaled = symbols as u128 * dbps.num as u128;
        let needed_scaled = overhead * dbps.den as u128;
        let mut n = if capacity_scaled >= needed_scaled {
            let n = (capacity_scaled - needed_scaled) / (per_packet * dbps.den as u128);
            n.min(u128::from(delta)) as u32
        } else {
            0
        };
        // The closed form works on a floored symbol budget; settle the
        // boundary against the exact duration.
        while n > 0 && self.txop_duration(n, payload, dbps) > budget + TIME_EPS {
            n -= 1;
        }
        while n < delta && self.txop_duration(n + 1, payload, dbps) <= budget + TIME_EPS {
            n += 1;
        }
        n
    }

    /// Airtime left for NPCA inside an OBSS transmission of length `t_obss`.
    pub fn npca_budget(&self, t_obss: f64) -> f64 {
        let left = t_obss - self.t_npca - self.t_switch;
        if left <= TIME_EPS {
            0.0
        } else {
            left
        }
    }

    /// Channel access rate `alpha * 2 / ((CW - 1) T_e)`, the reciprocal of
    /// the mean backoff.
    pub fn lambda_from_cw(&self, cw: u32, alpha: f64) -> Result<f64> {
        if cw < 2 {
            return Err(Error::InvalidParameter(format!(
                "contention window must be at least 2, got {cw}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "activity scale must be positive, got {alpha}"
            )));
        }
        Ok(alpha * 2.0 / (f64::from(cw - 1) * self.slot_time))
    }
}

/// Modulation and coding scheme, indexed 1..=11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct McsProfile {
    pub index: u8,
    /// Coded bits per subcarrier as `num / den`.
    bits_num: u32,
    bits_den: u32,
    pub label: &'static str,
}

const MCS_TABLE: [(u32, u32, &str); 11] = [
    (1, 2, "BPSK 1/2"),
    (1, 1, "QPSK 1/2"),
    (3, 2, "QPSK 3/4"),
    (2, 1, "16-QAM 1/2"),
    (3, 1, "16-QAM 3/4"),
    (9, 2, "64-QAM 3/4"),
    (5, 1, "64-QAM 5/6"),
    (6, 1, "256-QAM 3/4"),
    (20, 3, "256-QAM 5/6"),
    (15, 2, "1024-QAM 3/4"),
    (25, 3, "1024-QAM 5/6"),
];

impl McsProfile {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 11;

    pub fn new(index: u8) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&index) {
            return Err(Error::InvalidParameter(format!(
                "MCS index must be in 1..=11, got {index}"
            )));
        }
        let (bits_num, bits_den, label) = MCS_TABLE[usize::from(index - 1)];
        Ok(Self {
            index,
            bits_num,
            bits_den,
            label,
        })
    }

    pub fn bits_per_subcarrier(&self) -> f64 {
        f64::from(self.bits_num) / f64::from(self.bits_den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelWidth {
    W20,
    W40,
    W80,
    W160,
}

impl ChannelWidth {
    pub fn from_mhz(mhz: u32) -> Result<Self> {
        match mhz {
            20 => Ok(Self::W20),
            40 => Ok(Self::W40),
            80 => Ok(Self::W80),
            160 => Ok(Self::W160),
            _ => Err(Error::InvalidParameter(format!("unsupported channel width {mhz} MHz"))),
        }
    }

    /// Width spanned by `units` basic 20 MHz channels.
    pub fn from_units(units: u8) -> Result<Self> {
        Self::from_mhz(u32::from(units) * 20)
    }

    pub fn mhz(self) -> u32 {
        match self {
            Self::W20 => 20,
            Self::W40 => 40,
            Self::W80 => 80,
            Self::W160 => 160,
        }
    }

    /// 802.11ax data tones for a full-bandwidth (non-OFDMA) PPDU.
    pub fn data_subcarriers(self) -> u32 {
        match self {
            Self::W20 => 234,
            Self::W40 => 468,
            Self::W80 => 980,
            Self::W160 => 1960,
        }
    }
}

/// Data bits per OFDM symbol as the exact rational `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dbps {
    num: u64,
    den: u64,
}

impl Dbps {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn symbols_for(self, bits: u64) -> u64 {
        let scaled = u128::from(bits) * u128::from(self.den);
        scaled.div_ceil(u128::from(self.num)) as u64
    }
}

pub fn dbps(mcs: McsProfile, width: ChannelWidth, n_ss: u8) -> Result<Dbps> {
    if !(1..=2).contains(&n_ss) {
        return Err(Error::InvalidParameter(format!(
            "spatial streams must be 1 or 2, got {n_ss}"
        )));
    }
    Ok(Dbps {
        num: u64::from(width.data_subcarriers()) * u64::from(mcs.bits_num) * u64::from(n_ss),
        den: u64::from(mcs.bits_den),
    })
}

/// Distance to MCS rule. Both built-in rules pass through
/// 1.5 m → 11, 5 m → 6 and 17 m → 1 and are monotone non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "points")]
pub enum McsMap {
    /// Linear interpolation in metres between the anchor points.
    #[default]
    PiecewiseLinear,
    /// `11 - 10 ln(d / 1.5) / ln(17 / 1.5)`, rounded and clamped.
    LogDistance,
    /// Explicit `(max_distance_m, mcs)` steps in increasing distance order;
    /// distances beyond the last step get MCS 1.
    Table(Vec<(f64, u8)>),
}

const ANCHORS: [(f64, f64); 3] = [(1.5, 11.0), (5.0, 6.0), (17.0, 1.0)];

impl McsMap {
    pub fn mcs_for(&self, distance: f64) -> Result<McsProfile> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distance must be positive, got {distance}"
            )));
        }
        let index = match self {
            McsMap::PiecewiseLinear => {
                let (d0, m0) = ANCHORS[0];
                let (dn, mn) = ANCHORS[ANCHORS.len() - 1];
                let raw = if distance <= d0 {
                    m0
                } else if distance >= dn {
                    mn
                } else {
                    let seg = ANCHORS
                        .windows(2)
                        .find(|w| distance <= w[1].0)
                        .expect("distance inside anchor span");
                    let (a, b) = (seg[0], seg[1]);
                    a.1 + (b.1 - a.1) * (distance - a.0) / (b.0 - a.0)
                };
                raw.round() as u8
            }
            McsMap::LogDistance => {
                if distance < 1.5 {
                    11
                } else {
                    let raw = 11.0 - 10.0 * (distance / 1.5).ln() / (17.0f64 / 1.5).ln();
                    raw.round().clamp(1.0, 11.0) as u8
                }
            }
            McsMap::Table(steps) => steps
                .iter()
                .find(|(max_d, _)| distance <= *max_d)
                .map_or(McsProfile::MIN, |&(_, m)| m),
        };
        McsProfile::new(index.clamp(McsProfile::MIN, McsProfile::MAX))
    }
}

/// Default distance rule.
pub fn mcs_from_distance(distance: f64) -> Result<McsProfile> {
    McsMap::default().mcs_for(distance)
}
