//! Spectrum bookkeeping in basic 20 MHz channel units.
//!
//! Unit 0..=3 is the lower 80 MHz ("Ch1"), 4..=7 the upper 80 MHz ("Ch2").

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::phy::ChannelWidth;

/// Number of 20 MHz units addressable by a [`UnitMask`].
pub const MAX_UNITS: u8 = 32;

/// Bit set of occupied 20 MHz units.
pub type UnitMask = u32;

/// A contiguous, width-aligned block of 20 MHz units (20/40/80/160 MHz).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BandSet {
    start: u8,
    len: u8,
}

impl BandSet {
    pub const CH1: BandSet = BandSet { start: 0, len: 4 };
    pub const CH2: BandSet = BandSet { start: 4, len: 4 };
    pub const CH1_2: BandSet = BandSet { start: 0, len: 8 };

    pub fn new(start: u8, len: u8) -> Result<Self> {
        if !matches!(len, 1 | 2 | 4 | 8) {
            return Err(Error::InvalidScenario(format!(
                "band of {len} units is not 20/40/80/160 MHz"
            )));
        }
        if !start.is_multiple_of(len) {
            return Err(Error::InvalidScenario(format!(
                "band starting at unit {start} is not aligned to its width of {len} units"
            )));
        }
        if u16::from(start) + u16::from(len) > u16::from(MAX_UNITS) {
            return Err(Error::InvalidScenario(format!(
                "band {start}+{len} exceeds {MAX_UNITS} units"
            )));
        }
        Ok(Self { start, len })
    }

    pub fn start(self) -> u8 {
        self.start
    }

    /// Width in 20 MHz units.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> u8 {
        self.len
    }

    pub fn width(self) -> ChannelWidth {
        ChannelWidth::from_units(self.len).expect("validated on construction")
    }

    pub fn mask(self) -> UnitMask {
        let ones = if self.len >= 32 {
            u32::MAX
        } else {
            (1u32 << self.len) - 1
        };
        ones << self.start
    }

    pub fn units(self) -> impl Iterator<Item = u8> {
        self.start..self.start + self.len
    }

    pub fn contains_unit(self, unit: u8) -> bool {
        (self.start..self.start + self.len).contains(&unit)
    }

    pub fn overlaps(self, other: BandSet) -> bool {
        self.mask() & other.mask() != 0
    }

    pub fn is_subset_of(self, other: BandSet) -> bool {
        self.mask() & !other.mask() == 0
    }

    pub fn is_idle_in(self, busy: UnitMask) -> bool {
        self.mask() & busy == 0
    }

    /// Lower and upper halves; `None` for a single 20 MHz unit.
    pub fn halves(self) -> Option<(BandSet, BandSet)> {
        (self.len > 1).then(|| {
            let h = self.len / 2;
            (
                BandSet {
                    start: self.start,
                    len: h,
                },
                BandSet {
                    start: self.start + h,
                    len: h,
                },
            )
        })
    }

    /// The half of `self` containing `unit`, and the other half.
    pub fn split_at_unit(self, unit: u8) -> Option<(BandSet, BandSet)> {
        let (lo, hi) = self.halves()?;
        if lo.contains_unit(unit) {
            Some((lo, hi))
        } else if hi.contains_unit(unit) {
            Some((hi, lo))
        } else {
            None
        }
    }

    /// Aligned sub-bands of `self` containing `unit`, widest first.
    pub fn nested_around(self, unit: u8) -> impl Iterator<Item = BandSet> {
        let mut len = if self.contains_unit(unit) { self.len } else { 0 };
        std::iter::from_fn(move || {
            if len == 0 {
                return None;
            }
            let band = BandSet {
                start: unit / len * len,
                len,
            };
            len /= 2;
            Some(band)
        })
    }

    /// Widest aligned idle sub-band of `self` that contains `unit`.
    pub fn widest_idle_around(self, unit: u8, busy: UnitMask) -> Option<BandSet> {
        self.nested_around(unit).find(|b| b.is_idle_in(busy))
    }
}

impl fmt::Display for BandSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BandSet::CH1 => f.write_str("ch1"),
            BandSet::CH2 => f.write_str("ch2"),
            BandSet::CH1_2 => f.write_str("ch1+2"),
            b if b.len == 1 => write!(f, "u{}", b.start),
            b => write!(f, "u{}-{}", b.start, b.start + b.len - 1),
        }
    }
}

impl FromStr for BandSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ch1" => return Ok(BandSet::CH1),
            "ch2" => return Ok(BandSet::CH2),
            "ch1+2" | "ch12" => return Ok(BandSet::CH1_2),
            _ => {}
        }
        let bad = || Error::InvalidScenario(format!("cannot parse band {s:?}"));
        let body = lower.strip_prefix('u').ok_or_else(bad)?;
        let (lo, hi) = match body.split_once('-') {
            Some((a, b)) => (a.parse::<u8>().map_err(|_| bad())?, b.parse::<u8>().map_err(|_| bad())?),
            None => {
                let u = body.parse::<u8>().map_err(|_| bad())?;
                (u, u)
            }
        };
        if hi < lo {
            return Err(bad());
        }
        BandSet::new(lo, hi - lo + 1)
    }
}

impl Serialize for BandSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BandSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
