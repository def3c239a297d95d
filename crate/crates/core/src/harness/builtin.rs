//! The four-BSS deployment and its three active subsets.
//!
//! A and C hold the full 160 MHz (primaries on Ch1 and Ch2 respectively,
//! each able to use the other half for NPCA); B and D hold 80 MHz on Ch1
//! and Ch2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::band::BandSet;
use crate::error::{Error, Result};
use crate::phy::{McsMap, PhyParams};
use crate::scenario::{BssSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    I,
    II,
    III,
    Full,
}

impl ScenarioId {
    pub fn active(self) -> &'static [&'static str] {
        match self {
            ScenarioId::I => &["A", "B"],
            ScenarioId::II => &["A", "B", "D"],
            ScenarioId::III | ScenarioId::Full => &["A", "B", "C", "D"],
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioId::I => "I",
            ScenarioId::II => "II",
            ScenarioId::III => "III",
            ScenarioId::Full => "Full",
        })
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(ScenarioId::I),
            "II" | "2" => Ok(ScenarioId::II),
            "III" | "3" => Ok(ScenarioId::III),
            "FULL" => Ok(ScenarioId::Full),
            _ => Err(Error::InvalidScenario(format!("unknown builtin scenario {s:?}"))),
        }
    }
}

/// Knobs for the built-in deployments. The defaults are the validation
/// setup: A at 1.5 m, B at 17 m, C and D at 5 m, Δ = 128.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinOptions {
    pub alpha_d: f64,
    pub delta: u32,
    /// Station distances for A, B, C, D in metres.
    pub distances: [f64; 4],
    pub mcs_map: McsMap,
    pub phy: PhyParams,
}

impl Default for BuiltinOptions {
    fn default() -> Self {
        Self {
            alpha_d: 1.0,
            delta: 128,
            distances: [1.5, 17.0, 5.0, 5.0],
            mcs_map: McsMap::default(),
            phy: PhyParams::default(),
        }
    }
}

/// The deployment's BSS definitions, before distances are applied.
pub fn deployment_bss(id: &str) -> Option<(BandSet, u8, bool)> {
    match id {
        "A" => Some((BandSet::CH1_2, 0, true)),
        "B" => Some((BandSet::CH1, 0, false)),
        "C" => Some((BandSet::CH1_2, 4, true)),
        "D" => Some((BandSet::CH2, 4, false)),
        _ => None,
    }
}

pub fn builtin_scenario(which: ScenarioId, npca: bool, options: &BuiltinOptions) -> Result<Scenario> {
    let mut bsses = Vec::new();
    for &id in which.active() {
        let (allocation, primary, npca_capable) = deployment_bss(id).expect("known id");
        let slot = usize::from(id.as_bytes()[0] - b'A');
        let mcs = options.mcs_map.mcs_for(options.distances[slot])?;
        let mut b = BssSpec::new(id, allocation, primary, mcs);
        b.npca_enabled = npca_capable;
        b.delta = options.delta;
        if id == "D" {
            b.alpha = options.alpha_d;
        }
        bsses.push(b);
    }
    Scenario::new(bsses, options.phy.clone(), npca)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_one_layout() {
        let sc = builtin_scenario(ScenarioId::I, false, &BuiltinOptions::default()).unwrap();
        assert_eq!(sc.bsses.len(), 2);
        assert_eq!(sc.bsses[0].allocation, BandSet::CH1_2);
        assert_eq!(sc.bsses[1].allocation, BandSet::CH1);
        assert_eq!(sc.bsses[0].mcs.index, 11);
        assert_eq!(sc.bsses[1].mcs.index, 1);
        assert!(!sc.npca);
    }

    #[test]
    fn scenario_three_is_symmetric() {
        let sc = builtin_scenario(ScenarioId::III, true, &BuiltinOptions::default()).unwrap();
        let ids: Vec<_> = sc.bsses.iter().map(|b| b.id.as_str()).collect();
        assert_eq!(ids, ["A", "B", "C", "D"]);
        assert_eq!(sc.bsses[2].npca_band(), Some(BandSet::CH1));
        assert_eq!(sc.bsses[0].npca_band(), Some(BandSet::CH2));
        assert_eq!(sc.bsses[2].mcs.index, 6);
    }

    #[test]
    fn alpha_scales_only_d() {
        let opts = BuiltinOptions {
            alpha_d: 0.25,
            ..BuiltinOptions::default()
        };
        let sc = builtin_scenario(ScenarioId::II, true, &opts).unwrap();
        let d = sc.index_of("D").unwrap();
        let a = sc.index_of("A").unwrap();
        assert!((sc.lambda(d).unwrap() - 0.25 * sc.lambda(a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn parse_ids() {
        assert_eq!("ii".parse::<ScenarioId>().unwrap(), ScenarioId::II);
        assert!("IV".parse::<ScenarioId>().is_err());
    }
}
