//! Scenario files: a built-in deployment or a custom BSS list, plus PHY
//! overrides, Monte Carlo randomizers and run settings.
//!
//! ```json
//! {
//!   "scenario": "II",
//!   "npca": true,
//!   "bsses": [{ "id": "D", "alpha": 0.5 }],
//!   "randomizers": { "distance_range": [1.0, 17.0] },
//!   "instances": 500,
//!   "seed": 1
//! }
//! ```
//!
//! For built-in scenarios `bsses` entries override fields of the BSS with
//! the same id. For `"custom"` every entry defines a BSS and must give its
//! allocation and primary unit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::band::BandSet;
use crate::ctmc::NpcaTxopModel;
use crate::des::DesConfig;
use crate::error::{Diagnostic, Error, Result};
use crate::harness::builtin::{builtin_scenario, deployment_bss, BuiltinOptions, ScenarioId};
use crate::phy::{McsMap, McsProfile, PhyParams};
use crate::scenario::{BssSpec, Scenario, MAX_DELTA};

pub const CUSTOM: &str = "custom";
pub const DEFAULT_DELTA: u32 = 128;
/// Per-instance simulated time, seconds.
pub const DEFAULT_DURATION: f64 = 10.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BssConfig {
    pub id: String,
    pub allocation: Option<BandSet>,
    pub primary_unit: Option<u8>,
    pub npca_capable: Option<bool>,
    /// Station distance in metres; mapped to an MCS.
    pub distance: Option<f64>,
    /// Explicit MCS index; wins over any distance.
    pub mcs: Option<u8>,
    pub delta: Option<u32>,
    pub alpha: Option<f64>,
    pub cw_min: Option<u32>,
    pub n_ss: Option<u8>,
    pub payload_bits: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Randomizers {
    /// Per-BSS distance drawn uniformly from this range, metres.
    pub distance_range: Option<[f64; 2]>,
    /// Per-BSS Δ drawn uniformly from this inclusive integer range.
    pub delta_range: Option<[u32; 2]>,
}

impl Randomizers {
    pub fn is_active(&self) -> bool {
        self.distance_range.is_some() || self.delta_range.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// `I`, `II`, `III`, `Full` or `custom`.
    pub scenario: String,
    #[serde(alias = "npca_enabled_global")]
    pub npca: bool,
    pub bsses: Vec<BssConfig>,
    pub phy: PhyParams,
    pub mcs_map: McsMap,
    pub npca_model: NpcaTxopModel,
    pub randomizers: Randomizers,
    pub instances: u32,
    pub seed: u64,
    /// Simulated seconds per instance (DES run or delay trajectory).
    pub duration: f64,
    pub des: DesConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "I".into(),
            npca: false,
            bsses: Vec::new(),
            phy: PhyParams::default(),
            mcs_map: McsMap::default(),
            npca_model: NpcaTxopModel::default(),
            randomizers: Randomizers::default(),
            instances: 1,
            seed: 0,
            duration: DEFAULT_DURATION,
            des: DesConfig::default(),
        }
    }
}

/// Values drawn for one Monte Carlo instance, by BSS position.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InstanceDraw {
    pub distances: Vec<Option<f64>>,
    pub deltas: Vec<Option<u32>>,
}

impl ScenarioConfig {
    pub fn builtin(which: ScenarioId, npca: bool) -> Self {
        Self {
            scenario: which.to_string(),
            npca,
            ..Self::default()
        }
    }

    pub fn is_custom(&self) -> bool {
        self.scenario.eq_ignore_ascii_case(CUSTOM)
    }

    pub fn builtin_id(&self) -> Option<ScenarioId> {
        if self.is_custom() {
            None
        } else {
            self.scenario.parse().ok()
        }
    }

    /// Ids of the BSSs this config resolves to, in order.
    pub fn bss_ids(&self) -> Vec<String> {
        match self.builtin_id() {
            Some(id) => id.active().iter().map(|s| s.to_string()).collect(),
            None => self.bsses.iter().map(|b| b.id.clone()).collect(),
        }
    }

    fn override_for(&self, id: &str) -> Option<&BssConfig> {
        self.bsses.iter().find(|b| b.id == id)
    }

    /// Builds the scenario for one instance. `draw` values apply to BSSs
    /// without an explicit MCS (distance) or Δ.
    pub fn resolve(&self, draw: &InstanceDraw) -> Result<Scenario> {
        let mut bsses = match self.builtin_id() {
            Some(which) => {
                let opts = BuiltinOptions {
                    delta: DEFAULT_DELTA,
                    mcs_map: self.mcs_map.clone(),
                    phy: self.phy.clone(),
                    ..BuiltinOptions::default()
                };
                let base = builtin_scenario(which, self.npca, &opts)?;
                for o in &self.bsses {
                    if base.index_of(&o.id).is_none() {
                        return Err(Error::InvalidScenario(format!(
                            "BSS {} is not part of scenario {which}",
                            o.id
                        )));
                    }
                }
                base.bsses
            }
            None if self.is_custom() => self
                .bsses
                .iter()
                .map(|o| {
                    let (Some(allocation), Some(primary)) = (o.allocation, o.primary_unit) else {
                        return Err(Error::InvalidScenario(format!(
                            "custom BSS {} needs allocation and primary_unit",
                            o.id
                        )));
                    };
                    let mut b = BssSpec::new(o.id.clone(), allocation, primary, McsProfile::new(McsProfile::MIN)?);
                    b.delta = DEFAULT_DELTA;
                    Ok(b)
                })
                .collect::<Result<Vec<_>>>()?,
            None => {
                return Err(Error::InvalidScenario(format!("unknown scenario {:?}", self.scenario)));
            }
        };

        for (i, b) in bsses.iter_mut().enumerate() {
            let o = self.override_for(&b.id).cloned().unwrap_or_default();
            if let Some(a) = o.allocation {
                b.allocation = a;
            }
            if let Some(p) = o.primary_unit {
                b.primary_unit = p;
            }
            if let Some(c) = o.npca_capable {
                b.npca_enabled = c;
            }
            let distance = draw.distances.get(i).copied().flatten().or(o.distance);
            if let Some(m) = o.mcs {
                b.mcs = McsProfile::new(m)?;
            } else if let Some(d) = distance {
                b.mcs = self.mcs_map.mcs_for(d)?;
            } else if self.is_custom() {
                return Err(Error::InvalidScenario(format!(
                    "custom BSS {} needs mcs or distance",
                    b.id
                )));
            }
            if let Some(d) = o.delta.or(draw.deltas.get(i).copied().flatten()) {
                b.delta = d;
            }
            if let Some(a) = o.alpha {
                b.alpha = a;
            }
            if let Some(c) = o.cw_min {
                b.cw_min = c;
            }
            if let Some(n) = o.n_ss {
                b.n_ss = n;
            }
            if let Some(l) = o.payload_bits {
                b.payload_bits = l;
            }
        }
        Scenario::new(bsses, self.phy.clone(), self.npca)
    }

    /// The scenario without any randomization.
    pub fn resolve_fixed(&self) -> Result<Scenario> {
        self.resolve(&InstanceDraw::default())
    }
}

/// Every invariant violation in `config`, each tagged with its field path.
pub fn validate(config: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |path: String, msg: String| out.push(Diagnostic::new(path, msg));

    if !config.is_custom() && config.builtin_id().is_none() {
        bad(
            "scenario".into(),
            format!("unknown scenario {:?}; use I, II, III, Full or custom", config.scenario),
        );
    }
    if config.instances < 1 {
        bad("instances".into(), "must be at least 1".into());
    }
    if !(config.duration.is_finite() && config.duration > 0.0) {
        bad("duration".into(), format!("must be positive, got {}", config.duration));
    }
    if let Err(e) = config.phy.validate() {
        bad("phy".into(), e.to_string());
    }
    if config.des.cw_max < 2 {
        bad(
            "des.cw_max".into(),
            format!("must be at least 2, got {}", config.des.cw_max),
        );
    }
    if let Some(c) = config.des.collision_duration {
        if !(c.is_finite() && c > 0.0) {
            bad("des.collision_duration".into(), format!("must be positive, got {c}"));
        }
    }
    if let Some([lo, hi]) = config.randomizers.distance_range {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            bad(
                "randomizers.distance_range".into(),
                format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
            );
        }
    }
    if let Some([lo, hi]) = config.randomizers.delta_range {
        if !(1 <= lo && lo <= hi && hi <= MAX_DELTA) {
            bad(
                "randomizers.delta_range".into(),
                format!("need 1 <= lo <= hi <= {MAX_DELTA}, got [{lo}, {hi}]"),
            );
        }
    }

    let builtin = config.builtin_id();
    for (i, b) in config.bsses.iter().enumerate() {
        let p = |field: &str| format!("bsses[{i}].{field}");
        if b.id.is_empty() {
            bad(p("id"), "must not be empty".into());
        } else if config.bsses[..i].iter().any(|o| o.id == b.id) {
            bad(p("id"), format!("duplicate id {:?}", b.id));
        } else if let Some(which) = builtin {
            if !which.active().contains(&b.id.as_str()) {
                bad(p("id"), format!("no BSS {:?} in scenario {which}", b.id));
            }
        }
        if config.is_custom() {
            if b.allocation.is_none() {
                bad(p("allocation"), "required for custom scenarios".into());
            }
            if b.primary_unit.is_none() {
                bad(p("primary_unit"), "required for custom scenarios".into());
            }
            if b.mcs.is_none() && b.distance.is_none() && config.randomizers.distance_range.is_none() {
                bad(p("mcs"), "custom BSS needs mcs or distance".into());
            }
        }
        let allocation = b
            .allocation
            .or_else(|| deployment_bss(&b.id).filter(|_| builtin.is_some()).map(|d| d.0));
        let primary = b
            .primary_unit
            .or_else(|| deployment_bss(&b.id).filter(|_| builtin.is_some()).map(|d| d.1));
        if let (Some(a), Some(u)) = (allocation, primary) {
            if !a.contains_unit(u) {
                bad(p("primary_unit"), format!("unit {u} is outside allocation {a}"));
            }
            if b.npca_capable == Some(true) && a.len() < 2 {
                bad(p("npca_capable"), format!("allocation {a} is too narrow for NPCA"));
            }
        }
        if let Some(d) = b.distance {
            if !(d.is_finite() && d > 0.0) {
                bad(p("distance"), format!("must be positive, got {d}"));
            }
        }
        if let Some(m) = b.mcs {
            if !(McsProfile::MIN..=McsProfile::MAX).contains(&m) {
                bad(p("mcs"), format!("must be in 1..=11, got {m}"));
            }
        }
        if let Some(d) = b.delta {
            if !(1..=MAX_DELTA).contains(&d) {
                bad(p("delta"), format!("must be in [1, {MAX_DELTA}], got {d}"));
            }
        }
        if let Some(a) = b.alpha {
            if !(a.is_finite() && a > 0.0) {
                bad(p("alpha"), format!("must be positive, got {a}"));
            }
        }
        if let Some(c) = b.cw_min {
            if c < 2 {
                bad(p("cw_min"), format!("must be at least 2, got {c}"));
            }
        }
        if let Some(n) = b.n_ss {
            if !(1..=2).contains(&n) {
                bad(p("n_ss"), format!("must be 1 or 2, got {n}"));
            }
        }
        if b.payload_bits == Some(0) {
            bad(p("payload_bits"), "must be positive".into());
        }
    }
    if config.is_custom() && config.bsses.is_empty() {
        bad("bsses".into(), "custom scenarios need at least one BSS".into());
    }

    let clean = out.is_empty();
    if clean {
        if let Err(e) = config.resolve_fixed() {
            // Distances may legitimately come only from the randomizer.
            let needs_draw = config.is_custom() && config.randomizers.distance_range.is_some();
            if !needs_draw {
                out.push(Diagnostic::new("bsses", e.to_string()));
            }
        }
    }
    out
}

pub fn parse_scenario(text: &str, origin: &Path) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: origin.to_path_buf(),
        source,
    })?;
    let diags = validate(&config);
    if diags.is_empty() {
        Ok(config)
    } else {
        Err(Error::Validation(diags))
    }
}

/// Reads, parses and validates a JSON scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidScenario(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_scenario(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse(r#"{"scenario": "I"}"#).unwrap();
        assert_eq!(c.instances, 1);
        assert_eq!(c.phy, PhyParams::default());
        let sc = c.resolve_fixed().unwrap();
        let direct = builtin_scenario(ScenarioId::I, false, &BuiltinOptions::default()).unwrap();
        assert_eq!(sc, direct);
    }

    #[test]
    fn delta_out_of_range_names_field() {
        let err = parse(r#"{"scenario": "I", "bsses": [{"id": "A", "delta": 2000}]}"#).unwrap_err();
        let Error::Validation(d) = err else { panic!("{err}") };
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "bsses[0].delta");
        assert_eq!(Error::Validation(d).exit_code(), 1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            parse(r#"{"scenario": "I", "instance": 3}"#),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse(r#"{"scenario": "I", "bsses": [{"id": "A", "detla": 3}]}"#),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse(r#"{"phy": {"slot": 1}}"#), Err(Error::Parse { .. })));
    }

    #[test]
    fn every_violation_reported() {
        let err = parse(
            r#"{"scenario": "II", "instances": 0,
                "randomizers": {"delta_range": [0, 5000]},
                "bsses": [{"id": "Z"}, {"id": "D", "alpha": -1, "mcs": 12}]}"#,
        )
        .unwrap_err();
        let Error::Validation(d) = err else { panic!("{err}") };
        let paths: Vec<_> = d.iter().map(|x| x.path.as_str()).collect();
        assert_eq!(
            paths,
            [
                "instances",
                "randomizers.delta_range",
                "bsses[0].id",
                "bsses[1].mcs",
                "bsses[1].alpha"
            ]
        );
    }

    #[test]
    fn overlapping_primaries_on_disjoint_allocations_are_legal() {
        let c = parse(
            r#"{"scenario": "custom", "bsses": [
                {"id": "X", "allocation": "ch1", "primary_unit": 0, "mcs": 6},
                {"id": "Y", "allocation": "ch2", "primary_unit": 4, "mcs": 6}]}"#,
        )
        .unwrap();
        assert_eq!(c.resolve_fixed().unwrap().bsses.len(), 2);
    }

    #[test]
    fn custom_needs_allocation() {
        let err = parse(r#"{"scenario": "custom", "bsses": [{"id": "X", "mcs": 6}]}"#).unwrap_err();
        let Error::Validation(d) = err else { panic!() };
        assert!(d.iter().any(|x| x.path == "bsses[0].allocation"));
    }

    #[test]
    fn overrides_and_draws() {
        let c = parse(r#"{"scenario": "II", "npca": true, "bsses": [{"id": "D", "alpha": 0.5, "mcs": 3}]}"#).unwrap();
        let draw = InstanceDraw {
            distances: vec![Some(17.0), Some(1.0), Some(1.0)],
            deltas: vec![Some(5), None, Some(7)],
        };
        let sc = c.resolve(&draw).unwrap();
        assert_eq!(sc.bsses[0].mcs.index, 1);
        assert_eq!(sc.bsses[0].delta, 5);
        assert_eq!(sc.bsses[1].delta, DEFAULT_DELTA);
        // Explicit MCS wins over the drawn distance.
        assert_eq!(sc.bsses[2].mcs.index, 3);
        assert_eq!(sc.bsses[2].alpha, 0.5);
        assert!(sc.npca);
    }

    #[test]
    fn alias_for_global_switch() {
        let c = parse(r#"{"scenario": "III", "npca_enabled_global": true}"#).unwrap();
        assert!(c.npca);
    }
}
