//! Randomized instances, engine dispatch and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctmc::analyze;
use crate::des::run_des_with;
use crate::error::{Error, Result};
use crate::harness::config::{BssConfig, InstanceDraw, ScenarioConfig};
use crate::harness::stats::{mean, BoxplotStats};
use crate::scenario::Scenario;
use crate::trajectory::estimate_delay;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Ctmc,
    Des,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Ctmc => "ctmc",
            Engine::Des => "des",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ctmc" => Ok(Engine::Ctmc),
            "des" => Ok(Engine::Des),
            _ => Err(Error::InvalidParameter(format!(
                "unknown engine {s:?}; use ctmc or des"
            ))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BssOutcome {
    pub id: String,
    /// bit/s
    pub throughput: f64,
    /// Mean channel access delay, seconds.
    pub delay: Option<f64>,
    /// DES only.
    pub collision_probability: Option<f64>,
}

/// Runs one engine on one fully specified scenario. `duration` is the DES
/// run length or the delay trajectory length.
pub fn evaluate(
    scenario: &Scenario,
    engine: Engine,
    config: &ScenarioConfig,
    duration: f64,
    seed: u64,
) -> Result<Vec<BssOutcome>> {
    let ids = scenario.bsses.iter().map(|b| b.id.clone());
    match engine {
        Engine::Ctmc => {
            let a = analyze(scenario, config.npca_model)?;
            let delays = estimate_delay(&a.space, &a.generator, duration, seed)?;
            Ok(ids
                .zip(a.throughput)
                .zip(delays.per_bss)
                .map(|((id, throughput), d)| BssOutcome {
                    id,
                    throughput,
                    delay: d.mean,
                    collision_probability: None,
                })
                .collect())
        }
        Engine::Des => {
            let run = run_des_with(scenario, duration, seed, &config.des)?;
            Ok(ids
                .zip(run.metrics.per_bss)
                .map(|(id, m)| BssOutcome {
                    id,
                    throughput: m.throughput,
                    delay: m.mean_delay,
                    collision_probability: Some(m.collision_probability),
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceResult {
    pub index: u32,
    pub seed: u64,
    pub draw: InstanceDraw,
    pub bsses: Vec<BssOutcome>,
    pub error: Option<String>,
}

/// Randomized values and engine seed for instance `index`. Distances are
/// drawn before Δ so instances keep the same geometry whether or not Δ is
/// randomized.
pub fn draw_instance(config: &ScenarioConfig, index: u32) -> (InstanceDraw, u64) {
    let base = derive_seed(config.seed, u64::from(index));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, 0));
    let n = config.bss_ids().len();
    let r = &config.randomizers;
    let distances = (0..n)
        .map(|_| {
            r.distance_range
                .map(|[lo, hi]| if lo < hi { rng.random_range(lo..=hi) } else { lo })
        })
        .collect();
    let deltas = (0..n)
        .map(|_| r.delta_range.map(|[lo, hi]| rng.random_range(lo..=hi)))
        .collect();
    (InstanceDraw { distances, deltas }, derive_seed(base, 1))
}

pub fn run_instance(config: &ScenarioConfig, engine: Engine, index: u32) -> InstanceResult {
    let (draw, seed) = draw_instance(config, index);
    let outcome = config
        .resolve(&draw)
        .and_then(|sc| evaluate(&sc, engine, config, config.duration, seed));
    let (bsses, error) = match outcome {
        Ok(b) => (b, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    InstanceResult {
        index,
        seed,
        draw,
        bsses,
        error,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BssAggregate {
    pub id: String,
    pub throughput: Option<BoxplotStats>,
    pub mean_delay: Option<f64>,
    pub mean_collision_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub scenario: String,
    pub engine: Engine,
    pub npca: bool,
    pub seed: u64,
    pub instances: u32,
    pub failures: usize,
    pub bsses: Vec<BssAggregate>,
    /// Sum over BSSs per instance.
    pub aggregate_throughput: Option<BoxplotStats>,
    pub results: Vec<InstanceResult>,
}

impl AggregateReport {
    pub fn bss(&self, id: &str) -> Option<&BssAggregate> {
        self.bsses.iter().find(|b| b.id == id)
    }

    /// Per-instance throughput of `id`, in instance order; failed instances
    /// are skipped.
    pub fn throughput_samples(&self, id: &str) -> Vec<f64> {
        self.results
            .iter()
            .filter_map(|r| r.bsses.iter().find(|b| b.id == id).map(|b| b.throughput))
            .collect()
    }
}

pub fn aggregate(config: &ScenarioConfig, engine: Engine, results: Vec<InstanceResult>) -> AggregateReport {
    let ok: Vec<&InstanceResult> = results.iter().filter(|r| r.error.is_none()).collect();
    let bsses = config
        .bss_ids()
        .into_iter()
        .map(|id| {
            let pick = |f: &dyn Fn(&BssOutcome) -> Option<f64>| -> Vec<f64> {
                ok.iter()
                    .filter_map(|r| r.bsses.iter().find(|b| b.id == id).and_then(f))
                    .collect()
            };
            BssAggregate {
                throughput: BoxplotStats::from_samples(&pick(&|b| Some(b.throughput))),
                mean_delay: mean(&pick(&|b| b.delay)),
                mean_collision_probability: mean(&pick(&|b| b.collision_probability)),
                id,
            }
        })
        .collect();
    let totals: Vec<f64> = ok.iter().map(|r| r.bsses.iter().map(|b| b.throughput).sum()).collect();
    AggregateReport {
        scenario: config.scenario.clone(),
        engine,
        npca: config.npca,
        seed: config.seed,
        instances: config.instances,
        failures: results.len() - ok.len(),
        bsses,
        aggregate_throughput: BoxplotStats::from_samples(&totals),
        results,
    }
}

/// Evaluates `config.instances` instances in parallel. Per-instance
/// failures are recorded in the report rather than aborting the run.
pub fn monte_carlo(config: &ScenarioConfig, engine: Engine) -> Result<AggregateReport> {
    let diags = crate::harness::config::validate(config);
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    let results: Vec<InstanceResult> = (0..config.instances)
        .into_par_iter()
        .map(|i| run_instance(config, engine, i))
        .collect();
    Ok(aggregate(config, engine, results))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "param", content = "values", rename_all = "snake_case")]
pub enum Grid {
    /// Fixed Δ for every BSS.
    Delta(Vec<u32>),
    /// Activity scale of BSS D.
    AlphaD(Vec<f64>),
    /// MCS of the first and second BSS.
    McsPair(Vec<(u8, u8)>),
}

impl Grid {
    pub fn param(&self) -> &'static str {
        match self {
            Grid::Delta(_) => "delta",
            Grid::AlphaD(_) => "alpha_d",
            Grid::McsPair(_) => "mcs_pair",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Delta(v) => v.len(),
            Grid::AlphaD(v) => v.len(),
            Grid::McsPair(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            Grid::Delta(v) => v[i].to_string(),
            Grid::AlphaD(v) => v[i].to_string(),
            Grid::McsPair(v) => format!("{}:{}", v[i].0, v[i].1),
        }
    }

    /// `config` with grid point `i` applied.
    pub fn apply(&self, config: &ScenarioConfig, i: usize) -> Result<ScenarioConfig> {
        let mut c = config.clone();
        let ids = c.bss_ids();
        match self {
            Grid::Delta(v) => {
                c.randomizers.delta_range = None;
                for id in &ids {
                    override_mut(&mut c, id).delta = Some(v[i]);
                }
            }
            Grid::AlphaD(v) => {
                if !ids.iter().any(|id| id == "D") {
                    return Err(Error::InvalidParameter(format!(
                        "alpha_d grid needs a BSS named D in scenario {}",
                        c.scenario
                    )));
                }
                override_mut(&mut c, "D").alpha = Some(v[i]);
            }
            Grid::McsPair(v) => {
                if ids.len() < 2 {
                    return Err(Error::InvalidParameter("mcs_pair grid needs at least two BSSs".into()));
                }
                override_mut(&mut c, &ids[0]).mcs = Some(v[i].0);
                override_mut(&mut c, &ids[1]).mcs = Some(v[i].1);
            }
        }
        Ok(c)
    }
}

fn override_mut<'a>(c: &'a mut ScenarioConfig, id: &str) -> &'a mut BssConfig {
    let pos = match c.bsses.iter().position(|b| b.id == id) {
        Some(p) => p,
        None => {
            c.bsses.push(BssConfig {
                id: id.to_string(),
                ..BssConfig::default()
            });
            c.bsses.len() - 1
        }
    };
    &mut c.bsses[pos]
}

impl FromStr for Grid {
    type Err = Error;

    /// `delta=8,32,128`, `alpha_d=0.25,1` or `mcs_pair=11:1,1:11`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("bad grid {s:?}: {msg}"));
        let (key, values) = s.split_once('=').ok_or_else(|| bad("expected key=v1,v2,...".into()))?;
        let items: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if items.is_empty() {
            return Err(bad("no values".into()));
        }
        let grid = match key.trim() {
            "delta" => Grid::Delta(
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| bad(format!("{v:?} is not a count"))))
                    .collect::<Result<_>>()?,
            ),
            "alpha_d" => Grid::AlphaD(
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| bad(format!("{v:?} is not a number"))))
                    .collect::<Result<_>>()?,
            ),
            "mcs_pair" => Grid::McsPair(
                items
                    .iter()
                    .map(|v| {
                        let (a, b) = v.split_once(':').ok_or_else(|| bad(format!("{v:?} is not a:b")))?;
                        let p = |x: &str| x.parse::<u8>().map_err(|_| bad(format!("{x:?} is not an MCS index")));
                        Ok((p(a)?, p(b)?))
                    })
                    .collect::<Result<_>>()?,
            ),
            other => {
                return Err(bad(format!(
                    "unknown parameter {other:?}; use delta, alpha_d or mcs_pair"
                )))
            }
        };
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: String,
    pub report: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub points: Vec<SweepPoint>,
}

/// A full Monte Carlo evaluation per grid point. Instance seeds do not
/// depend on the grid point, so every point sees the same random draws.
pub fn sweep(config: &ScenarioConfig, grid: &Grid, engine: Engine) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let points = (0..grid.len())
        .map(|i| {
            let c = grid.apply(config, i)?;
            Ok(SweepPoint {
                value: grid.label(i),
                report: monte_carlo(&c, engine)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepReport {
        param: grid.param().into(),
        points,
    })
}
