//! Side-by-side Markov model and simulator results for Scenarios I-III,
//! with and without NPCA, at the validation setup (A at 1.5 m, B at 17 m,
//! C and D at 5 m, Δ = 128).

use rayon::prelude::*;
use serde::Serialize;

use crate::ctmc::{analyze, NpcaTxopModel};
use crate::des::{run_des_with, DesConfig, DesMetrics};
use crate::error::Result;
use crate::harness::builtin::{builtin_scenario, BuiltinOptions, ScenarioId};
use crate::harness::montecarlo::{derive_seed, Engine};
use crate::harness::output::{Row, RowContext, NO_GRID};
use crate::trajectory::estimate_delay;

pub const SCENARIOS: [ScenarioId; 3] = [ScenarioId::I, ScenarioId::II, ScenarioId::III];

#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub runs: u32,
    /// Seconds per simulator run.
    pub run_duration: f64,
    /// Seconds of Markov trajectory used for the delay column.
    pub trajectory_duration: f64,
    pub model: NpcaTxopModel,
    pub des: DesConfig,
    pub builtin: BuiltinOptions,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            runs: 5,
            run_duration: 50.0,
            trajectory_duration: 1000.0,
            model: NpcaTxopModel::default(),
            des: DesConfig::default(),
            builtin: BuiltinOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub scenario: ScenarioId,
    pub npca: bool,
    pub engine: Engine,
    pub bss: String,
    /// bit/s
    pub throughput: f64,
    /// seconds
    pub delay: Option<f64>,
    pub collision_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TablesReport {
    pub seed: u64,
    pub entries: Vec<TableEntry>,
}

impl TablesReport {
    pub fn get(&self, scenario: ScenarioId, npca: bool, engine: Engine, bss: &str) -> Option<&TableEntry> {
        self.entries
            .iter()
            .find(|e| e.scenario == scenario && e.npca == npca && e.engine == engine && e.bss == bss)
    }

    /// Throughput in Mbit/s, delay in ms.
    pub fn rows(&self) -> Vec<Row> {
        let mut out = Vec::new();
        for e in &self.entries {
            let ctx = RowContext {
                scenario: e.scenario.to_string(),
                engine: e.engine.to_string(),
                npca: e.npca,
                grid_param: NO_GRID.into(),
                grid_value: String::new(),
                seed: self.seed,
            };
            out.push(ctx.row(&e.bss, "throughput_mbps", "mean", e.throughput * 1e-6));
            if let Some(d) = e.delay {
                out.push(ctx.row(&e.bss, "delay_ms", "mean", d * 1e3));
            }
            if let Some(p) = e.collision_probability {
                out.push(ctx.row(&e.bss, "collision_probability", "mean", p));
            }
        }
        out
    }
}

enum Job {
    Ctmc { case: usize },
    Des { case: usize, run: u32 },
}

enum JobResult {
    Ctmc(Vec<TableEntry>),
    Des(DesMetrics),
}

pub fn reproduce_tables(seed: u64, options: &TableOptions) -> Result<TablesReport> {
    let cases: Vec<(ScenarioId, bool)> = [false, true]
        .into_iter()
        .flat_map(|npca| SCENARIOS.map(|s| (s, npca)))
        .collect();
    let scenarios = cases
        .iter()
        .map(|&(s, npca)| builtin_scenario(s, npca, &options.builtin))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for case in 0..cases.len() {
        jobs.push(Job::Ctmc { case });
        for run in 0..options.runs {
            jobs.push(Job::Des { case, run });
        }
    }
    let results = jobs
        .par_iter()
        .map(|job| -> Result<JobResult> {
            match *job {
                Job::Ctmc { case } => {
                    let (id, npca) = cases[case];
                    let sc = &scenarios[case];
                    let a = analyze(sc, options.model)?;
                    let stream = derive_seed(seed, case as u64);
                    let delays = estimate_delay(&a.space, &a.generator, options.trajectory_duration, stream)?;
                    Ok(JobResult::Ctmc(
                        sc.bsses
                            .iter()
                            .enumerate()
                            .map(|(n, b)| TableEntry {
                                scenario: id,
                                npca,
                                engine: Engine::Ctmc,
                                bss: b.id.clone(),
                                throughput: a.throughput[n],
                                delay: delays.per_bss[n].mean,
                                collision_probability: None,
                            })
                            .collect(),
                    ))
                }
                Job::Des { case, run } => {
                    let stream = derive_seed(derive_seed(seed, case as u64), 1 + u64::from(run));
                    let r = run_des_with(&scenarios[case], options.run_duration, stream, &options.des)?;
                    Ok(JobResult::Des(r.metrics))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::new();
    let mut it = results.into_iter();
    for (case, &(id, npca)) in cases.iter().enumerate() {
        let Some(JobResult::Ctmc(ctmc)) = it.next() else {
            unreachable!("job order")
        };
        let runs: Vec<DesMetrics> = (0..options.runs)
            .map(|_| match it.next() {
                Some(JobResult::Des(m)) => m,
                _ => unreachable!("job order"),
            })
            .collect();
        entries.extend(ctmc);
        if let Some(des) = DesMetrics::combine(&runs) {
            for (b, m) in scenarios[case].bsses.iter().zip(des.per_bss) {
                entries.push(TableEntry {
                    scenario: id,
                    npca,
                    engine: Engine::Des,
                    bss: b.id.clone(),
                    throughput: m.throughput,
                    delay: m.mean_delay,
                    collision_probability: Some(m.collision_probability),
                });
            }
        }
    }
    Ok(TablesReport { seed, entries })
}
