//! Long-format CSV rows and JSON reports.
//!
//! Every row carries the scenario, engine, NPCA switch, seed and crate
//! version so result files can be traced back to the run that made them.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::harness::montecarlo::{AggregateReport, SweepReport};
use crate::harness::stats::BoxplotStats;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const NO_GRID: &str = "none";
/// `bss` value of rows summing all BSSs.
pub const ALL_BSS: &str = "ALL";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scenario: String,
    pub engine: String,
    pub npca: String,
    pub grid_param: String,
    pub grid_value: String,
    pub bss: String,
    pub metric: String,
    pub statistic: String,
    pub value: f64,
    pub seed: u64,
    pub version: String,
}

/// Shared columns of a group of rows.
#[derive(Debug, Clone)]
pub struct RowContext {
    pub scenario: String,
    pub engine: String,
    pub npca: bool,
    pub grid_param: String,
    pub grid_value: String,
    pub seed: u64,
}

impl RowContext {
    pub fn row(&self, bss: &str, metric: &str, statistic: &str, value: f64) -> Row {
        Row {
            scenario: self.scenario.clone(),
            engine: self.engine.clone(),
            npca: if self.npca { "on" } else { "off" }.into(),
            grid_param: self.grid_param.clone(),
            grid_value: self.grid_value.clone(),
            bss: bss.into(),
            metric: metric.into(),
            statistic: statistic.into(),
            value,
            seed: self.seed,
            version: VERSION.into(),
        }
    }
}

fn boxplot_rows(ctx: &RowContext, bss: &str, metric: &str, scale: f64, s: &BoxplotStats, out: &mut Vec<Row>) {
    let stats = [
        ("count", s.count as f64),
        ("mean", s.mean * scale),
        ("min", s.min * scale),
        ("q1", s.q1 * scale),
        ("median", s.median * scale),
        ("q3", s.q3 * scale),
        ("max", s.max * scale),
        ("whisker_low", s.whisker_low * scale),
        ("whisker_high", s.whisker_high * scale),
    ];
    for (name, v) in stats {
        out.push(ctx.row(bss, metric, name, v));
    }
    for &o in &s.outliers {
        out.push(ctx.row(bss, metric, "outlier", o * scale));
    }
}

/// Throughput in Mbit/s, delay in ms.
pub fn report_rows(report: &AggregateReport, grid_param: &str, grid_value: &str) -> Vec<Row> {
    let ctx = RowContext {
        scenario: report.scenario.clone(),
        engine: report.engine.to_string(),
        npca: report.npca,
        grid_param: grid_param.into(),
        grid_value: grid_value.into(),
        seed: report.seed,
    };
    let mut out = Vec::new();
    for b in &report.bsses {
        if let Some(s) = &b.throughput {
            boxplot_rows(&ctx, &b.id, "throughput_mbps", 1e-6, s, &mut out);
        }
        if let Some(d) = b.mean_delay {
            out.push(ctx.row(&b.id, "delay_ms", "mean", d * 1e3));
        }
        if let Some(p) = b.mean_collision_probability {
            out.push(ctx.row(&b.id, "collision_probability", "mean", p));
        }
    }
    if let Some(s) = &report.aggregate_throughput {
        boxplot_rows(&ctx, ALL_BSS, "throughput_mbps", 1e-6, s, &mut out);
    }
    out.push(ctx.row(ALL_BSS, "failed_instances", "count", report.failures as f64));
    out
}

pub fn sweep_rows(report: &SweepReport) -> Vec<Row> {
    report
        .points
        .iter()
        .flat_map(|p| report_rows(&p.report, &report.param, &p.value))
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
