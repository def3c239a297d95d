use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use npca::ctmc::{access_rates, analyze};
use npca::des::{self, run_des_with, DesConfig};
use npca::harness::output::{report_rows, sweep_rows, write_csv, write_json, Row, RowContext, ALL_BSS, NO_GRID};
use npca::harness::{
    load_scenario, monte_carlo, reproduce_tables, sweep, validate, AggregateReport, Engine, Grid, ScenarioConfig,
    ScenarioId, TableOptions,
};
use npca::trajectory::{self, estimate_delay, simulate_chain};
use npca::{Error, Result};

#[derive(Parser)]
#[command(
    name = "npca",
    version,
    about = "Throughput and access delay of overlapping BSSs with NPCA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Markov model of one fixed configuration.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimate channel access delays from a trajectory of the Markov model.
    Delay {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write the trajectory events as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo evaluation, by default with the event simulator.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = EngineArg::Des)]
        engine: EngineArg,
        /// Write the event trace of a single simulator run as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo evaluation at every point of a parameter grid.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long, value_enum, default_value_t = EngineArg::Ctmc)]
        engine: EngineArg,
        /// `delta=8,32,128`, `alpha_d=0.25,0.5,1` or `mcs_pair=11:1,1:11`.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        grid: Grid,
    },
    /// Model and simulator results side by side for Scenarios I-III.
    ReproduceTables {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent simulator runs per case.
        #[arg(long, default_value_t = 5)]
        runs: u32,
        /// Seconds per simulator run.
        #[arg(long, default_value_t = 50.0)]
        duration: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or `builtin:I`, `builtin:II`, `builtin:III`, `builtin:Full`.
    #[arg(long, default_value = "builtin:I", value_name = "PATH|builtin:ID")]
    scenario: String,
    #[arg(long, value_enum)]
    npca: Option<Switch>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    instances: Option<u32>,
    /// Simulated seconds per run or trajectory.
    #[arg(long, value_name = "SECONDS")]
    duration: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Ctmc,
    Des,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Ctmc => Engine::Ctmc,
            EngineArg::Des => Engine::Des,
        }
    }
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut config = match self.scenario.strip_prefix("builtin:") {
            Some(id) => ScenarioConfig::builtin(id.parse::<ScenarioId>()?, false),
            None => load_scenario(&self.scenario)?,
        };
        if let Some(s) = self.npca {
            config.npca = matches!(s, Switch::On);
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(n) = self.instances {
            config.instances = n;
        }
        if let Some(d) = self.duration {
            config.duration = d;
        }
        let diags = validate(&config);
        if diags.is_empty() {
            Ok(config)
        } else {
            Err(Error::Validation(diags))
        }
    }
}

impl OutputArgs {
    fn emit<T: Serialize>(&self, rows: &[Row], report: &T) -> Result<()> {
        let sink: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        };
        let mut sink = BufWriter::new(sink);
        match self.format {
            Format::Csv => write_csv(&mut sink, rows)?,
            Format::Json => write_json(&mut sink, report)?,
        }
        sink.flush()?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn context(config: &ScenarioConfig, engine: Engine) -> RowContext {
    RowContext {
        scenario: config.scenario.clone(),
        engine: engine.to_string(),
        npca: config.npca,
        grid_param: NO_GRID.into(),
        grid_value: String::new(),
        seed: config.seed,
    }
}

#[derive(Serialize)]
struct StateProbability {
    state: String,
    probability: f64,
}

#[derive(Serialize)]
struct BssResult {
    id: String,
    throughput_mbps: f64,
    accesses_per_second: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    scenario: String,
    npca: bool,
    bsses: Vec<BssResult>,
    states: Vec<StateProbability>,
}

fn run_analyze(args: &ScenarioArgs, output: &OutputArgs) -> Result<()> {
    let config = args.load()?;
    let sc = config.resolve_fixed()?;
    let a = analyze(&sc, config.npca_model)?;
    let rates = access_rates(&a.stationary, &a.space);
    let report = AnalyzeReport {
        scenario: config.scenario.clone(),
        npca: config.npca,
        bsses: sc
            .bsses
            .iter()
            .enumerate()
            .map(|(n, b)| BssResult {
                id: b.id.clone(),
                throughput_mbps: a.throughput[n] * 1e-6,
                accesses_per_second: rates[n],
            })
            .collect(),
        states: a
            .space
            .states
            .iter()
            .zip(&a.stationary.pi)
            .map(|(s, &p)| StateProbability {
                state: s.label(&sc),
                probability: p,
            })
            .collect(),
    };
    let ctx = context(&config, Engine::Ctmc);
    let mut rows = Vec::new();
    for b in &report.bsses {
        rows.push(ctx.row(&b.id, "throughput_mbps", "value", b.throughput_mbps));
        rows.push(ctx.row(&b.id, "access_rate_hz", "value", b.accesses_per_second));
    }
    rows.push(ctx.row(ALL_BSS, "states", "count", report.states.len() as f64));
    output.emit(&rows, &report)
}

#[derive(Serialize)]
struct DelayEntry {
    id: String,
    mean_ms: Option<f64>,
    std_dev_ms: Option<f64>,
    samples: u64,
}

#[derive(Serialize)]
struct DelayOutput {
    scenario: String,
    npca: bool,
    seed: u64,
    duration: f64,
    bsses: Vec<DelayEntry>,
}

fn run_delay(args: &ScenarioArgs, output: &OutputArgs, trace: Option<&Path>) -> Result<()> {
    let config = args.load()?;
    let sc = config.resolve_fixed()?;
    let a = analyze(&sc, config.npca_model)?;
    let d = estimate_delay(&a.space, &a.generator, config.duration, config.seed)?;
    if let Some(path) = trace {
        let events = simulate_chain(&a.generator, config.duration, config.seed)?;
        let mut w = create(path)?;
        trajectory::write_trace(&mut w, events)?;
        w.flush()?;
    }
    let report = DelayOutput {
        scenario: config.scenario.clone(),
        npca: config.npca,
        seed: config.seed,
        duration: config.duration,
        bsses: sc
            .bsses
            .iter()
            .zip(&d.per_bss)
            .map(|(b, s)| DelayEntry {
                id: b.id.clone(),
                mean_ms: s.mean.map(|x| x * 1e3),
                std_dev_ms: s.std_dev.map(|x| x * 1e3),
                samples: s.count,
            })
            .collect(),
    };
    let ctx = context(&config, Engine::Ctmc);
    let mut rows = Vec::new();
    for b in &report.bsses {
        if let Some(m) = b.mean_ms {
            rows.push(ctx.row(&b.id, "delay_ms", "mean", m));
        }
        if let Some(s) = b.std_dev_ms {
            rows.push(ctx.row(&b.id, "delay_ms", "std_dev", s));
        }
        rows.push(ctx.row(&b.id, "delay_ms", "count", b.samples as f64));
    }
    output.emit(&rows, &report)
}

/// Reports failed instances on stderr; they turn into exit code 2.
fn check_failures(report: &AggregateReport) -> Result<()> {
    if report.failures == 0 {
        return Ok(());
    }
    for r in report.results.iter().filter(|r| r.error.is_some()) {
        eprintln!("instance {}: {}", r.index, r.error.as_deref().unwrap_or_default());
    }
    Err(Error::Model(format!(
        "{} of {} instances failed",
        report.failures, report.instances
    )))
}

fn run_simulate(args: &ScenarioArgs, output: &OutputArgs, engine: Engine, trace: Option<&Path>) -> Result<()> {
    let config = args.load()?;
    if let Some(path) = trace {
        if engine != Engine::Des {
            return Err(Error::InvalidParameter("--trace needs --engine des".into()));
        }
        let cfg = DesConfig {
            trace: true,
            ..config.des.clone()
        };
        let run = run_des_with(&config.resolve_fixed()?, config.duration, config.seed, &cfg)?;
        let mut w = create(path)?;
        des::write_trace(&mut w, &run.trace)?;
        w.flush()?;
    }
    let report = monte_carlo(&config, engine)?;
    output.emit(&report_rows(&report, NO_GRID, ""), &report)?;
    check_failures(&report)
}

fn run_sweep(args: &ScenarioArgs, output: &OutputArgs, engine: Engine, grid: &Grid) -> Result<()> {
    let config = args.load()?;
    let report = sweep(&config, grid, engine)?;
    output.emit(&sweep_rows(&report), &report)?;
    for p in &report.points {
        check_failures(&p.report)?;
    }
    Ok(())
}

fn run_tables(seed: u64, runs: u32, duration: f64, output: &OutputArgs) -> Result<()> {
    if runs == 0 {
        return Err(Error::InvalidParameter("--runs must be at least 1".into()));
    }
    let options = TableOptions {
        runs,
        run_duration: duration,
        ..TableOptions::default()
    };
    let report = reproduce_tables(seed, &options)?;
    output.emit(&report.rows(), &report)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { scenario, output } => run_analyze(&scenario, &output),
        Command::Delay {
            scenario,
            output,
            trace,
        } => run_delay(&scenario, &output, trace.as_deref()),
        Command::Simulate {
            scenario,
            output,
            engine,
            trace,
        } => run_simulate(&scenario, &output, engine.into(), trace.as_deref()),
        Command::Sweep {
            scenario,
            output,
            engine,
            grid,
        } => run_sweep(&scenario, &output, engine.into(), &grid),
        Command::ReproduceTables {
            seed,
            runs,
            duration,
            output,
        } => run_tables(seed, runs, duration, &output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as invalid input.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
