use std::path::PathBuf;
use std::process::{Command, Output};

fn npca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npca"))
        .args(args)
        .output()
        .expect("run npca")
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn reproduce_tables_is_byte_identical() {
    let (a, b) = (tmp("tables_a.csv"), tmp("tables_b.csv"));
    for path in [&a, &b] {
        let o = npca(&["reproduce-tables", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("scenario,engine,npca,grid_param,grid_value,bss,metric,statistic,value,seed,version\n"));
    assert!(text.contains("III,des,on,none,,D,collision_probability,mean,"));
}

#[test]
fn analyze_builtin_as_csv_and_json() {
    let csv = stdout(&npca(&["analyze", "--scenario", "builtin:I", "--npca", "on"]));
    let a = csv
        .lines()
        .find(|l| l.starts_with("I,ctmc,on,none,,A,throughput_mbps,value,"))
        .expect("A throughput row");
    let mbps: f64 = a.split(',').nth(8).unwrap().parse().unwrap();
    assert!((mbps - 850.7).abs() / 850.7 < 0.1, "{mbps}");

    let json = stdout(&npca(&["analyze", "--scenario", "builtin:III", "--format", "json"]));
    assert!(json.contains("\"states\""));
    assert!(json.contains("\"throughput_mbps\""));
}

#[test]
fn simulate_with_trace_and_scenario_file() {
    let scenario = tmp("scenario.json");
    std::fs::write(
        &scenario,
        r#"{"scenario": "II", "npca": true, "bsses": [{"id": "D", "alpha": 0.5}]}"#,
    )
    .unwrap();
    let trace = tmp("trace.csv");
    let out = stdout(&npca(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--duration",
        "1",
        "--seed",
        "4",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert!(out.contains("II,des,on,none,,D,collision_probability,mean,"));
    let trace = std::fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("time_s,bss,event,band,end_s,detail\n"));
    assert!(trace.lines().count() > 100);
}

#[test]
fn delay_writes_trajectory() {
    let trace = tmp("trajectory.csv");
    let out = stdout(&npca(&[
        "delay",
        "--scenario",
        "builtin:II",
        "--duration",
        "20",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    assert!(out.contains(",D,delay_ms,mean,"));
    let trace = std::fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("time,from,to,kind,bss\n"));
}

#[test]
fn sweep_emits_one_block_per_grid_point() {
    let out = stdout(&npca(&[
        "sweep",
        "--scenario",
        "builtin:I",
        "--npca",
        "on",
        "--grid",
        "mcs_pair=11:1,1:11",
        "--instances",
        "2",
        "--duration",
        "0.5",
    ]));
    assert!(out.contains("I,ctmc,on,mcs_pair,11:1,A,throughput_mbps,median,"));
    assert!(out.contains("I,ctmc,on,mcs_pair,1:11,A,throughput_mbps,median,"));
}

#[test]
fn exit_codes() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, r#"{"scenario": "I", "bsses": [{"id": "A", "delta": 2000}]}"#).unwrap();
    let o = npca(&["analyze", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bsses[0].delta"));

    assert_eq!(npca(&["analyze", "--npca", "maybe"]).status.code(), Some(1));
    assert_eq!(npca(&["sweep", "--grid", "speed=1"]).status.code(), Some(1));
    assert_eq!(npca(&["simulate", "--duration", "-1"]).status.code(), Some(1));
    assert_eq!(npca(&["--help"]).status.code(), Some(0));
}
