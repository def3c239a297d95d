//! Slotted discrete-event simulation of saturated 802.11 BSSs with binary
//! exponential backoff, RTS/CTS-protected TXOPs, dynamic channel bonding
//! and NPCA mode switching.
//!
//! Time is kept in integer nanoseconds. Every transmission occupies its
//! band for the full TXOP, trailing DIFS and slot included, so a backoff
//! counter of `c` fires exactly `c` slots after the counting channel last
//! became idle. Counters reaching zero at the same instant on overlapping
//! bands collide.
//!
//! Each BSS has a single backoff instance. While an OBSS transmission holds
//! its primary half, an NPCA-capable BSS moves that instance to its NPCA
//! primary channel `T_NPCA` after the OBSS start and comes back
//! `T_switch` before the OBSS ends, drawing a fresh counter if its backoff
//! ran out there.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::band::{BandSet, UnitMask};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, TxKind};

pub const DEFAULT_CW_MAX: u32 = 1024;

pub type Nanos = u64;

fn to_nanos(seconds: f64) -> Nanos {
    (seconds * 1e9).round() as Nanos
}

fn to_seconds(ns: Nanos) -> f64 {
    ns as f64 * 1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesConfig {
    pub cw_max: u32,
    /// Airtime lost to a collision. Defaults to RTS + DIFS + one slot.
    pub collision_duration: Option<f64>,
    /// Record a per-event trace.
    pub trace: bool,
}

impl Default for DesConfig {
    fn default() -> Self {
        Self {
            cw_max: DEFAULT_CW_MAX,
            collision_duration: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BssMetrics {
    /// Delivered payload, bit/s.
    pub throughput: f64,
    /// Mean time from scheduling a transmission to its Block ACK, seconds.
    pub mean_delay: Option<f64>,
    pub collision_probability: f64,
    pub attempts: u64,
    pub collisions: u64,
    pub successes: u64,
    pub npca_successes: u64,
    pub delivered_packets: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesMetrics {
    pub duration: f64,
    pub per_bss: Vec<BssMetrics>,
}

impl DesMetrics {
    /// Combines independent runs: counters and airtime add up, so the
    /// result is what one long run would report.
    pub fn combine(runs: &[DesMetrics]) -> Option<DesMetrics> {
        let first = runs.first()?;
        let duration: f64 = runs.iter().map(|r| r.duration).sum();
        let per_bss = (0..first.per_bss.len())
            .map(|n| {
                let sum = |f: fn(&BssMetrics) -> u64| runs.iter().map(|r| f(&r.per_bss[n])).sum::<u64>();
                let attempts = sum(|m| m.attempts);
                let collisions = sum(|m| m.collisions);
                let successes = sum(|m| m.successes);
                let bits: f64 = runs.iter().map(|r| r.per_bss[n].throughput * r.duration).sum();
                let delay_total: f64 = runs
                    .iter()
                    .filter_map(|r| r.per_bss[n].mean_delay.map(|d| d * r.per_bss[n].successes as f64))
                    .sum();
                BssMetrics {
                    throughput: bits / duration,
                    mean_delay: (successes > 0).then(|| delay_total / successes as f64),
                    collision_probability: if attempts == 0 {
                        0.0
                    } else {
                        collisions as f64 / attempts as f64
                    },
                    attempts,
                    collisions,
                    successes,
                    npca_successes: sum(|m| m.npca_successes),
                    delivered_packets: sum(|m| m.delivered_packets),
                }
            })
            .collect();
        Some(DesMetrics { duration, per_bss })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TraceEvent {
    /// A transmission that won contention alone.
    TxStart {
        kind: TxKind,
        band: BandSet,
        end: Nanos,
        n_packets: u32,
    },
    Collision {
        band: BandSet,
        end: Nanos,
    },
    TxEnd {
        success: bool,
    },
    NpcaSwitch {
        blocker: usize,
        deadline: Nanos,
    },
    /// Counter hit zero on the NPCA channel but no TXOP fits before the
    /// deadline.
    NpcaStall,
    NpcaReturn {
        redraw: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: Nanos,
    pub bss: usize,
    pub event: TraceEvent,
}

#[derive(Debug, Clone)]
pub struct DesRun {
    pub metrics: DesMetrics,
    pub trace: Vec<TraceRecord>,
}

/// Writes `time_s,bss,event,band,end_s,detail` records.
pub fn write_trace<W: Write>(mut out: W, trace: &[TraceRecord]) -> Result<()> {
    writeln!(out, "time_s,bss,event,band,end_s,detail")?;
    for r in trace {
        let t = to_seconds(r.time);
        match r.event {
            TraceEvent::TxStart {
                kind,
                band,
                end,
                n_packets,
            } => {
                let kind = match kind {
                    TxKind::Legacy => "legacy".to_string(),
                    TxKind::Dcb => "dcb".to_string(),
                    TxKind::Npca { blocker } => format!("npca:{blocker}"),
                };
                writeln!(
                    out,
                    "{t:.9},{},tx,{band},{:.9},{kind}/{n_packets}",
                    r.bss,
                    to_seconds(end)
                )?
            }
            TraceEvent::Collision { band, end } => {
                writeln!(out, "{t:.9},{},collision,{band},{:.9},", r.bss, to_seconds(end))?
            }
            TraceEvent::TxEnd { success } => writeln!(
                out,
                "{t:.9},{},end,,,{}",
                r.bss,
                if success { "ok" } else { "collided" }
            )?,
            TraceEvent::NpcaSwitch { blocker, deadline } => writeln!(
                out,
                "{t:.9},{},npca_switch,,{:.9},{blocker}",
                r.bss,
                to_seconds(deadline)
            )?,
            TraceEvent::NpcaStall => writeln!(out, "{t:.9},{},npca_stall,,,", r.bss)?,
            TraceEvent::NpcaReturn { redraw } => writeln!(
                out,
                "{t:.9},{},npca_return,,,{}",
                r.bss,
                if redraw { "redraw" } else { "keep" }
            )?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Legacy,
    Npca {
        blocker: usize,
        deadline: Nanos,
        /// Counter is at zero but nothing fits before the deadline.
        stalled: bool,
    },
}

#[derive(Debug, Clone)]
struct Station {
    cw: u32,
    counter: u32,
    /// Start of the current idle countdown on the counting channel.
    counting_since: Option<Nanos>,
    mode: Mode,
    transmitting: bool,
    pending_switch: Option<(Nanos, usize)>,
    last_ack: Nanos,
    delay_sum: f64,
    metrics: BssMetrics,
}

#[derive(Debug, Clone, Copy)]
struct Airtime {
    bss: usize,
    band: BandSet,
    end: Nanos,
    kind: TxKind,
    collided: bool,
    n_packets: u32,
}

struct Sim<'a> {
    scenario: &'a Scenario,
    cfg: &'a DesConfig,
    rng: ChaCha8Rng,
    slot: Nanos,
    collision_ns: Nanos,
    t_npca: Nanos,
    t_switch: Nanos,
    ack_tail: Nanos,
    stations: Vec<Station>,
    active: Vec<Airtime>,
    trace: Option<Vec<TraceRecord>>,
}

impl Sim<'_> {
    fn log(&mut self, time: Nanos, bss: usize, event: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRecord { time, bss, event });
        }
    }

    fn busy(&self) -> UnitMask {
        self.active.iter().fold(0, |m, a| m | a.band.mask())
    }

    fn draw(&mut self, cw: u32) -> u32 {
        self.rng.random_range(0..cw)
    }

    fn counting_unit(&self, n: usize) -> Option<u8> {
        let b = &self.scenario.bsses[n];
        match self.stations[n].mode {
            Mode::Legacy => Some(b.primary_unit),
            Mode::Npca { stalled: true, .. } => None,
            Mode::Npca { .. } => b.npca_primary_unit(),
        }
    }

    fn fire_time(&self, n: usize) -> Option<Nanos> {
        let s = &self.stations[n];
        s.counting_since.map(|g| g + u64::from(s.counter) * self.slot)
    }

    /// Freezes a running countdown, keeping only whole elapsed slots.
    fn pause(&mut self, n: usize, t: Nanos) {
        let slot = self.slot;
        let s = &mut self.stations[n];
        if let Some(g) = s.counting_since.take() {
            let elapsed = ((t - g) / slot).min(u64::from(s.counter)) as u32;
            s.counter -= elapsed;
        }
    }

    fn next_event(&self) -> Option<Nanos> {
        let ends = self.active.iter().map(|a| a.end);
        let fires = (0..self.stations.len()).filter_map(|n| self.fire_time(n));
        let switches = self.stations.iter().filter_map(|s| s.pending_switch.map(|p| p.0));
        let returns = self.stations.iter().filter_map(|s| match s.mode {
            Mode::Npca { deadline, .. } => Some(deadline),
            Mode::Legacy => None,
        });
        ends.chain(fires).chain(switches).chain(returns).min()
    }

    fn finish_transmissions(&mut self, t: Nanos) -> Result<()> {
        let (done, still): (Vec<Airtime>, Vec<Airtime>) = self.active.iter().partition(|a| a.end == t);
        self.active = still;
        let cw_min_of = |n: usize| self.scenario.bsses[n].cw_min;
        for a in done {
            let n = a.bss;
            if a.collided {
                self.stations[n].cw = (self.stations[n].cw * 2).min(self.cfg.cw_max.max(cw_min_of(n)));
            } else {
                let keep = 1.0 - self.scenario.phy.per;
                let delivered = Binomial::new(u64::from(a.n_packets), keep)
                    .map_err(|e| Error::Model(format!("packet loss draw: {e}")))?
                    .sample(&mut self.rng);
                let ack = t.saturating_sub(self.ack_tail);
                let s = &mut self.stations[n];
                s.metrics.successes += 1;
                s.metrics.delivered_packets += delivered;
                if a.kind.is_npca() {
                    s.metrics.npca_successes += 1;
                }
                s.delay_sum += to_seconds(ack - s.last_ack);
                s.last_ack = ack;
                s.cw = cw_min_of(n);
            }
            let cw = self.stations[n].cw;
            let counter = self.draw(cw);
            let s = &mut self.stations[n];
            s.transmitting = false;
            s.counter = counter;
            s.counting_since = None;
            self.log(t, n, TraceEvent::TxEnd { success: !a.collided });
        }
        Ok(())
    }

    fn npca_returns(&mut self, t: Nanos) {
        for n in 0..self.stations.len() {
            let Mode::Npca { deadline, .. } = self.stations[n].mode else {
                continue;
            };
            if deadline != t {
                continue;
            }
            self.pause(n, t);
            // A TXOP on the NPCA channel already drew a fresh counter when it
            // ended; only an exhausted counter needs replacing.
            let redraw = self.stations[n].counter == 0;
            if redraw {
                let cw = self.stations[n].cw;
                self.stations[n].counter = self.draw(cw);
            }
            self.stations[n].mode = Mode::Legacy;
            self.log(t, n, TraceEvent::NpcaReturn { redraw });
        }
    }

    fn npca_switches(&mut self, t: Nanos) {
        for n in 0..self.stations.len() {
            let Some((at, blocker)) = self.stations[n].pending_switch else {
                continue;
            };
            if at != t {
                continue;
            }
            self.stations[n].pending_switch = None;
            if self.stations[n].transmitting || self.stations[n].mode != Mode::Legacy {
                continue;
            }
            let bss = &self.scenario.bsses[n];
            if self.busy() & (1 << bss.primary_unit) == 0 {
                continue;
            }
            let half = bss.primary_half();
            let mut over = self.active.iter().filter(|a| a.band.overlaps(half));
            let (Some(b), None) = (over.next(), over.next()) else {
                continue;
            };
            if b.bss != blocker || b.collided || b.kind.is_npca() {
                continue;
            }
            let Some(deadline) = b.end.checked_sub(self.t_switch).filter(|&d| d > t) else {
                continue;
            };
            self.pause(n, t);
            self.stations[n].mode = Mode::Npca {
                blocker,
                deadline,
                stalled: false,
            };
            self.log(t, n, TraceEvent::NpcaSwitch { blocker, deadline });
        }
    }

    fn resume_countdowns(&mut self, t: Nanos) {
        let busy = self.busy();
        for n in 0..self.stations.len() {
            if self.stations[n].transmitting || self.stations[n].counting_since.is_some() {
                continue;
            }
            if let Some(u) = self.counting_unit(n) {
                if busy & (1 << u) == 0 {
                    self.stations[n].counting_since = Some(t);
                }
            }
        }
    }

    fn pause_blocked(&mut self, t: Nanos) {
        let busy = self.busy();
        for n in 0..self.stations.len() {
            if self.stations[n].counting_since.is_none() {
                continue;
            }
            match self.counting_unit(n) {
                Some(u) if busy & (1 << u) == 0 => {}
                _ => self.pause(n, t),
            }
        }
    }

    /// Transmission a station would start at `t`, or `None` if it stalls.
    fn plan_access(&self, n: usize, t: Nanos, busy: UnitMask) -> Result<Option<(BandSet, TxKind, u32, Nanos)>> {
        let b = &self.scenario.bsses[n];
        match self.stations[n].mode {
            Mode::Legacy => {
                let band = b
                    .allocation
                    .widest_idle_around(b.primary_unit, busy)
                    .ok_or_else(|| Error::Model(format!("BSS {} fired on a busy primary", b.id)))?;
                let p = self.scenario.access_profile(n, band)?;
                Ok(Some((band, p.kind, p.n_packets, to_nanos(p.duration))))
            }
            Mode::Npca { blocker, deadline, .. } => {
                let npca = b
                    .npca_band()
                    .ok_or_else(|| Error::Model("NPCA without NPCA band".into()))?;
                let band = npca
                    .widest_idle_around(npca.start(), busy)
                    .ok_or_else(|| Error::Model(format!("BSS {} fired on a busy NPCA channel", b.id)))?;
                let phy = &self.scenario.phy;
                let budget = to_seconds(deadline - t).min(phy.t_max);
                let rate = b.dbps(band)?;
                let mut n_packets = phy.max_packets_within(budget, b.payload_bits, rate, b.delta);
                while n_packets > 0 && t + to_nanos(phy.txop_duration(n_packets, b.payload_bits, rate)) > deadline {
                    n_packets -= 1;
                }
                if n_packets == 0 {
                    return Ok(None);
                }
                let dur = to_nanos(phy.txop_duration(n_packets, b.payload_bits, rate));
                Ok(Some((band, TxKind::Npca { blocker }, n_packets, dur)))
            }
        }
    }

    fn contend(&mut self, t: Nanos) -> Result<()> {
        let firing: Vec<usize> = (0..self.stations.len())
            .filter(|&n| self.fire_time(n) == Some(t))
            .collect();
        if firing.is_empty() {
            return Ok(());
        }
        let busy = self.busy();
        let mut planned = Vec::new();
        for n in firing {
            match self.plan_access(n, t, busy)? {
                Some(p) => planned.push((n, p)),
                None => {
                    let s = &mut self.stations[n];
                    s.counting_since = None;
                    s.counter = 0;
                    if let Mode::Npca { stalled, .. } = &mut s.mode {
                        *stalled = true;
                    }
                    self.log(t, n, TraceEvent::NpcaStall);
                }
            }
        }
        // Overlap groups: any firing station touching another's band collides.
        let mut new_blockers = Vec::new();
        for (i, &(n, (band, kind, n_packets, dur))) in planned.iter().enumerate() {
            let collided = planned
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.1 .0.overlaps(band));
            let end = t + if collided { self.collision_ns } else { dur };
            self.active.push(Airtime {
                bss: n,
                band,
                end,
                kind,
                collided,
                n_packets,
            });
            let s = &mut self.stations[n];
            s.transmitting = true;
            s.counting_since = None;
            s.metrics.attempts += 1;
            if collided {
                s.metrics.collisions += 1;
            }
            if collided {
                self.log(t, n, TraceEvent::Collision { band, end });
            } else {
                self.log(
                    t,
                    n,
                    TraceEvent::TxStart {
                        kind,
                        band,
                        end,
                        n_packets,
                    },
                );
                if !kind.is_npca() {
                    new_blockers.push((n, band));
                }
            }
        }
        for (blocker, band) in new_blockers {
            for n in 0..self.stations.len() {
                if n == blocker || !self.scenario.uses_npca(n) {
                    continue;
                }
                let s = &self.stations[n];
                if s.transmitting || s.mode != Mode::Legacy {
                    continue;
                }
                if self.scenario.bsses[n].primary_half().overlaps(band) {
                    self.stations[n].pending_switch = Some((t + self.t_npca, blocker));
                }
            }
        }
        Ok(())
    }

    fn check_invariants(&self) {
        for (n, s) in self.stations.iter().enumerate() {
            let cw_min = self.scenario.bsses[n].cw_min;
            debug_assert!(s.cw >= cw_min && s.cw <= self.cfg.cw_max.max(cw_min));
            debug_assert!(s.counter < s.cw);
            debug_assert!(!(s.transmitting && s.counting_since.is_some()));
        }
        debug_assert!({
            let ok: Vec<_> = self.active.iter().filter(|a| !a.collided).collect();
            ok.iter()
                .enumerate()
                .all(|(i, a)| ok[i + 1..].iter().all(|b| !a.band.overlaps(b.band)))
        });
    }
}

pub fn run_des(scenario: &Scenario, duration: f64, seed: u64) -> Result<DesMetrics> {
    Ok(run_des_with(scenario, duration, seed, &DesConfig::default())?.metrics)
}

pub fn run_des_with(scenario: &Scenario, duration: f64, seed: u64, cfg: &DesConfig) -> Result<DesRun> {
    scenario.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if cfg.cw_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "cw_max must be >= 2, got {}",
            cfg.cw_max
        )));
    }
    let phy = &scenario.phy;
    let collision = cfg
        .collision_duration
        .unwrap_or_else(|| phy.rts_time() + phy.difs + phy.slot_time);
    if !(collision.is_finite() && collision > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "collision duration must be positive, got {collision}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stations = scenario
        .bsses
        .iter()
        .map(|b| Station {
            cw: b.cw_min,
            counter: rng.random_range(0..b.cw_min),
            counting_since: None,
            mode: Mode::Legacy,
            transmitting: false,
            pending_switch: None,
            last_ack: 0,
            delay_sum: 0.0,
            metrics: BssMetrics::default(),
        })
        .collect();
    let mut sim = Sim {
        scenario,
        cfg,
        rng,
        slot: to_nanos(phy.slot_time),
        collision_ns: to_nanos(collision),
        t_npca: to_nanos(phy.t_npca),
        t_switch: to_nanos(phy.t_switch),
        ack_tail: to_nanos(phy.difs + phy.slot_time),
        stations,
        active: Vec::new(),
        trace: cfg.trace.then(Vec::new),
    };

    let end = to_nanos(duration);
    sim.resume_countdowns(0);
    while let Some(t) = sim.next_event() {
        if t > end {
            break;
        }
        sim.finish_transmissions(t)?;
        sim.npca_returns(t);
        sim.npca_switches(t);
        sim.resume_countdowns(t);
        sim.contend(t)?;
        sim.pause_blocked(t);
        sim.check_invariants();
    }

    let per_bss = sim
        .stations
        .iter()
        .zip(&scenario.bsses)
        .map(|(s, b)| {
            let m = &s.metrics;
            BssMetrics {
                throughput: m.delivered_packets as f64 * f64::from(b.payload_bits) / duration,
                mean_delay: (m.successes > 0).then(|| s.delay_sum / m.successes as f64),
                collision_probability: if m.attempts == 0 {
                    0.0
                } else {
                    m.collisions as f64 / m.attempts as f64
                },
                ..*m
            }
        })
        .collect();
    Ok(DesRun {
        metrics: DesMetrics { duration, per_bss },
        trace: sim.trace.unwrap_or_default(),
    })
}

/// Fraction of collided attempts among `n` identical saturated BSSs
/// sharing one 80 MHz channel.
pub fn collision_probability_check(n: usize, duration: f64, seed: u64) -> Result<f64> {
    use crate::phy::McsProfile;
    use crate::scenario::BssSpec;

    if n == 0 {
        return Err(Error::InvalidParameter("need at least one contender".into()));
    }
    let mcs = McsProfile::new(6)?;
    let bsses = (0..n)
        .map(|i| {
            let mut b = BssSpec::new(format!("S{i}"), BandSet::CH1, 0, mcs);
            b.delta = 128;
            b
        })
        .collect();
    let sc = Scenario::new(bsses, Default::default(), false)?;
    let m = run_des(&sc, duration, seed)?;
    let attempts: u64 = m.per_bss.iter().map(|b| b.attempts).sum();
    let collisions: u64 = m.per_bss.iter().map(|b| b.collisions).sum();
    Ok(if attempts == 0 {
        0.0
    } else {
        collisions as f64 / attempts as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::McsProfile;
    use crate::scenario::BssSpec;

    fn lone_bss() -> Scenario {
        let mut b = BssSpec::new("A", BandSet::CH1, 0, McsProfile::new(6).unwrap());
        b.delta = 64;
        Scenario::new(vec![b], Default::default(), false).unwrap()
    }

    #[test]
    fn lone_bss_renewal_throughput() {
        let sc = lone_bss();
        let m = run_des(&sc, 20.0, 5).unwrap();
        let p = sc.access_profile(0, BandSet::CH1).unwrap();
        let mean_backoff = (f64::from(sc.bsses[0].cw_min) - 1.0) / 2.0 * sc.phy.slot_time;
        let expected = (1.0 - sc.phy.per) * f64::from(p.n_packets) * 11_200.0 / (mean_backoff + p.duration);
        let got = m.per_bss[0].throughput;
        assert!((got - expected).abs() < 0.01 * expected, "{got} vs {expected}");
        assert_eq!(m.per_bss[0].collisions, 0);
        let delay = m.per_bss[0].mean_delay.unwrap();
        assert!((delay - (mean_backoff + p.duration)).abs() < 0.01 * delay);
    }

    #[test]
    fn disjoint_channels_never_collide() {
        let mcs = McsProfile::new(6).unwrap();
        let a = BssSpec::new("A", BandSet::CH1, 0, mcs);
        let b = BssSpec::new("B", BandSet::CH2, 4, mcs);
        let sc = Scenario::new(vec![a, b], Default::default(), false).unwrap();
        let m = run_des(&sc, 5.0, 1).unwrap();
        assert!(m.per_bss.iter().all(|b| b.collisions == 0 && b.successes > 0));
    }

    #[test]
    fn deterministic_per_seed() {
        let sc = lone_bss();
        assert_eq!(run_des(&sc, 1.0, 3).unwrap(), run_des(&sc, 1.0, 3).unwrap());
        assert_ne!(run_des(&sc, 1.0, 3).unwrap(), run_des(&sc, 1.0, 4).unwrap());
    }

    #[test]
    fn combine_weights_by_duration() {
        let sc = lone_bss();
        let a = run_des(&sc, 1.0, 1).unwrap();
        let b = run_des(&sc, 3.0, 2).unwrap();
        let c = DesMetrics::combine(&[a.clone(), b.clone()]).unwrap();
        let want = (a.per_bss[0].throughput + 3.0 * b.per_bss[0].throughput) / 4.0;
        assert!((c.per_bss[0].throughput - want).abs() < 1e-6 * want);
        assert_eq!(c.per_bss[0].successes, a.per_bss[0].successes + b.per_bss[0].successes);
        assert!(DesMetrics::combine(&[]).is_none());
    }

    #[test]
    fn rejects_bad_duration() {
        assert!(matches!(run_des(&lone_bss(), 0.0, 1), Err(Error::InvalidParameter(_))));
    }
}
