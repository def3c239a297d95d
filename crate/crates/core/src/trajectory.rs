//! Event-by-event walk of the Markov chain, used to measure channel access
//! delay (the stationary distribution alone does not give inter-access
//! times).
//!
//! The walk starts in the idle state at time 0, samples an exponential
//! sojourn with the state's total exit rate, and jumps along one labeled
//! transition chosen proportionally to its rate.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::ctmc::{GeneratorMatrix, NpcaTxopModel, StateSpace, TransitionLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    AccessStart(usize),
    NpcaAccessStart(usize),
    Completion(usize),
    NpcaCompletion(usize),
}

impl EventKind {
    pub fn bss(self) -> usize {
        match self {
            Self::AccessStart(n) | Self::NpcaAccessStart(n) | Self::Completion(n) | Self::NpcaCompletion(n) => n,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::AccessStart(_) => "access",
            Self::NpcaAccessStart(_) => "npca_access",
            Self::Completion(_) => "completion",
            Self::NpcaCompletion(_) => "npca_completion",
        }
    }
}

impl From<TransitionLabel> for EventKind {
    fn from(l: TransitionLabel) -> Self {
        match l {
            TransitionLabel::Access(n) => Self::AccessStart(n),
            TransitionLabel::NpcaAccess(n) => Self::NpcaAccessStart(n),
            TransitionLabel::Completion(n) => Self::Completion(n),
            TransitionLabel::NpcaCompletion(n) => Self::NpcaCompletion(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub from: usize,
    pub to: usize,
    pub kind: EventKind,
}

struct Row {
    exit_rate: f64,
    /// (cumulative rate, target, label)
    jumps: Vec<(f64, usize, TransitionLabel)>,
}

/// Lazy event stream; deterministic for a given seed.
pub struct ChainWalker {
    rows: Vec<Row>,
    state: usize,
    time: f64,
    end: f64,
    rng: ChaCha8Rng,
}

impl Iterator for ChainWalker {
    type Item = TrajectoryEvent;

    fn next(&mut self) -> Option<TrajectoryEvent> {
        let row = &self.rows[self.state];
        let sojourn: f64 = self.rng.sample::<f64, _>(Exp1) / row.exit_rate;
        let time = self.time + sojourn;
        if time > self.end {
            return None;
        }
        let pick = self.rng.random::<f64>() * row.exit_rate;
        let k = row.jumps.partition_point(|j| j.0 <= pick).min(row.jumps.len() - 1);
        let (_, to, label) = row.jumps[k];
        let ev = TrajectoryEvent {
            time,
            from: self.state,
            to,
            kind: label.into(),
        };
        self.state = to;
        self.time = time;
        Some(ev)
    }
}

pub fn simulate_chain(q: &GeneratorMatrix, duration: f64, seed: u64) -> Result<ChainWalker> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let mut rows: Vec<Row> = (0..q.len())
        .map(|_| Row {
            exit_rate: 0.0,
            jumps: Vec::new(),
        })
        .collect();
    for t in q.transitions().iter().filter(|t| t.from != t.to && t.rate > 0.0) {
        let row = &mut rows[t.from];
        row.exit_rate += t.rate;
        row.jumps.push((row.exit_rate, t.to, t.label));
    }
    if let Some(i) = rows.iter().position(|r| r.jumps.is_empty()) {
        return Err(Error::Model(format!("state {i} is absorbing")));
    }
    Ok(ChainWalker {
        rows,
        state: 0,
        time: 0.0,
        end: duration,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DelayStats {
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayReport {
    pub per_bss: Vec<DelayStats>,
}

#[derive(Default)]
struct GapAccumulator {
    last: Option<f64>,
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl GapAccumulator {
    fn access(&mut self, t: f64) {
        if let Some(prev) = self.last {
            let gap = t - prev;
            self.count += 1;
            self.sum += gap;
            self.sum_sq += gap * gap;
        }
        self.last = Some(t);
    }

    fn stats(&self) -> DelayStats {
        if self.count == 0 {
            return DelayStats::default();
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0);
        DelayStats {
            mean: Some(mean),
            std_dev: Some(var.sqrt()),
            count: self.count,
        }
    }
}

/// Mean gap between consecutive channel accesses per BSS.
///
/// Events before the first return to the idle state at or after `warmup`
/// seconds are discarded. Under [`NpcaTxopModel::Continuous`], an NPCA
/// transmission stands for a run of back-to-back TXOPs, so besides the
/// entry access one more access is counted per further whole TXOP that fits
/// in its realized lifetime.
pub fn access_delay<I>(events: I, space: &StateSpace, warmup: f64) -> Result<DelayReport>
where
    I: IntoIterator<Item = TrajectoryEvent>,
{
    let mut acc: Vec<GapAccumulator> = (0..space.n_bss).map(|_| GapAccumulator::default()).collect();
    let mut npca_since: Vec<Option<(f64, f64)>> = vec![None; space.n_bss];
    let continuous = space.model == NpcaTxopModel::Continuous;
    let mut started = false;
    let mut seen_any = false;

    for ev in events {
        seen_any = true;
        if !started {
            started = ev.time >= warmup && ev.to == 0;
            continue;
        }
        if continuous {
            for n in 0..space.n_bss {
                let Some((t0, txop)) = npca_since[n] else { continue };
                let still = space.states[ev.to].get(n).is_some_and(|t| t.kind.is_npca());
                if !still {
                    let whole = ((ev.time - t0) / txop).floor() as u64;
                    for j in 1..whole {
                        acc[n].access(t0 + j as f64 * txop);
                    }
                    npca_since[n] = None;
                }
            }
        }
        match ev.kind {
            EventKind::AccessStart(n) => acc[n].access(ev.time),
            EventKind::NpcaAccessStart(n) => {
                acc[n].access(ev.time);
                if continuous {
                    let txop = space
                        .profile(ev.to, n)
                        .ok_or_else(|| Error::Model("NPCA access without profile".into()))?
                        .duration;
                    npca_since[n] = Some((ev.time, txop));
                }
            }
            EventKind::Completion(_) | EventKind::NpcaCompletion(_) => {}
        }
    }
    if !seen_any {
        return Err(Error::InvalidParameter("no trajectory events".into()));
    }
    Ok(DelayReport {
        per_bss: acc.iter().map(GapAccumulator::stats).collect(),
    })
}

/// Runs a trajectory of `duration` seconds and measures access delays with
/// a warm-up of 1% of the run.
pub fn estimate_delay(space: &StateSpace, q: &GeneratorMatrix, duration: f64, seed: u64) -> Result<DelayReport> {
    let walker = simulate_chain(q, duration, seed)?;
    access_delay(walker, space, 0.01 * duration)
}

/// Writes `time,from,to,kind,bss` records.
pub fn write_trace<W: Write, I>(mut out: W, events: I) -> Result<()>
where
    I: IntoIterator<Item = TrajectoryEvent>,
{
    writeln!(out, "time,from,to,kind,bss")?;
    for ev in events {
        writeln!(
            out,
            "{:.9},{},{},{},{}",
            ev.time,
            ev.from,
            ev.to,
            ev.kind.name(),
            ev.kind.bss()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctmc::{build_generator, CtmcState, Transition};

    fn two_state(lambda: f64, mu: f64) -> (StateSpace, GeneratorMatrix) {
        let space = StateSpace {
            states: vec![CtmcState::idle(), CtmcState::idle()],
            profiles: vec![vec![], vec![]],
            transitions: vec![
                Transition {
                    from: 0,
                    to: 1,
                    rate: lambda,
                    label: TransitionLabel::Access(0),
                },
                Transition {
                    from: 1,
                    to: 0,
                    rate: mu,
                    label: TransitionLabel::Completion(0),
                },
            ],
            model: NpcaTxopModel::Recontend,
            n_bss: 1,
        };
        let q = build_generator(&space);
        (space, q)
    }

    #[test]
    fn occupancy_and_sojourns() {
        let (lambda, mu) = (2.0, 3.0);
        let (_, q) = two_state(lambda, mu);
        let mut time_in = [0.0; 2];
        let mut visits = [0u64; 2];
        let mut prev = 0.0;
        let mut events = 0;
        for ev in simulate_chain(&q, 1e9, 11).unwrap().take(1_000_000) {
            time_in[ev.from] += ev.time - prev;
            visits[ev.from] += 1;
            prev = ev.time;
            events += 1;
        }
        assert_eq!(events, 1_000_000);
        let frac = time_in[1] / prev;
        assert!((frac - lambda / (lambda + mu)).abs() < 0.01 * lambda / (lambda + mu));
        let mean0 = time_in[0] / visits[0] as f64;
        assert!((mean0 - 1.0 / lambda).abs() < 0.01 / lambda);
    }

    #[test]
    fn walker_is_deterministic() {
        let (_, q) = two_state(5.0, 7.0);
        let a: Vec<_> = simulate_chain(&q, 100.0, 3).unwrap().collect();
        let b: Vec<_> = simulate_chain(&q, 100.0, 3).unwrap().collect();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].time < w[1].time));
        let c: Vec<_> = simulate_chain(&q, 100.0, 4).unwrap().collect();
        assert_ne!(a, c);
    }

    #[test]
    fn single_bss_delay_is_renewal_cycle() {
        let (lambda, mu) = (100.0, 400.0);
        let (space, q) = two_state(lambda, mu);
        let report = estimate_delay(&space, &q, 5_000.0, 9).unwrap();
        let mean = report.per_bss[0].mean.unwrap();
        let expected = 1.0 / lambda + 1.0 / mu;
        assert!((mean - expected).abs() < 0.01 * expected, "{mean} vs {expected}");
    }

    #[test]
    fn absorbing_state_is_an_error() {
        let space = StateSpace {
            states: vec![CtmcState::idle(), CtmcState::idle()],
            profiles: vec![vec![], vec![]],
            transitions: vec![Transition {
                from: 0,
                to: 1,
                rate: 1.0,
                label: TransitionLabel::Access(0),
            }],
            model: NpcaTxopModel::Recontend,
            n_bss: 1,
        };
        assert!(matches!(
            simulate_chain(&build_generator(&space), 1.0, 0),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn no_accesses_means_no_mean() {
        let (space, q) = two_state(1e-3, 1.0);
        let report = estimate_delay(&space, &q, 1.0, 1);
        // Either no events at all or none after warm-up.
        if let Ok(r) = report {
            assert_eq!(r.per_bss[0].count, 0);
            assert!(r.per_bss[0].mean.is_none());
        }
    }

    #[test]
    fn trace_format() {
        let (_, q) = two_state(5.0, 7.0);
        let mut buf = Vec::new();
        write_trace(&mut buf, simulate_chain(&q, 1.0, 1).unwrap().take(2)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time,from,to,kind,bss"));
        assert!(lines.next().unwrap().ends_with(",0,1,access,0"));
    }
}
