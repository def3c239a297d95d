//! Continuous-time Markov chain of concurrent transmissions.
//!
//! A state is the set of BSSs transmitting at the same time, each tagged
//! with its band and whether it is a full-allocation, channel-bonded (DCB)
//! or NPCA transmission. The chain is explored breadth-first from the idle
//! state, so only reachable states are emitted and state 0 is always idle.
//!
//! Forward transitions (channel accesses) fire at the backoff rate λ of the
//! accessing BSS; backward transitions (completions) at μ = 1/T_s of the
//! finishing transmission. When an OBSS transmission that blocked an NPCA
//! BSS ends, the NPCA transmission ends with it.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::band::{BandSet, UnitMask};
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::scenario::{Scenario, TransmissionProfile, TxKind};

/// How consecutive NPCA TXOPs inside one blocking transmission are modeled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NpcaTxopModel {
    /// Each NPCA TXOP completes at its own rate, after which the BSS
    /// contends again on the NPCA channel against any other contender.
    #[default]
    Recontend,
    /// An NPCA transmission persists until its blocker ends, standing for
    /// back-to-back TXOPs with no re-contention.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActiveTx {
    pub bss: usize,
    pub band: BandSet,
    pub kind: TxKind,
}

/// Canonical set of concurrent transmissions, sorted by BSS index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CtmcState {
    txs: Vec<ActiveTx>,
}

impl CtmcState {
    pub fn idle() -> Self {
        Self::default()
    }

    pub fn is_idle(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn txs(&self) -> &[ActiveTx] {
        &self.txs
    }

    pub fn get(&self, bss: usize) -> Option<&ActiveTx> {
        self.txs.iter().find(|t| t.bss == bss)
    }

    pub fn busy_mask(&self) -> UnitMask {
        self.txs.iter().fold(0, |m, t| m | t.band.mask())
    }

    fn with(&self, tx: ActiveTx) -> Self {
        let mut txs = self.txs.clone();
        let at = txs.partition_point(|t| t.bss < tx.bss);
        txs.insert(at, tx);
        Self { txs }
    }

    /// Drops `bss`'s transmission and any NPCA transmission it was blocking.
    fn after_completion(&self, bss: usize) -> Self {
        Self {
            txs: self
                .txs
                .iter()
                .filter(|t| t.bss != bss && t.kind != TxKind::Npca { blocker: bss })
                .copied()
                .collect(),
        }
    }

    fn without(&self, bss: usize) -> Self {
        Self {
            txs: self.txs.iter().filter(|t| t.bss != bss).copied().collect(),
        }
    }

    /// Compact label such as `A*2B1` (BSS A on NPCA channel 2, B on Ch1).
    pub fn label(&self, scenario: &Scenario) -> String {
        if self.txs.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for t in &self.txs {
            s.push_str(&scenario.bsses[t.bss].id);
            if t.kind.is_npca() {
                s.push('*');
            }
            match t.band {
                BandSet::CH1 => s.push('1'),
                BandSet::CH2 => s.push('2'),
                BandSet::CH1_2 => s.push_str("12"),
                b => {
                    let _ = write!(s, "[{b}]");
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TransitionLabel {
    Access(usize),
    NpcaAccess(usize),
    Completion(usize),
    NpcaCompletion(usize),
}

impl TransitionLabel {
    pub fn bss(self) -> usize {
        match self {
            Self::Access(n) | Self::NpcaAccess(n) | Self::Completion(n) | Self::NpcaCompletion(n) => n,
        }
    }

    pub fn is_access(self) -> bool {
        matches!(self, Self::Access(_) | Self::NpcaAccess(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub label: TransitionLabel,
}

/// Reachable states with their labeled transitions.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub states: Vec<CtmcState>,
    /// `profiles[s][k]` belongs to `states[s].txs()[k]`.
    pub profiles: Vec<Vec<TransmissionProfile>>,
    pub transitions: Vec<Transition>,
    pub model: NpcaTxopModel,
    pub n_bss: usize,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn find(&self, state: &CtmcState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn profile(&self, state: usize, bss: usize) -> Option<&TransmissionProfile> {
        let k = self.states[state].txs.iter().position(|t| t.bss == bss)?;
        Some(&self.profiles[state][k])
    }

    /// True when every state can reach the idle state.
    pub fn all_reach_idle(&self) -> bool {
        let mut reverse = vec![Vec::new(); self.len()];
        for t in &self.transitions {
            reverse[t.to].push(t.from);
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &p in &reverse[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }
}

/// Profile of `tx` as it appears in `state`. NPCA transmissions are sized
/// to the budget left inside their blocker's transmission.
pub fn transmission_profile_for(scenario: &Scenario, state: &CtmcState, tx: &ActiveTx) -> Result<TransmissionProfile> {
    match tx.kind {
        TxKind::Legacy | TxKind::Dcb => scenario.access_profile(tx.bss, tx.band),
        TxKind::Npca { blocker } => {
            let b = state
                .get(blocker)
                .ok_or_else(|| Error::Model(format!("NPCA transmission of BSS {} without its blocker", tx.bss)))?;
            let blocker_profile = scenario.access_profile(blocker, b.band)?;
            scenario.npca_profile(tx.bss, blocker, blocker_profile.duration)
        }
    }
}

pub fn enumerate_states(scenario: &Scenario, model: NpcaTxopModel) -> Result<StateSpace> {
    scenario.validate()?;
    let n_bss = scenario.bsses.len();
    let lambdas = (0..n_bss).map(|n| scenario.lambda(n)).collect::<Result<Vec<_>>>()?;

    let mut states = vec![CtmcState::idle()];
    let mut index: HashMap<CtmcState, usize> = HashMap::from([(CtmcState::idle(), 0)]);
    let mut profiles = Vec::new();
    let mut transitions = Vec::new();
    let mut queue = VecDeque::from([0usize]);

    let mut intern = |s: CtmcState, states: &mut Vec<CtmcState>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };

    while let Some(i) = queue.pop_front() {
        let state = states[i].clone();
        let busy = state.busy_mask();
        let mut outgoing: Vec<(CtmcState, f64, TransitionLabel)> = Vec::new();

        for (n, bss) in scenario.bsses.iter().enumerate() {
            if state.get(n).is_some() {
                continue;
            }
            if busy & (1 << bss.primary_unit) == 0 {
                let band = bss
                    .allocation
                    .widest_idle_around(bss.primary_unit, busy)
                    .expect("primary unit is idle");
                let kind = if band == bss.allocation {
                    TxKind::Legacy
                } else {
                    TxKind::Dcb
                };
                outgoing.push((
                    state.with(ActiveTx { bss: n, band, kind }),
                    lambdas[n],
                    TransitionLabel::Access(n),
                ));
            } else if scenario.uses_npca(n) {
                let half = bss.primary_half();
                let mut blockers = state.txs.iter().filter(|t| t.band.overlaps(half));
                let (Some(blocker), None) = (blockers.next(), blockers.next()) else {
                    continue;
                };
                let npca_band = bss.npca_band().expect("validated NPCA band");
                if blocker.kind.is_npca() || !npca_band.is_idle_in(busy) {
                    continue;
                }
                let tx = ActiveTx {
                    bss: n,
                    band: npca_band,
                    kind: TxKind::Npca { blocker: blocker.bss },
                };
                if transmission_profile_for(scenario, &state, &tx)?.n_packets == 0 {
                    continue;
                }
                outgoing.push((state.with(tx), lambdas[n], TransitionLabel::NpcaAccess(n)));
            }
        }

        let mut state_profiles = Vec::with_capacity(state.txs.len());
        for tx in &state.txs {
            let p = transmission_profile_for(scenario, &state, tx)?;
            state_profiles.push(p);
            match tx.kind {
                TxKind::Legacy | TxKind::Dcb => outgoing.push((
                    state.after_completion(tx.bss),
                    p.mu,
                    TransitionLabel::Completion(tx.bss),
                )),
                TxKind::Npca { .. } if model == NpcaTxopModel::Recontend => {
                    outgoing.push((state.without(tx.bss), p.mu, TransitionLabel::NpcaCompletion(tx.bss)))
                }
                TxKind::Npca { .. } => {}
            }
        }
        debug_assert_eq!(profiles.len(), i);
        profiles.push(state_profiles);

        for (next, rate, label) in outgoing {
            let to = intern(next, &mut states, &mut queue);
            transitions.push(Transition {
                from: i,
                to,
                rate,
                label,
            });
        }
    }

    Ok(StateSpace {
        states,
        profiles,
        transitions,
        model,
        n_bss,
    })
}

/// Infinitesimal generator `Q`, dense and row-major.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    n: usize,
    q: Vec<f64>,
    transitions: Vec<Transition>,
}

impl GeneratorMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    /// The labeled transitions `Q` was assembled from.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks non-negative off-diagonals and zero row sums.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-9 * self.max_abs();
        for i in 0..self.n {
            let row = self.row(i);
            if let Some(j) = (0..self.n).find(|&j| j != i && row[j] < 0.0) {
                return Err(Error::Numerical(format!("negative rate Q[{i},{j}]")));
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > tol {
                return Err(Error::Numerical(format!("row {i} sums to {sum}")));
            }
        }
        Ok(())
    }
}

pub fn build_generator(space: &StateSpace) -> GeneratorMatrix {
    let n = space.len();
    let mut q = vec![0.0; n * n];
    for t in &space.transitions {
        if t.from != t.to {
            q[t.from * n + t.to] += t.rate;
        }
    }
    for i in 0..n {
        let out: f64 = (0..n).filter(|&j| j != i).map(|j| q[i * n + j]).sum();
        q[i * n + i] = -out;
    }
    GeneratorMatrix {
        n,
        q,
        transitions: space.transitions.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
}

impl StationaryDistribution {
    /// `max_j |(π Q)_j|`.
    pub fn residual(&self, q: &GeneratorMatrix) -> f64 {
        (0..q.len())
            .map(|j| (0..q.len()).map(|i| self.pi[i] * q.get(i, j)).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `π Q = 0, Σ π = 1` by replacing the last balance equation with
/// the normalization row.
pub fn stationary(q: &GeneratorMatrix) -> Result<StationaryDistribution> {
    let n = q.len();
    if n == 0 {
        return Err(Error::Numerical("empty generator".into()));
    }
    // Transposed system: row j of A is column j of Q.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = q.get(i, j);
        }
    }
    a[(n - 1) * n..].fill(1.0);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut pi = solve_dense(a, rhs)?;

    for p in &mut pi {
        if *p < 0.0 {
            if *p < -1e-12 {
                return Err(Error::Numerical(format!("negative stationary probability {p}")));
            }
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);

    let dist = StationaryDistribution { pi };
    let residual = dist.residual(q);
    if residual > 1e-10 * q.max_abs() {
        return Err(Error::Numerical(format!("stationary residual {residual:e} too large")));
    }
    Ok(dist)
}

/// Per-BSS throughput in bit/s: `(1 - PER) L Σ_s μ_n^s N_n^s π_s`.
pub fn throughput(pi: &StationaryDistribution, space: &StateSpace, scenario: &Scenario) -> Vec<f64> {
    let mut packets = vec![0.0; space.n_bss];
    for (s, state) in space.states.iter().enumerate() {
        for (tx, p) in state.txs.iter().zip(&space.profiles[s]) {
            packets[tx.bss] += p.packet_rate() * pi.pi[s];
        }
    }
    packets
        .into_iter()
        .enumerate()
        .map(|(n, r)| (1.0 - scenario.phy.per) * r * f64::from(scenario.bsses[n].payload_bits))
        .collect()
}

/// Long-run rate of forward transitions per BSS (accesses per second).
pub fn access_rates(pi: &StationaryDistribution, space: &StateSpace) -> Vec<f64> {
    let mut rates = vec![0.0; space.n_bss];
    for t in space.transitions.iter().filter(|t| t.label.is_access()) {
        rates[t.label.bss()] += pi.pi[t.from] * t.rate;
    }
    rates
}

/// Everything the Markov analysis produces for one scenario.
#[derive(Debug, Clone)]
pub struct CtmcAnalysis {
    pub space: StateSpace,
    pub generator: GeneratorMatrix,
    pub stationary: StationaryDistribution,
    pub throughput: Vec<f64>,
}

pub fn analyze(scenario: &Scenario, model: NpcaTxopModel) -> Result<CtmcAnalysis> {
    let space = enumerate_states(scenario, model)?;
    let generator = build_generator(&space);
    generator.validate()?;
    let stationary = stationary(&generator)?;
    let throughput = throughput(&stationary, &space, scenario);
    Ok(CtmcAnalysis {
        space,
        generator,
        stationary,
        throughput,
    })
}
