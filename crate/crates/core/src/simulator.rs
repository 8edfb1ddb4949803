//! Synchronous round engine: advances the dynamics, the stopping detectors,
//! and stop-signal propagation in lockstep, recording a full trace and a
//! measured [`ConsensusReport`].
//!
//! One call to [`Simulation::step`] is one transition from slot k to slot
//! k+1, in this order:
//!
//! 1. nodes holding a stop signal halt and re-propagate it;
//! 2. remaining active nodes broadcast x and min{y, z} (halted nodes are
//!    silent; a neighbor's silence coincides with its stop signal);
//! 3. active nodes update z from the received minima and fire when
//!    z ≥ threshold + 1, halting and signaling their out-neighbors;
//! 4. active non-fired nodes update y from the broadcast states and apply
//!    the consensus update.
//!
//! A fired node keeps its pre-update state; the counters written into the
//! firing slot's record are the values the stop rule evaluated. The round
//! detector replaces step 3 with D fast min-consensus sub-iterations on the
//! fresh sign(y) bits, costing zero slot time.

use std::collections::BTreeSet;
use std::fmt;

use crate::detectors::{
    check_stop, local_consensus_test, propagate_stop, update_y, DetectorState, StopThreshold,
};
use crate::dynamics::{NetworkState, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::oracle::{is_global_eps, is_uniform_local, ConsensusReport};

/// Which stopping detector the nodes run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// The y/z counter scheme.
    Yz,
    /// D fast rounds of one-bit min-consensus on sign(y) per slot.
    MinRounds,
}

/// Everything one run needs. Fields are public so experiments can override
/// the defaults chosen by [`SimConfig::new`].
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub weights: WeightMatrix,
    pub x0: NetworkState,
    pub eps: f64,
    pub detector: DetectorKind,
    pub threshold: StopThreshold,
    pub max_steps: usize,
    pub record_trace: bool,
}

/// Default horizon before a run gives up and reports NEVER fields.
pub const DEFAULT_MAX_STEPS: usize = 100_000;

impl SimConfig {
    /// Defaults: y/z detector, diameter threshold (size-based fallback on
    /// graphs without a finite diameter), 100000-slot horizon, trace on.
    pub fn new(weights: WeightMatrix, x0: NetworkState, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::NonPositiveEps(eps));
        }
        if weights.n() != x0.node_count() {
            return Err(Error::DimensionMismatch {
                expected: weights.n(),
                got: x0.node_count(),
            });
        }
        let (threshold, _fallback) =
            StopThreshold::for_graph(crate::detectors::ThresholdKind::Diameter, &weights.graph());
        Ok(SimConfig {
            weights,
            x0,
            eps,
            detector: DetectorKind::Yz,
            threshold,
            max_steps: DEFAULT_MAX_STEPS,
            record_trace: true,
        })
    }
}

/// What happened to a node during one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The node's own stop rule fired.
    Fired,
    /// A stop signal was delivered to this (still active) node.
    StopSignal,
    /// The node halted because of a received signal.
    Halted,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Fired => "FIRED",
            EventKind::StopSignal => "STOP_SIGNAL",
            EventKind::Halted => "HALTED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeEvent {
    pub node: usize,
    pub kind: EventKind,
}

/// Snapshot of slot k, taken after all slot-k updates completed.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    pub stopped: Vec<bool>,
    pub events: Vec<NodeEvent>,
}

impl TraceRecord {
    /// The snapshot as a state usable with the oracle predicates.
    pub fn state(&self) -> NetworkState {
        NetworkState::with_slot(self.x.clone(), self.k)
    }
}

/// Ordered per-slot records of one run (empty when the config disabled
/// recording).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&TraceRecord> {
        self.records.get(k)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// CSV export, one row per (slot, node), header
    /// `k,node,x...,y,z,stopped,event` (one x column per state component).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = self.records.first().map(|r| r.x[0].len()).unwrap_or(1);
        out.push_str("k,node,");
        if m == 1 {
            out.push_str("x,");
        } else {
            for c in 0..m {
                out.push_str(&format!("x{c},"));
            }
        }
        out.push_str("y,z,stopped,event\n");
        for r in &self.records {
            for node in 0..r.x.len() {
                let kinds: Vec<String> = r
                    .events
                    .iter()
                    .filter(|e| e.node == node)
                    .map(|e| e.kind.to_string())
                    .collect();
                out.push_str(&format!("{},{},", r.k, node));
                for c in 0..m {
                    out.push_str(&format!("{},", r.x[node][c]));
                }
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.y[node],
                    r.z[node],
                    r.stopped[node],
                    kinds.join("+")
                ));
            }
        }
        out
    }
}

/// The engine itself; drive it with [`Simulation::step`] or let [`run`]
/// orchestrate a whole experiment.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    g: Digraph,
    x: Vec<Vec<f64>>,
    last_bcast: Vec<Vec<f64>>,
    det: Vec<DetectorState>,
    fired: Vec<bool>,
    stop_slot: Vec<Option<usize>>,
    slot: usize,
    first_fire_slot: Option<usize>,
    soundness_ok: Option<bool>,
    fast_round_messages: usize,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        if cfg.eps.is_nan() || cfg.eps <= 0.0 {
            return Err(Error::NonPositiveEps(cfg.eps));
        }
        if cfg.weights.n() != cfg.x0.node_count() {
            return Err(Error::DimensionMismatch {
                expected: cfg.weights.n(),
                got: cfg.x0.node_count(),
            });
        }
        let g = cfg.weights.graph();
        let n = g.node_count();
        let x: Vec<Vec<f64>> = cfg.x0.nodes().to_vec();
        Ok(Simulation {
            g,
            last_bcast: x.clone(),
            det: vec![DetectorState::new(); n],
            fired: vec![false; n],
            stop_slot: vec![None; n],
            slot: 0,
            first_fire_slot: None,
            soundness_ok: None,
            fast_round_messages: 0,
            x,
            cfg,
        })
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn graph(&self) -> &Digraph {
        &self.g
    }

    pub fn all_halted(&self) -> bool {
        self.det.iter().all(|d| d.stopped)
    }

    pub fn active_count(&self) -> usize {
        self.det.iter().filter(|d| !d.stopped).count()
    }

    pub fn first_fire_slot(&self) -> Option<usize> {
        self.first_fire_slot
    }

    pub fn soundness_ok(&self) -> Option<bool> {
        self.soundness_ok
    }

    pub fn stop_slots(&self) -> &[Option<usize>] {
        &self.stop_slot
    }

    /// Current per-node snapshot (the slot-`self.slot()` record, minus
    /// events, which belong to the transition that produced it).
    pub fn snapshot(&self, events: Vec<NodeEvent>) -> TraceRecord {
        TraceRecord {
            k: self.slot,
            x: self.x.clone(),
            y: self.det.iter().map(|d| d.y).collect(),
            z: self.det.iter().map(|d| d.z).collect(),
            stopped: self.det.iter().map(|d| d.stopped).collect(),
            events,
        }
    }

    pub fn state(&self) -> NetworkState {
        NetworkState::with_slot(self.x.clone(), self.slot)
    }

    /// Record a signal-delivery event for each active out-neighbor of the
    /// sources not already holding a signal, then deliver the signals.
    fn signal_out_neighbors(
        &mut self,
        sources: &BTreeSet<usize>,
        events: &mut Vec<NodeEvent>,
    ) -> Result<()> {
        let mut fresh: BTreeSet<usize> = BTreeSet::new();
        for &i in sources {
            for &o in self.g.out_neighbors(i)? {
                if !self.det[o].stopped && !self.det[o].stop_signal_received {
                    fresh.insert(o);
                }
            }
        }
        for &o in &fresh {
            events.push(NodeEvent {
                node: o,
                kind: EventKind::StopSignal,
            });
        }
        propagate_stop(&self.g, sources, &mut self.det)
    }

    /// Advance one slot. Returns the events of the transition; a fully
    /// halted simulation is left untouched and yields no events.
    pub fn step(&mut self) -> Result<Vec<NodeEvent>> {
        if self.all_halted() {
            return Ok(Vec::new());
        }
        let n = self.g.node_count();
        let next_slot = self.slot + 1;
        let mut events = Vec::new();

        // 1. Pending stop signals take effect; halting nodes re-propagate.
        let halting: BTreeSet<usize> = (0..n)
            .filter(|&i| !self.det[i].stopped && self.det[i].stop_signal_received)
            .collect();
        for &i in &halting {
            self.det[i].stopped = true;
            self.stop_slot[i] = Some(next_slot);
            events.push(NodeEvent {
                node: i,
                kind: EventKind::Halted,
            });
        }
        self.signal_out_neighbors(&halting, &mut events)?;

        // 2. Broadcast: active nodes publish their state and counter minimum.
        let active: Vec<bool> = self.det.iter().map(|d| !d.stopped).collect();
        for (i, is_active) in active.iter().enumerate() {
            if *is_active {
                self.last_bcast[i].clone_from(&self.x[i]);
            }
        }
        let bcast_view = NetworkState::with_slot(self.last_bcast.clone(), self.slot);

        // Local ε-consensus of each active node against the broadcasts it
        // received (a halted in-neighbor's cache holds its last broadcast).
        let mut locally_ok = vec![false; n];
        for i in 0..n {
            if active[i] {
                locally_ok[i] = local_consensus_test(i, &bcast_view, &self.g, self.cfg.eps)?;
            }
        }

        let mut fired_now: BTreeSet<usize> = BTreeSet::new();
        let mut new_y: Vec<usize> = self.det.iter().map(|d| d.y).collect();
        let mut new_z: Vec<usize> = self.det.iter().map(|d| d.z).collect();

        match self.cfg.detector {
            DetectorKind::Yz => {
                // 3. z from received minima, then the stop rule.
                let mins: Vec<usize> = self.det.iter().map(|d| d.y.min(d.z)).collect();
                for i in 0..n {
                    if !active[i] {
                        continue;
                    }
                    let mut best = mins[i];
                    for &j in self.g.in_neighbors(i)? {
                        if active[j] {
                            best = best.min(mins[j]);
                        }
                    }
                    new_z[i] = best + 1;
                    if check_stop(new_z[i], &self.cfg.threshold) {
                        fired_now.insert(i);
                    }
                }
                // 4. y for the survivors.
                for i in 0..n {
                    if active[i] && !fired_now.contains(&i) {
                        new_y[i] = update_y(self.det[i].y, locally_ok[i]);
                    }
                }
            }
            DetectorKind::MinRounds => {
                // y first: the fast rounds run on the fresh sign bits.
                for i in 0..n {
                    if active[i] {
                        new_y[i] = update_y(self.det[i].y, locally_ok[i]);
                    }
                }
                let rounds = self.cfg.threshold.value();
                let mut bits: Vec<u8> = (0..n)
                    .map(|i| u8::from(active[i] && new_y[i] > 0))
                    .collect();
                let active_edges = self.g.edges().filter(|&(_, j)| active[j]).count();
                for _ in 0..rounds {
                    let prev = bits.clone();
                    for i in 0..n {
                        if !active[i] {
                            continue;
                        }
                        let mut bit = prev[i];
                        for &j in self.g.in_neighbors(i)? {
                            if active[j] {
                                bit = bit.min(prev[j]);
                            }
                        }
                        bits[i] = bit;
                    }
                    self.fast_round_messages += active_edges;
                }
                for i in 0..n {
                    if active[i] && bits[i] == 1 {
                        fired_now.insert(i);
                    }
                }
            }
        }

        for &i in &fired_now {
            self.det[i].stopped = true;
            self.fired[i] = true;
            self.stop_slot[i] = Some(next_slot);
            events.push(NodeEvent {
                node: i,
                kind: EventKind::Fired,
            });
        }
        self.signal_out_neighbors(&fired_now, &mut events)?;

        // 5. Consensus update for active non-fired nodes, over the broadcast
        //    values (row weights untouched; every in-neighbor has a value).
        let mut new_x = self.x.clone();
        for (i, row) in new_x.iter_mut().enumerate() {
            if !active[i] || fired_now.contains(&i) {
                continue;
            }
            for (c, v) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..n {
                    let a = self.cfg.weights.get(i, j);
                    if a != 0.0 {
                        acc += a * self.last_bcast[j][c];
                    }
                }
                *v = acc;
            }
        }
        self.x = new_x;

        // Commit counters: z for every node that ran the rule (including
        // those that fired on it), y for the survivors (the round detector
        // commits y for its fired nodes too — that y is what fired).
        for i in 0..n {
            if !active[i] {
                continue;
            }
            match self.cfg.detector {
                DetectorKind::Yz => {
                    self.det[i].z = new_z[i];
                    if !fired_now.contains(&i) {
                        self.det[i].y = new_y[i];
                    }
                }
                DetectorKind::MinRounds => {
                    self.det[i].y = new_y[i];
                }
            }
        }

        self.slot = next_slot;

        if self.first_fire_slot.is_none() && !fired_now.is_empty() {
            self.first_fire_slot = Some(next_slot);
            let guarantee = self.cfg.eps * self.cfg.threshold.guarantee_factor() as f64;
            self.soundness_ok = Some(is_global_eps(&self.state(), guarantee)?);
        }

        Ok(events)
    }
}

/// Run a whole experiment: iterate until every node halted or the horizon
/// is reached, measuring the report along the way. The trace is empty when
/// `cfg.record_trace` is false.
pub fn run(cfg: &SimConfig) -> Result<(ConsensusReport, Trace)> {
    let mut sim = Simulation::new(cfg.clone())?;
    let assumption_violated = !sim.g.is_strongly_connected();
    let mut trace = Trace::default();

    let mut global_eps_time = None;
    let mut uniform_local_time = None;
    let observe =
        |sim: &Simulation, global: &mut Option<usize>, uniform: &mut Option<usize>| -> Result<()> {
            let s = sim.state();
            if global.is_none() && is_global_eps(&s, sim.cfg.eps)? {
                *global = Some(sim.slot);
            }
            if uniform.is_none() && is_uniform_local(&s, &sim.g, sim.cfg.eps)? {
                *uniform = Some(sim.slot);
            }
            Ok(())
        };

    observe(&sim, &mut global_eps_time, &mut uniform_local_time)?;
    if cfg.record_trace {
        trace.records.push(sim.snapshot(Vec::new()));
    }

    while sim.slot < cfg.max_steps && !sim.all_halted() {
        let events = sim.step()?;
        observe(&sim, &mut global_eps_time, &mut uniform_local_time)?;
        if cfg.record_trace {
            trace.records.push(sim.snapshot(events));
        }
    }

    let first_stop_time = sim.stop_slot.iter().flatten().min().copied();
    let all_stop_time = if sim.all_halted() {
        sim.stop_slot.iter().flatten().max().copied()
    } else {
        None
    };
    let response_time = match (first_stop_time, global_eps_time) {
        (Some(f), Some(g)) => Some(f as i64 - g as i64),
        _ => None,
    };

    Ok((
        ConsensusReport {
            global_eps_time,
            uniform_local_time,
            first_stop_time,
            all_stop_time,
            response_time,
            soundness_ok: sim.soundness_ok,
            assumption_violated,
            fast_round_messages: sim.fast_round_messages,
        },
        trace,
    ))
}

/// Slots between the first firing and the last halt; `None` when either
/// never happened.
pub fn all_halt_latency(report: &ConsensusReport) -> Option<usize> {
    report.all_halt_latency()
}
