//! Local stopping detectors: the y/z counter scheme and the D-round
//! one-bit minimum-consensus scheme, plus stop-signal propagation.
//!
//! Counter semantics: `y` counts consecutive slots of local ε-consensus and
//! resets to zero on any failure; `z` propagates the running minimum of the
//! neighborhood's `{y, z}` values plus one. A node whose `z` crosses the
//! stop threshold has certified that *every* node held local ε-consensus
//! recently, and may halt.

use std::collections::BTreeSet;

use crate::dynamics::{inf_norm_diff, NetworkState};
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Per-node detector bookkeeping. Everything starts at zero/false.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectorState {
    /// Consecutive local-consensus count y_i.
    pub y: usize,
    /// Propagated minimum counter z_i.
    pub z: usize,
    /// Node has halted (never reverts).
    pub stopped: bool,
    /// A stop signal arrived; the node halts at the start of the next slot.
    pub stop_signal_received: bool,
}

impl DetectorState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Which network quantity the stop rule compares `z` against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Fire when z ≥ D + 1 (needs the diameter, guarantees ε·D).
    Diameter,
    /// Fire when z ≥ N (needs only the size, guarantees ε·(N−1)).
    Size,
}

/// The stop rule's comparison value: D for [`ThresholdKind::Diameter`],
/// N − 1 for [`ThresholdKind::Size`]. Firing means z ≥ value + 1, and the
/// certified accuracy is ε · value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopThreshold {
    kind: ThresholdKind,
    value: usize,
}

impl StopThreshold {
    pub fn new(kind: ThresholdKind, value: usize) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidThreshold(value));
        }
        Ok(StopThreshold { kind, value })
    }

    /// Diameter-based rule. A degenerate single-node network has D = 0;
    /// the value is clamped to 1 so the rule stays well-formed.
    pub fn diameter(d: usize) -> Self {
        StopThreshold {
            kind: ThresholdKind::Diameter,
            value: d.max(1),
        }
    }

    /// Size-based rule with value N − 1, clamped to 1 for N ≤ 2.
    pub fn size(n: usize) -> Self {
        StopThreshold {
            kind: ThresholdKind::Size,
            value: n.saturating_sub(1).max(1),
        }
    }

    pub fn kind(&self) -> ThresholdKind {
        self.kind
    }

    pub fn value(&self) -> usize {
        self.value
    }

    /// Multiplier on ε in the accuracy guarantee at firing time.
    pub fn guarantee_factor(&self) -> usize {
        self.value
    }

    /// The rule a given graph calls for. A diameter rule on a graph without
    /// a finite diameter falls back to the size rule; the second return
    /// value reports whether that fallback happened.
    pub fn for_graph(kind: ThresholdKind, g: &Digraph) -> (StopThreshold, bool) {
        match kind {
            ThresholdKind::Size => (StopThreshold::size(g.node_count()), false),
            ThresholdKind::Diameter => match g.diameter() {
                Ok(d) => (StopThreshold::diameter(d), false),
                Err(_) => (StopThreshold::size(g.node_count()), true),
            },
        }
    }
}

/// True iff node `i` agrees with every in-neighbor to within `eps`
/// (strict inequality). Vacuously true when `i` has no in-neighbors.
pub fn local_consensus_test(i: usize, s: &NetworkState, g: &Digraph, eps: f64) -> Result<bool> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::NonPositiveEps(eps));
    }
    if g.node_count() != s.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: s.node_count(),
        });
    }
    let mine = s.node(i);
    for &j in g.in_neighbors(i)? {
        if inf_norm_diff(mine, s.node(j)) >= eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// y-recurrence: increment while locally consensual, reset to 0 otherwise.
pub fn update_y(prev_y: usize, locally_consensual: bool) -> usize {
    if locally_consensual {
        prev_y + 1
    } else {
        0
    }
}

/// z-recurrence: z_i(k+1) = min over j ∈ in_neighbors(i) ∪ {i} of
/// min{z_j(k), y_j(k)}, plus 1.
pub fn update_z(i: usize, g: &Digraph, y_all: &[usize], z_all: &[usize]) -> Result<usize> {
    let n = g.node_count();
    if y_all.len() != n || z_all.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y_all.len().min(z_all.len()),
        });
    }
    let mut best = y_all[i].min(z_all[i]);
    for &j in g.in_neighbors(i)? {
        best = best.min(y_all[j]).min(z_all[j]);
    }
    Ok(best + 1)
}

/// The stop rule: fire iff z ≥ value + 1.
pub fn check_stop(z: usize, t: &StopThreshold) -> bool {
    z > t.value
}

/// Full min-consensus history over the fast-communication rounds: row m
/// holds the bits s_i(k, m), row 0 being the initial sign bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundDetectorState {
    s: Vec<Vec<u8>>,
}

impl RoundDetectorState {
    /// Run `rounds` synchronous min-exchanges of sign(y_i) over the graph,
    /// each node minimizing over its in-neighbors and itself.
    pub fn run(g: &Digraph, y_all: &[usize], rounds: usize) -> Result<Self> {
        let n = g.node_count();
        if y_all.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y_all.len(),
            });
        }
        let mut s = Vec::with_capacity(rounds + 1);
        s.push(y_all.iter().map(|&y| u8::from(y > 0)).collect::<Vec<u8>>());
        for m in 0..rounds {
            let prev = &s[m];
            let mut next = Vec::with_capacity(n);
            for i in 0..n {
                let mut bit = prev[i];
                for &j in g.in_neighbors(i)? {
                    bit = bit.min(prev[j]);
                }
                next.push(bit);
            }
            s.push(next);
        }
        Ok(RoundDetectorState { s })
    }

    pub fn rounds(&self) -> usize {
        self.s.len() - 1
    }

    pub fn bits(&self, round: usize) -> &[u8] {
        &self.s[round]
    }

    pub fn final_bits(&self) -> &[u8] {
        self.s.last().expect("at least the initial row")
    }

    /// Number of one-bit messages sent across all rounds (each active edge
    /// carries one bit per round).
    pub fn message_count(&self, g: &Digraph) -> usize {
        self.rounds() * g.edge_count()
    }
}

/// Run the round detector and return only the final bits, one per node.
/// With `rounds` equal to the diameter of a strongly connected graph, every
/// bit equals the global minimum of the initial sign bits.
pub fn min_consensus_rounds(g: &Digraph, y_all: &[usize], rounds: usize) -> Result<Vec<u8>> {
    Ok(RoundDetectorState::run(g, y_all, rounds)?
        .final_bits()
        .to_vec())
}

/// Deliver stop signals: every out-neighbor of every newly stopped node gets
/// `stop_signal_received` set, taking effect at the start of the next slot.
pub fn propagate_stop(
    g: &Digraph,
    stopped_now: &BTreeSet<usize>,
    states: &mut [DetectorState],
) -> Result<()> {
    if states.len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: states.len(),
        });
    }
    for &i in stopped_now {
        for &o in g.out_neighbors(i)? {
            states[o].stop_signal_received = true;
        }
    }
    Ok(())
}
