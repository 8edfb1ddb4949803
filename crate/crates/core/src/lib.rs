//! Locally-stopped distributed consensus.
//!
//! Nodes of a directed network iterate x(k+1) = A·x(k) with a row-stochastic
//! weight matrix. No node can observe the whole network, so none can tell on
//! its own when the states have converged; this crate implements the local
//! stopping machinery that lets every node decide, from neighbor messages
//! only, when it is safe to halt — plus the ground-truth oracle needed to
//! measure how well that machinery does.
//!
//! The pieces:
//!
//! - [`graph`]: directed interaction graphs, strong connectivity, distances
//!   and diameter. Edge convention: a stored pair `(i, j)` means j's state
//!   flows into i (j is an in-neighbor of i).
//! - [`dynamics`]: validated weight matrices, the consensus and
//!   Friedkin–Johnsen update laws, and the state spread.
//! - [`detectors`]: the y/z counter detector, the D-round one-bit
//!   min-consensus detector, stop thresholds and stop propagation.
//! - [`oracle`]: global/uniform-local ε-consensus predicates, true consensus
//!   times, ergodicity coefficients, and the worst-case response bound.
//! - [`simulator`]: the synchronous round engine joining all of the above
//!   into reproducible runs with traces and measured reports.

pub mod detectors;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod simulator;

pub use detectors::{
    check_stop, local_consensus_test, min_consensus_rounds, propagate_stop, update_y, update_z,
    DetectorState, RoundDetectorState, StopThreshold, ThresholdKind,
};
pub use dynamics::{
    consensus_step, fj_step, spread, FjParams, NetworkState, SquareMatrix, WeightMatrix,
};
pub use error::{Error, Result};
pub use graph::{Digraph, DistanceMatrix};
pub use oracle::{
    consensus_time, contraction_check, ergodic_coefficient, is_global_eps, is_uniform_local,
    lemma1_bound_check, min_ergodic_h, response_time_bound, ConsensusReport, ErgodicAnalysis,
    DEFAULT_K_MAX,
};
pub use simulator::{
    all_halt_latency, run, DetectorKind, EventKind, NodeEvent, SimConfig, Simulation, Trace,
    TraceRecord, DEFAULT_MAX_STEPS,
};
