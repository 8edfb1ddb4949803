//! Ground-truth measurements a single node cannot make: global/uniform-local
//! ε-consensus predicates, true consensus times, ergodicity coefficients, and
//! the worst-case response-time bound.

use crate::detectors::local_consensus_test;
use crate::dynamics::{consensus_step, spread, NetworkState, SquareMatrix, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Default horizon for trajectory scans that might never terminate.
pub const DEFAULT_K_MAX: usize = 100_000;

/// Slots scanned by [`contraction_check`] (the inequality is asserted for
/// every starting slot k in 0..=CONTRACTION_SLOTS).
pub const CONTRACTION_SLOTS: usize = 100;

/// Measured timing summary of one simulated run. `None` means the event
/// never happened within the horizon.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConsensusReport {
    /// First slot with global ε-consensus.
    pub global_eps_time: Option<usize>,
    /// First slot with uniformly local ε-consensus.
    pub uniform_local_time: Option<usize>,
    /// Slot at which the first node fired its stop rule.
    pub first_stop_time: Option<usize>,
    /// Slot at which the last node halted.
    pub all_stop_time: Option<usize>,
    /// first_stop_time − global_eps_time, when both are defined.
    pub response_time: Option<i64>,
    /// At the first firing slot, did global (ε · guarantee_factor)-consensus
    /// actually hold? `None` when no node ever fired.
    pub soundness_ok: Option<bool>,
    /// The run violated the strong-connectivity assumption the detector
    /// guarantees rely on.
    pub assumption_violated: bool,
    /// One-bit messages spent by the round detector's fast sub-iterations
    /// (zero for the counter detector).
    pub fast_round_messages: usize,
}

impl ConsensusReport {
    /// Slots between the first firing and the last halt.
    pub fn all_halt_latency(&self) -> Option<usize> {
        match (self.first_stop_time, self.all_stop_time) {
            (Some(f), Some(a)) => Some(a.saturating_sub(f)),
            _ => None,
        }
    }
}

/// Ergodicity facts about a weight matrix: the minimal contracting power,
/// its coefficient, and the response-time bound they imply.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErgodicAnalysis {
    /// Smallest h ≥ 1 with τ(A^h) > 0 (h ≤ diameter on strongly
    /// connected graphs).
    pub h: usize,
    /// τ(A^h).
    pub tau_h: f64,
    /// Graph diameter D.
    pub diameter: usize,
    /// Worst-case response time h·⌈ln D / −ln(1 − τ(A^h))⌉ + D + 1.
    pub bound: usize,
}

/// True iff every pairwise state difference is strictly below `eps`;
/// equivalently, spread(s) < eps.
pub fn is_global_eps(s: &NetworkState, eps: f64) -> Result<bool> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::NonPositiveEps(eps));
    }
    Ok(spread(s) < eps)
}

/// True iff every node passes its local ε-consensus test simultaneously.
pub fn is_uniform_local(s: &NetworkState, g: &Digraph, eps: f64) -> Result<bool> {
    for i in 0..g.node_count() {
        if !local_consensus_test(i, s, g, eps)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The uniform-local ⇒ global implication at the εD accuracy: returns
/// whether `is_uniform_local(s, g, eps)` implies `is_global_eps(s, eps·D)`.
/// On strongly connected graphs this must always hold.
pub fn lemma1_bound_check(s: &NetworkState, g: &Digraph, eps: f64) -> Result<bool> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    if !is_uniform_local(s, g, eps)? {
        return Ok(true);
    }
    let d = g.diameter()? as f64;
    is_global_eps(s, eps * d.max(1.0))
}

/// Ergodicity coefficient τ(a) = min over row pairs i ≠ j of
/// Σ_k min(a_ik, a_jk).
pub fn ergodic_coefficient(a: &SquareMatrix) -> Result<f64> {
    let n = a.n();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let mut tau = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let overlap: f64 = (0..n).map(|k| a.get(i, k).min(a.get(j, k))).sum();
            tau = tau.min(overlap);
        }
    }
    Ok(tau)
}

/// Smallest h ≥ 1 with τ(A^h) > 0. On a strongly connected interaction
/// graph with positive diagonal such an h exists and is at most the
/// diameter, so the search stops at `d_max`.
pub fn min_ergodic_h(a: &WeightMatrix, d_max: usize) -> Result<usize> {
    let mut power = a.as_matrix().clone();
    for h in 1..=d_max {
        if ergodic_coefficient(&power)? > 0.0 {
            return Ok(h);
        }
        power = power.mul(a.as_matrix());
    }
    Err(Error::NoErgodicExponent { d_max })
}

/// Full ergodic analysis: D, minimal h, τ(A^h), and the response bound
/// h·⌈ln D / −ln(1 − τ(A^h))⌉ + D + 1 (natural logarithm).
pub fn response_time_bound(a: &WeightMatrix) -> Result<ErgodicAnalysis> {
    let g = a.graph();
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let diameter = g.diameter()?;
    let d = diameter.max(1);
    let h = min_ergodic_h(a, d)?;
    let tau_h = ergodic_coefficient(&a.as_matrix().pow(h))?;
    // ln D = 0 when D = 1, and −ln(1 − τ) = ∞ when τ = 1; both collapse
    // the ceiling term to zero.
    let ratio = (d as f64).ln() / -(1.0 - tau_h).ln();
    let ceil_term = if ratio.is_nan() {
        0
    } else {
        ratio.ceil() as usize
    };
    Ok(ErgodicAnalysis {
        h,
        tau_h,
        diameter,
        bound: h * ceil_term + diameter + 1,
    })
}

/// Smallest slot k ≤ k_max at which the consensus iteration from `x0`
/// satisfies global ε-consensus; `None` if that never happens by `k_max`.
pub fn consensus_time(
    w: &WeightMatrix,
    x0: &NetworkState,
    eps: f64,
    k_max: usize,
) -> Result<Option<usize>> {
    let mut s = x0.clone();
    for k in 0..=k_max {
        if is_global_eps(&s, eps)? {
            return Ok(Some(k));
        }
        if k < k_max {
            s = consensus_step(w, &s)?;
        }
    }
    Ok(None)
}

/// Verifies d(k+j) ≤ (1 − τ(A^j))·d(k) along the consensus trajectory from
/// `x0`, for every k in 0..=[`CONTRACTION_SLOTS`]. A slack of 1e−12 relative
/// to max(1, d(k)) absorbs floating-point rounding.
pub fn contraction_check(a: &WeightMatrix, x0: &NetworkState, j: usize) -> Result<bool> {
    if j == 0 {
        return Ok(true);
    }
    let tau_j = ergodic_coefficient(&a.as_matrix().pow(j))?;
    let factor = 1.0 - tau_j;
    let horizon = CONTRACTION_SLOTS + j;
    let mut spreads = Vec::with_capacity(horizon + 1);
    let mut s = x0.clone();
    spreads.push(spread(&s));
    for _ in 0..horizon {
        s = consensus_step(a, &s)?;
        spreads.push(spread(&s));
    }
    for k in 0..=CONTRACTION_SLOTS {
        let slack = 1e-12 * spreads[k].max(1.0);
        if spreads[k + j] > factor * spreads[k] + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring3_matrix() -> WeightMatrix {
        WeightMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.999, 0.001],
            vec![0.5, 0.0, 0.5],
        ])
        .unwrap()
    }

    fn example1_matrix() -> WeightMatrix {
        WeightMatrix::from_rows(&[
            vec![0.933, 0.067, 0.0, 0.0],
            vec![0.0, 0.722, 0.129, 0.149],
            vec![0.0, 0.0, 0.633, 0.367],
            vec![0.111, 0.0, 0.0, 0.889],
        ])
        .unwrap()
    }

    fn rank_one() -> WeightMatrix {
        WeightMatrix::from_rows(&[vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap()
    }

    fn ring3_after(k: usize) -> NetworkState {
        let mut s = NetworkState::from_scalars(&[0.0, 0.0, 100.0]).unwrap();
        for _ in 0..k {
            s = consensus_step(&ring3_matrix(), &s).unwrap();
        }
        s
    }

    #[test]
    fn global_predicate_constant_state() {
        let s = NetworkState::from_scalars(&[4.0, 4.0, 4.0]).unwrap();
        assert!(is_global_eps(&s, 1e-12).unwrap());
    }

    #[test]
    fn global_predicate_ring3_slot3_fails_at_half() {
        assert!(!is_global_eps(&ring3_after(3), 0.5).unwrap());
    }

    #[test]
    fn global_predicate_small_pair() {
        let s = NetworkState::from_scalars(&[1.0, 1.3]).unwrap();
        assert!(is_global_eps(&s, 0.5).unwrap());
        assert!(!is_global_eps(&s, 0.3).unwrap(), "strict boundary");
    }

    #[test]
    fn uniform_local_ring3_slot3_fails() {
        let g = ring3_matrix().graph();
        assert!(!is_uniform_local(&ring3_after(3), &g, 0.5).unwrap());
    }

    #[test]
    fn uniform_local_constant_state() {
        let g = ring3_matrix().graph();
        let s = NetworkState::from_scalars(&[2.0, 2.0, 2.0]).unwrap();
        assert!(is_uniform_local(&s, &g, 1e-9).unwrap());
    }

    #[test]
    fn global_implies_uniform_local() {
        let g = example1_matrix().graph();
        let s = NetworkState::from_scalars(&[1.0, 1.01, 0.99, 1.02]).unwrap();
        assert!(is_global_eps(&s, 0.1).unwrap());
        assert!(is_uniform_local(&s, &g, 0.1).unwrap());
    }

    #[test]
    fn lemma1_holds_on_trajectory_states() {
        let w = example1_matrix();
        let g = w.graph();
        let mut s = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        for _ in 0..60 {
            for eps in [1.0, 0.1, 0.01] {
                assert!(lemma1_bound_check(&s, &g, eps).unwrap());
            }
            s = consensus_step(&w, &s).unwrap();
        }
    }

    #[test]
    fn lemma1_requires_strong_connectivity() {
        let g = Digraph::new(2, [(0, 1)]).unwrap();
        let s = NetworkState::from_scalars(&[0.0, 0.0]).unwrap();
        assert!(matches!(
            lemma1_bound_check(&s, &g, 0.5),
            Err(Error::NotStronglyConnected)
        ));
    }

    #[test]
    fn tau_identity_is_zero() {
        assert_eq!(
            ergodic_coefficient(&SquareMatrix::identity(3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn tau_identical_rows_is_one() {
        let tau = ergodic_coefficient(rank_one().as_matrix()).unwrap();
        assert!((tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_example1_squared() {
        let a2 = example1_matrix().as_matrix().pow(2);
        let tau = ergodic_coefficient(&a2).unwrap();
        assert!((tau - 0.0594).abs() < 5e-4, "got {tau}");
    }

    #[test]
    fn tau_needs_two_rows() {
        let one = SquareMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            ergodic_coefficient(&one),
            Err(Error::TooFewNodes(1))
        ));
    }

    #[test]
    fn minimal_exponent_example1() {
        assert_eq!(min_ergodic_h(&example1_matrix(), 3).unwrap(), 2);
    }

    #[test]
    fn minimal_exponent_rank_one() {
        assert_eq!(min_ergodic_h(&rank_one(), 1).unwrap(), 1);
    }

    #[test]
    fn minimal_exponent_ring3() {
        assert_eq!(min_ergodic_h(&ring3_matrix(), 2).unwrap(), 1);
    }

    #[test]
    fn minimal_exponent_exhaustion_error() {
        assert!(matches!(
            min_ergodic_h(&example1_matrix(), 1),
            Err(Error::NoErgodicExponent { d_max: 1 })
        ));
    }

    #[test]
    fn response_bound_example1() {
        let a = response_time_bound(&example1_matrix()).unwrap();
        assert_eq!((a.h, a.diameter, a.bound), (2, 3, 40));
        assert!((a.tau_h - 0.0594).abs() < 5e-4);
    }

    #[test]
    fn response_bound_rank_one_degenerate() {
        let a = response_time_bound(&rank_one()).unwrap();
        assert_eq!((a.h, a.diameter, a.bound), (1, 1, 2));
        assert!((a.tau_h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn response_bound_ring3() {
        let a = response_time_bound(&ring3_matrix()).unwrap();
        assert_eq!((a.h, a.diameter, a.bound), (1, 2, 696));
        assert!((a.tau_h - 0.001).abs() < 1e-12);
    }

    #[test]
    fn response_bound_rejects_disconnected() {
        let w = WeightMatrix::from_rows(&[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            response_time_bound(&w),
            Err(Error::NotStronglyConnected)
        ));
    }

    #[test]
    fn consensus_time_example1_half() {
        let x0 = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        let k = consensus_time(&example1_matrix(), &x0, 0.5, 1000).unwrap();
        assert_eq!(k, Some(18));
    }

    #[test]
    fn consensus_time_example1_hundredth() {
        let x0 = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        let k = consensus_time(&example1_matrix(), &x0, 0.01, 1000).unwrap();
        assert_eq!(k, Some(34));
    }

    #[test]
    fn consensus_time_zero_when_already_tight() {
        let x0 = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        let k = consensus_time(&example1_matrix(), &x0, 1000.0, 10).unwrap();
        assert_eq!(k, Some(0));
    }

    #[test]
    fn consensus_time_ring3_half() {
        let x0 = NetworkState::from_scalars(&[0.0, 0.0, 100.0]).unwrap();
        let k = consensus_time(&ring3_matrix(), &x0, 0.5, 1000).unwrap();
        assert_eq!(k, Some(8));
    }

    #[test]
    fn consensus_time_never_within_short_horizon() {
        let x0 = NetworkState::from_scalars(&[0.0, 0.0, 100.0]).unwrap();
        let k = consensus_time(&ring3_matrix(), &x0, 0.5, 3).unwrap();
        assert_eq!(k, None);
    }

    #[test]
    fn contraction_example1_at_h() {
        let x0 = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        assert!(contraction_check(&example1_matrix(), &x0, 2).unwrap());
    }

    #[test]
    fn contraction_ring3_at_h() {
        let x0 = NetworkState::from_scalars(&[0.0, 0.0, 100.0]).unwrap();
        assert!(contraction_check(&ring3_matrix(), &x0, 1).unwrap());
    }

    #[test]
    fn contraction_rank_one_collapses() {
        let x0 = NetworkState::from_scalars(&[5.0, -5.0]).unwrap();
        assert!(contraction_check(&rank_one(), &x0, 1).unwrap());
    }

    #[test]
    fn global_consensus_is_attractive_once_reached() {
        let w = example1_matrix();
        let mut s = NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap();
        let eps = 0.5;
        let mut seen = false;
        for _ in 0..200 {
            let now = is_global_eps(&s, eps).unwrap();
            assert!(!seen || now, "consensus must persist once attained");
            seen = seen || now;
            s = consensus_step(&w, &s).unwrap();
        }
        assert!(seen);
    }
}
