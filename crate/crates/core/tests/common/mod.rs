//! Shared deterministic generators for the integration suites: seeded random
//! strongly connected digraphs, row-stochastic weight matrices over them,
//! and initial states.
#![allow(dead_code)] // each test binary uses a different subset

use std::collections::BTreeSet;

use consensus_halt::{Digraph, NetworkState, WeightMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A strongly connected digraph on 2..=max_n nodes: a full directed cycle
/// plus ~30% extra edges.
pub fn random_digraph(rng: &mut ChaCha8Rng, max_n: usize) -> Digraph {
    let n = rng.gen_range(2..=max_n);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        // State flows i -> i+1 around the cycle: node (i+1) lists i as an
        // in-neighbor.
        edges.insert(((i + 1) % n, i));
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.3) {
                edges.insert((i, j));
            }
        }
    }
    Digraph::new(n, edges).unwrap()
}

/// Row-stochastic weights whose interaction graph is exactly `g`: positive
/// diagonal plus one positive entry per in-neighbor, rows normalized.
pub fn random_weights_for(rng: &mut ChaCha8Rng, g: &Digraph) -> WeightMatrix {
    let n = g.node_count();
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = rng.gen_range(0.1..1.0);
        for &j in g.in_neighbors(i).unwrap() {
            row[j] = rng.gen_range(0.1..1.0);
        }
        let sum: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    WeightMatrix::from_rows(&rows).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> NetworkState {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    NetworkState::from_scalars(&v).unwrap()
}

/// A complete random strongly connected setup (n ≤ 8).
pub fn random_setup(rng: &mut ChaCha8Rng) -> (WeightMatrix, NetworkState) {
    let g = random_digraph(rng, 8);
    let w = random_weights_for(rng, &g);
    let x0 = random_state(rng, g.node_count());
    (w, x0)
}

pub fn example1_matrix() -> WeightMatrix {
    WeightMatrix::from_rows(&[
        vec![0.933, 0.067, 0.0, 0.0],
        vec![0.0, 0.722, 0.129, 0.149],
        vec![0.0, 0.0, 0.633, 0.367],
        vec![0.111, 0.0, 0.0, 0.889],
    ])
    .unwrap()
}

pub fn example1_x0() -> NetworkState {
    NetworkState::from_scalars(&[10.0, 7.0, 4.0, 0.0]).unwrap()
}

pub fn ring3_matrix() -> WeightMatrix {
    WeightMatrix::from_rows(&[
        vec![0.5, 0.5, 0.0],
        vec![0.0, 0.999, 0.001],
        vec![0.5, 0.0, 0.5],
    ])
    .unwrap()
}

pub fn ring3_x0() -> NetworkState {
    NetworkState::from_scalars(&[0.0, 0.0, 100.0]).unwrap()
}
