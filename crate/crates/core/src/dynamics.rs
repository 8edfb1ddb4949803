//! Row-stochastic weight matrices and the per-slot state update laws.

use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Tolerance on typed-in row sums before rows are renormalized exactly.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// A plain n-by-n matrix of nonnegative reals, row-major.
///
/// Used for matrix powers in the ergodicity analysis; the validated
/// [`WeightMatrix`] wraps one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: i,
                    len: row.len(),
                    n,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        SquareMatrix { n, data }
    }

    pub fn pow(&self, k: usize) -> SquareMatrix {
        let mut out = SquareMatrix::identity(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

/// A validated row-stochastic weight matrix A = (α_ij).
///
/// Construction checks every entry is nonnegative, every diagonal entry is
/// positive, and every row sums to 1 within [`ROW_SUM_TOL`]; rows are then
/// renormalized by their exact sum so the contraction invariants hold to
/// machine precision.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    m: SquareMatrix,
}

impl WeightMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mut m = SquareMatrix::from_rows(rows)?;
        let n = m.n;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = m.get(i, j);
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowSum {
                    row: i,
                    sum,
                    tol: ROW_SUM_TOL,
                });
            }
            if m.get(i, i) <= 0.0 {
                return Err(Error::ZeroDiagonal { row: i });
            }
            for j in 0..n {
                m.data[i * n + j] /= sum;
            }
        }
        Ok(WeightMatrix { m })
    }

    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.m
    }

    /// The interaction digraph: edge `(i, j)` present iff i ≠ j and α_ij > 0.
    pub fn graph(&self) -> Digraph {
        let n = self.n();
        let edges = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && self.get(i, j) > 0.0);
        Digraph::new(n, edges).expect("indices in range by construction")
    }
}

/// Per-node state vectors x_i(k) at time slot k. All nodes share one state
/// dimension m ≥ 1; scalar states (m = 1) are the common case.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    x: Vec<Vec<f64>>,
    k: usize,
}

impl NetworkState {
    pub fn new(x: Vec<Vec<f64>>) -> Result<Self> {
        let m = match x.first() {
            Some(v) if !v.is_empty() => v.len(),
            _ => return Err(Error::RaggedState),
        };
        if x.iter().any(|v| v.len() != m) {
            return Err(Error::RaggedState);
        }
        Ok(NetworkState { x, k: 0 })
    }

    /// Scalar states (m = 1), the common case.
    pub fn from_scalars(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&s| vec![s]).collect())
    }

    pub fn node_count(&self) -> usize {
        self.x.len()
    }

    pub fn state_dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn slot(&self) -> usize {
        self.k
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.x[i]
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub(crate) fn with_slot(x: Vec<Vec<f64>>, k: usize) -> Self {
        NetworkState { x, k }
    }
}

/// Max-norm distance between two node states.
pub(crate) fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// Friedkin–Johnsen parameters: per-node coupling weights ω_i ∈ [0, 1] and
/// the prejudice vector x(0).
#[derive(Debug, Clone, PartialEq)]
pub struct FjParams {
    omega: Vec<f64>,
    x0: NetworkState,
}

impl FjParams {
    pub fn new(omega: Vec<f64>, x0: NetworkState) -> Result<Self> {
        if omega.len() != x0.node_count() {
            return Err(Error::DimensionMismatch {
                expected: x0.node_count(),
                got: omega.len(),
            });
        }
        for (index, &value) in omega.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OmegaOutOfRange { index, value });
            }
        }
        Ok(FjParams { omega, x0 })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn x0(&self) -> &NetworkState {
        &self.x0
    }
}

fn check_dims(w: &WeightMatrix, s: &NetworkState) -> Result<()> {
    if w.n() != s.node_count() {
        return Err(Error::DimensionMismatch {
            expected: w.n(),
            got: s.node_count(),
        });
    }
    Ok(())
}

/// One consensus slot: x_i(k+1) = Σ_j α_ij x_j(k), componentwise.
pub fn consensus_step(w: &WeightMatrix, s: &NetworkState) -> Result<NetworkState> {
    check_dims(w, s)?;
    let n = s.node_count();
    let m = s.state_dim();
    let mut next = vec![vec![0.0; m]; n];
    for (i, out) in next.iter_mut().enumerate() {
        for j in 0..n {
            let a = w.get(i, j);
            if a == 0.0 {
                continue;
            }
            for (v, src) in out.iter_mut().zip(&s.x[j]) {
                *v += a * src;
            }
        }
    }
    Ok(NetworkState::with_slot(next, s.k + 1))
}

/// One Friedkin–Johnsen slot:
/// x_i(k+1) = ω_i Σ_j α_ij x_j(k) + (1 − ω_i) x_i(0).
pub fn fj_step(w: &WeightMatrix, s: &NetworkState, p: &FjParams) -> Result<NetworkState> {
    check_dims(w, s)?;
    if p.x0.node_count() != s.node_count() || p.x0.state_dim() != s.state_dim() {
        return Err(Error::DimensionMismatch {
            expected: s.node_count(),
            got: p.x0.node_count(),
        });
    }
    let blended = consensus_step(w, s)?;
    let mut next = blended.x;
    for (i, row) in next.iter_mut().enumerate() {
        let w_i = p.omega[i];
        for (v, anchor) in row.iter_mut().zip(&p.x0.x[i]) {
            *v = w_i * *v + (1.0 - w_i) * anchor;
        }
    }
    Ok(NetworkState::with_slot(next, s.k + 1))
}

/// The spread d(k) = max over node pairs of the max-norm state difference.
pub fn spread(s: &NetworkState) -> f64 {
    let m = s.state_dim();
    let mut worst: f64 = 0.0;
    for c in 0..m {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &s.x {
            lo = lo.min(v[c]);
            hi = hi.max(v[c]);
        }
        worst = worst.max(hi - lo);
    }
    worst
}
