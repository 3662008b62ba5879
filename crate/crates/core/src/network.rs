//! Graph topologies, doubly stochastic mixing matrices and cyclic
//! time-varying schedules.
//!
//! Mixing weights use the Metropolis rule: for an edge (i, j) the weight is
//! `1 / (1 + max(deg_i, deg_j))` and the diagonal absorbs the remainder.
//! This yields a symmetric doubly stochastic matrix with positive diagonal
//! for any connected undirected graph, together with a computable lower
//! bound on its positive entries.

use std::collections::BTreeSet;

use crate::error::{CoreError, Result};
use crate::linalg::Matrix;
use crate::rng::SplitMix64;

/// Undirected graph on agents `0..m`; self-loops are implicit in the weights
/// and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    agent_count: usize,
    edges: BTreeSet<(usize, usize)>, // (i, j) with i < j
}

impl Topology {
    pub fn new(agent_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(CoreError::Parameter(format!("self-loop on node {a}")));
            }
            if a >= agent_count || b >= agent_count {
                return Err(CoreError::Parameter(format!(
                    "edge ({a},{b}) outside 0..{agent_count}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            agent_count,
            edges: set,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.agent_count];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        is_connected_edges(self.agent_count, self.edges.iter().copied())
    }
}

fn is_connected_edges(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    if m == 0 {
        return false;
    }
    let mut adj = vec![Vec::new(); m];
    for (a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == m
}

/// All pairs connected.
pub fn complete_graph(m: usize) -> Result<Topology> {
    if m < 2 {
        return Err(CoreError::Parameter(format!(
            "complete graph needs m >= 2, got {m}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((i, j));
        }
    }
    Topology::new(m, edges)
}

/// Consecutive pairs 0-1-2-...-(m-1).
pub fn path_graph(m: usize) -> Result<Topology> {
    if m < 2 {
        return Err(CoreError::Parameter(format!(
            "path graph needs m >= 2, got {m}"
        )));
    }
    Topology::new(m, (0..m - 1).map(|i| (i, i + 1)))
}

/// Connected random graph with sparsity degree `d`: the undirected edge
/// budget is `floor((d m^2 - m) / 2)`, capped at the complete graph. The
/// graph contains a random spanning tree plus uniformly random extra edges,
/// deterministic in the seed.
pub fn random_sparse(m: usize, d: f64, seed: u64) -> Result<Topology> {
    if m < 2 || !(0.0..=1.0).contains(&d) {
        return Err(CoreError::Parameter(format!(
            "random_sparse needs m >= 2 and d in (0,1], got m={m} d={d}"
        )));
    }
    let max_edges = m * (m - 1) / 2;
    let raw_budget = ((d * (m as f64) * (m as f64) - m as f64) / 2.0).floor();
    if raw_budget < (m - 1) as f64 {
        return Err(CoreError::Parameter(format!(
            "sparsity budget {raw_budget} below spanning tree size {}",
            m - 1
        )));
    }
    let budget = (raw_budget as usize).min(max_edges);

    let mut rng = SplitMix64::new(seed);
    // Fisher-Yates permutation, then attach each node to a random earlier one
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.next_index(i + 1);
        perm.swap(i, j);
    }
    let mut edges = BTreeSet::new();
    for i in 1..m {
        let j = rng.next_index(i);
        let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
        edges.insert((a, b));
    }
    while edges.len() < budget {
        let u = rng.next_index(m);
        let v = rng.next_index(m);
        if u == v {
            continue;
        }
        edges.insert((u.min(v), u.max(v)));
    }
    Topology::new(m, edges)
}

/// Symmetric doubly stochastic mixing matrix together with the certified
/// lower bound on its positive entries.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    weights: Matrix,
    eta_bound: f64,
}

impl MixingMatrix {
    pub fn from_weights(weights: Matrix, eta_bound: f64) -> Result<Self> {
        let mm = Self { weights, eta_bound };
        let report = validate_mixing(&mm, eta_bound);
        if !report.all_pass() {
            return Err(CoreError::Validation(format!(
                "mixing matrix fails validation: {report:?}"
            )));
        }
        Ok(mm)
    }

    pub fn agent_count(&self) -> usize {
        self.weights.rows()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn eta_bound(&self) -> f64 {
        self.eta_bound
    }

    /// Edges of the support graph (off-diagonal positive entries).
    pub fn support_edges(&self) -> Vec<(usize, usize)> {
        let m = self.agent_count();
        let mut edges = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                if self.weights.get(i, j) > 0.0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

/// Metropolis weights for a connected topology.
pub fn metropolis_weights(t: &Topology) -> Result<MixingMatrix> {
    if !t.is_connected() {
        return Err(CoreError::Validation(
            "metropolis_weights requires a connected topology".into(),
        ));
    }
    let m = t.agent_count();
    let deg = t.degrees();
    let mut w = Matrix::zeros(m, m);
    for (a, b) in t.edges() {
        let weight = 1.0 / (1.0 + deg[a].max(deg[b]) as f64);
        w.set(a, b, weight);
        w.set(b, a, weight);
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| w.get(i, j)).sum();
        w.set(i, i, 1.0 - off);
    }
    let mut eta = f64::INFINITY;
    for i in 0..m {
        for j in 0..m {
            let v = w.get(i, j);
            if v > 0.0 {
                eta = eta.min(v);
            }
        }
    }
    MixingMatrix::from_weights(w, eta)
}

/// Outcome of the Assumption-style checks on one mixing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub row_stochastic: bool,
    pub col_stochastic: bool,
    pub diagonal_at_least_eta: bool,
    pub positive_entries_at_least_eta: bool,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.symmetric
            && self.row_stochastic
            && self.col_stochastic
            && self.diagonal_at_least_eta
            && self.positive_entries_at_least_eta
    }
}

/// Check symmetry, row/column sums within 1e-12, and the eta lower bound on
/// diagonal and positive entries. Failures are reported, not raised.
pub fn validate_mixing(a: &MixingMatrix, eta: f64) -> ValidationReport {
    let m = a.agent_count();
    let w = a.weights();
    let mut symmetric = true;
    let mut row_stochastic = true;
    let mut col_stochastic = true;
    let mut diagonal_ok = true;
    let mut entries_ok = true;
    for i in 0..m {
        let mut row_sum = 0.0;
        let mut col_sum = 0.0;
        for j in 0..m {
            let v = w.get(i, j);
            row_sum += v;
            col_sum += w.get(j, i);
            if (v - w.get(j, i)).abs() > 1e-12 {
                symmetric = false;
            }
            if v > 0.0 && v < eta - 1e-15 {
                entries_ok = false;
            }
        }
        if (row_sum - 1.0).abs() > 1e-12 {
            row_stochastic = false;
        }
        if (col_sum - 1.0).abs() > 1e-12 {
            col_stochastic = false;
        }
        if w.get(i, i) < eta - 1e-15 {
            diagonal_ok = false;
        }
    }
    ValidationReport {
        symmetric,
        row_stochastic,
        col_stochastic,
        diagonal_at_least_eta: diagonal_ok,
        positive_entries_at_least_eta: entries_ok,
    }
}

/// Periodic sequence of mixing matrices, cycled by iteration index.
#[derive(Debug, Clone)]
pub struct MixingSchedule {
    matrices: Vec<MixingMatrix>,
    certified_window: usize,
}

impl MixingSchedule {
    /// Build and certify: find the smallest window length T such that every
    /// window of T consecutive matrices (cyclically) has a connected union
    /// support graph. Errors when even a full period does not connect.
    pub fn new(matrices: Vec<MixingMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| CoreError::Parameter("empty mixing schedule".into()))?;
        let m = first.agent_count();
        for mat in &matrices {
            if mat.agent_count() != m {
                return Err(CoreError::Dimension {
                    context: "schedule agent counts",
                    left: m,
                    right: mat.agent_count(),
                });
            }
        }
        let period = matrices.len();
        let mut certified = None;
        'window: for t in 1..=period {
            for start in 0..period {
                let mut edges = BTreeSet::new();
                for offset in 0..t {
                    let mat = &matrices[(start + offset) % period];
                    edges.extend(mat.support_edges());
                }
                if !is_connected_edges(m, edges) {
                    continue 'window;
                }
            }
            certified = Some(t);
            break;
        }
        let certified_window = certified.ok_or_else(|| {
            CoreError::Validation(
                "schedule union graph over one period is not connected".into(),
            )
        })?;
        Ok(Self {
            matrices,
            certified_window,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.matrices[0].agent_count()
    }

    pub fn period(&self) -> usize {
        self.matrices.len()
    }

    /// Union-connectivity bound T certified at construction.
    pub fn certified_window(&self) -> usize {
        self.certified_window
    }

    pub fn matrix_at(&self, k: usize) -> &MixingMatrix {
        &self.matrices[k % self.matrices.len()]
    }

    pub fn matrices(&self) -> &[MixingMatrix] {
        &self.matrices
    }

    /// Smallest eta over the period.
    pub fn eta_bound(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| m.eta_bound())
            .fold(f64::INFINITY, f64::min)
    }
}
