//! Correlation networks, threshold-integrated clustering and the
//! interconnectedness risk matrix.
//!
//! The complete weighted network has the pairwise Pearson correlations as
//! edge weights. For a threshold `s` the unweighted graph `A_s` keeps every
//! edge with `w_ij ≥ s`. The per-node clustering coefficient of `A_s` is a
//! step function of `s` that only changes at the distinct edge weights, so
//! its average over `s ∈ [-1, 1]` is computed exactly by sweeping those
//! breakpoints from the strongest edge down and adding edges as they enter.
//!
//! The averaged coefficients `C_i` define `c_ij = C_i C_j` (unit diagonal),
//! and `H = Δ C Δ` with `Δ = diag(σ_i / ‖σ‖₂)` is the network-based stand-in
//! for the covariance matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::CovarianceEstimate;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationNetwork {
    weights: DMatrix<f64>,
    tickers: Vec<String>,
}

impl CorrelationNetwork {
    /// Weights are clamped to `[-1, 1]` and the diagonal is zeroed.
    pub fn from_weights(mut weights: DMatrix<f64>, tickers: Vec<String>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n || tickers.len() != n {
            return Err(Error::Contract(format!(
                "weight matrix {}x{} does not match {} tickers",
                weights.nrows(),
                weights.ncols(),
                tickers.len()
            )));
        }
        for i in 0..n {
            weights[(i, i)] = 0.0;
            for j in (i + 1)..n {
                let (a, b) = (weights[(i, j)], weights[(j, i)]);
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > SYMMETRY_TOL {
                    return Err(Error::Contract(format!(
                        "network weights not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let w = a.clamp(-1.0, 1.0);
                weights[(i, j)] = w;
                weights[(j, i)] = w;
            }
        }
        Ok(Self { weights, tickers })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }

    /// Upper-triangle edge list `(i, j, w_ij)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push((i, j, self.weights[(i, j)]));
            }
        }
        out
    }
}

/// `w_ij = σ_ij / (σ_i σ_j)`, clamped, zero diagonal.
pub fn correlation_from_covariance(
    cov: &CovarianceEstimate,
    tickers: &[String],
) -> Result<CorrelationNetwork> {
    let n = cov.dim();
    if tickers.len() != n {
        return Err(Error::Contract(format!(
            "{} tickers for a {n}x{n} covariance",
            tickers.len()
        )));
    }
    if let Some(&i) = cov.zero_variance().first() {
        return Err(Error::ZeroVariance {
            ticker: tickers[i].clone(),
        });
    }
    let sd: Vec<f64> = (0..n).map(|i| cov.sigma[(i, i)].sqrt()).collect();
    let weights = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            // Symmetrise so tiny asymmetries in the input cannot leak through.
            let c = 0.5 * (cov.sigma[(i, j)] + cov.sigma[(j, i)]);
            (c / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    });
    CorrelationNetwork::from_weights(weights, tickers.to_vec())
}

/// Unweighted undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    n: usize,
    adjacency: Vec<bool>,
    pub threshold: f64,
}

impl ThresholdGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i != j {
                adjacency[i * n + j] = true;
                adjacency[j * n + i] = true;
            }
        }
        Self {
            n,
            adjacency,
            threshold: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a).count() / 2
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Keep edges with `w_ij ≥ s`.
pub fn threshold_graph(net: &CorrelationNetwork, s: f64) -> Result<ThresholdGraph> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::Contract(format!("threshold {s} outside [-1, 1]")));
    }
    let n = net.len();
    let w = net.weights();
    let adjacency = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            i != j && w[(i, j)] >= s
        })
        .collect();
    Ok(ThresholdGraph {
        n,
        adjacency,
        threshold: s,
    })
}

/// Per-node clustering coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringVector {
    pub c: DVector<f64>,
}

impl ClusteringVector {
    pub fn new(c: DVector<f64>) -> Self {
        Self { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

fn local_coefficient(triangles: usize, degree: usize) -> f64 {
    if degree < 2 {
        0.0
    } else {
        2.0 * triangles as f64 / (degree * (degree - 1)) as f64
    }
}

/// Watts–Strogatz local clustering: closed triangles at `i` over
/// `k_i (k_i − 1) / 2`, zero when `k_i < 2`.
pub fn watts_clustering(g: &ThresholdGraph) -> ClusteringVector {
    let n = g.len();
    let c = DVector::from_fn(n, |i, _| {
        let nbrs: Vec<usize> = (0..n).filter(|&j| g.has_edge(i, j)).collect();
        let mut tri = 0;
        for (a, &u) in nbrs.iter().enumerate() {
            for &v in &nbrs[a + 1..] {
                if g.has_edge(u, v) {
                    tri += 1;
                }
            }
        }
        local_coefficient(tri, nbrs.len())
    });
    ClusteringVector { c }
}

/// How the integral over `s ∈ [-1, 1]` is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringNormalization {
    /// Divide by the interval length 2, so every `C_i ∈ [0, 1]`.
    #[default]
    Average,
    /// Raw integral, `C_i ∈ [0, 2]`.
    Integral,
}

/// Threshold-averaged clustering with the default [`ClusteringNormalization::Average`].
pub fn integrated_clustering(net: &CorrelationNetwork) -> ClusteringVector {
    integrated_clustering_with(net, ClusteringNormalization::Average)
}

/// Bitset adjacency used by the breakpoint sweep.
struct Bits {
    words: usize,
    data: Vec<u64>,
}

impl Bits {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            words,
            data: vec![0; n * words],
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] |= 1 << (j % 64);
    }
}

pub fn integrated_clustering_with(
    net: &CorrelationNetwork,
    normalization: ClusteringNormalization,
) -> ClusteringVector {
    let n = net.len();
    let mut edges = net.edges();
    // Strongest first; ties end up in the same breakpoint group.
    edges.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));

    let mut bits = Bits::new(n);
    let mut degree = vec![0usize; n];
    let mut triangles = vec![0usize; n];
    let mut acc = vec![0.0f64; n];

    let mut idx = 0;
    while idx < edges.len() {
        let level = edges[idx].2;
        if level <= -1.0 {
            // A_s for s in (-1, 1] never contains these edges.
            break;
        }
        while idx < edges.len() && edges[idx].2 == level {
            let (u, v, _) = edges[idx];
            for (word, (a, b)) in bits.row(u).iter().zip(bits.row(v)).enumerate() {
                let mut common = a & b;
                while common != 0 {
                    let w = word * 64 + common.trailing_zeros() as usize;
                    triangles[w] += 1;
                    triangles[u] += 1;
                    triangles[v] += 1;
                    common &= common - 1;
                }
            }
            bits.set(u, v);
            bits.set(v, u);
            degree[u] += 1;
            degree[v] += 1;
            idx += 1;
        }
        // The graph is now A_s for every s in (next, level].
        let next = if idx < edges.len() {
            edges[idx].2.max(-1.0)
        } else {
            -1.0
        };
        let length = level - next;
        for i in 0..n {
            acc[i] += length * local_coefficient(triangles[i], degree[i]);
        }
    }

    let scale = match normalization {
        ClusteringNormalization::Average => 0.5,
        ClusteringNormalization::Integral => 1.0,
    };
    ClusteringVector {
        c: DVector::from_iterator(n, acc.into_iter().map(|a| a * scale)),
    }
}

/// `c_ij = C_i C_j` off the diagonal, 1 on it.
pub fn interconnectedness_matrix(c: &ClusteringVector) -> DMatrix<f64> {
    let n = c.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { c.c[i] * c.c[j] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskModelKind {
    Standard,
    Network,
}

/// Matrix handed to the optimisers together with the asset volatilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    pub matrix: DMatrix<f64>,
    pub vols: DVector<f64>,
    pub kind: RiskModelKind,
}

impl RiskModel {
    pub fn standard(cov: &CovarianceEstimate) -> Self {
        Self {
            matrix: cov.sigma.clone(),
            vols: cov.vols.clone(),
            kind: RiskModelKind::Standard,
        }
    }

    /// Wrap an arbitrary matrix as a standard model; vols are `√M_ii`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let vols = DVector::from_fn(matrix.nrows(), |i, _| matrix[(i, i)].max(0.0).sqrt());
        Self {
            matrix,
            vols,
            kind: RiskModelKind::Standard,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `H = Δ C Δ` with `Δ = diag(σ_i / ‖σ‖₂)`.
pub fn risk_matrix_h(cmat: &DMatrix<f64>, vols: &DVector<f64>) -> Result<RiskModel> {
    let n = vols.len();
    if cmat.shape() != (n, n) {
        return Err(Error::Contract(format!(
            "interconnectedness matrix {}x{} does not match {n} volatilities",
            cmat.nrows(),
            cmat.ncols()
        )));
    }
    if let Some(i) = (0..n).find(|&i| !(vols[i] > 0.0 && vols[i].is_finite())) {
        return Err(Error::Estimation(format!(
            "asset column {i} has volatility {}; H needs σ_i > 0",
            vols[i]
        )));
    }
    let norm = vols.norm();
    let s = vols / norm;
    let matrix = DMatrix::from_fn(n, n, |i, j| s[i] * s[j] * cmat[(i, j)]);
    Ok(RiskModel {
        matrix,
        vols: vols.clone(),
        kind: RiskModelKind::Network,
    })
}
