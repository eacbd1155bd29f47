//! Graph representations in edge-vector, adjacency and Laplacian form.
//!
//! The edge vector is the primary representation. Pairs `(i, j)` with
//! `i < j` are stored in row-major upper-triangular order, so for `m = 4`
//! the layout is `(0,1) (0,2) (0,3) (1,2) (1,3) (2,3)`. Every node-pair
//! quantity in this crate (weights, squared distances, adjoint outputs)
//! shares that order.
//!
//! The degree operator `S` (edge weights to node degrees) and its adjoint
//! are never materialized; both are single passes over the pairs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of unordered node pairs, `m(m-1)/2`.
#[inline]
pub fn edge_count(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in the canonical edge order.
#[inline]
pub fn edge_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

/// Iterates over all pairs `(i, j)` with `i < j` in canonical order.
pub fn edge_pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
}

/// Recovers the node count from an edge-vector length, if it is triangular.
pub fn nodes_for_len(len: usize) -> Option<usize> {
    // m^2 - m - 2 len = 0
    let m = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
    (edge_count(m) == len).then_some(m)
}

fn check_nonnegative(name: &str, v: &[f64]) -> Result<()> {
    if let Some((k, x)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::validation(format!(
            "{name} entry {k} must be finite and nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// Nonnegative edge weights of an undirected graph on `m` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeVector {
    m: usize,
    w: Vec<f64>,
}

impl EdgeVector {
    pub fn new(m: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != edge_count(m) {
            return Err(Error::DimensionMismatch {
                expected: edge_count(m),
                actual: w.len(),
            });
        }
        check_nonnegative("edge weight", &w)?;
        Ok(Self { m, w })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            w: vec![0.0; edge_count(m)],
        }
    }

    /// Builds an edge vector from `f(i, j)` evaluated on every pair.
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(m, edge_pairs(m).map(|(i, j)| f(i, j)).collect())
    }

    pub(crate) fn from_vec_unchecked(m: usize, w: Vec<f64>) -> Self {
        debug_assert_eq!(w.len(), edge_count(m));
        Self { m, w }
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.w
    }

    /// Weight of the edge between `i` and `j` (order-insensitive, 0 on the diagonal).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.w[edge_index(self.m, i, j)],
            std::cmp::Ordering::Greater => self.w[edge_index(self.m, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Number of strictly positive entries.
    pub fn nonzeros(&self) -> usize {
        self.w.iter().filter(|&&x| x > 0.0).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.w.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Multiplies every weight by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.m, self.w.iter().map(|x| x * c).collect())
    }
}

/// Squared pairwise distances `Z_ij = ||x_i - x_j||^2` in edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceVector {
    m: usize,
    z: Vec<f64>,
}

impl DistanceVector {
    pub fn new(m: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != edge_count(m) {
            return Err(Error::DimensionMismatch {
                expected: edge_count(m),
                actual: z.len(),
            });
        }
        check_nonnegative("distance", &z)?;
        Ok(Self { m, z })
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn mean(&self) -> f64 {
        if self.z.is_empty() {
            0.0
        } else {
            self.z.iter().sum::<f64>() / self.z.len() as f64
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.z[edge_index(self.m, i, j)],
            std::cmp::Ordering::Greater => self.z[edge_index(self.m, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.m, self.z.iter().map(|x| x * c).collect())
    }

    /// Adds `c` to every distance (the result must stay nonnegative).
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.m, self.z.iter().map(|x| x + c).collect())
    }
}

/// Weighted node degrees `d = Sw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Symmetric, zero-diagonal, nonnegative weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix(DMatrix<f64>);

impl AdjacencyMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::validation("adjacency matrix must be square"));
        }
        let m = w.nrows();
        for i in 0..m {
            if w[(i, i)] != 0.0 {
                return Err(Error::validation(format!("nonzero diagonal at node {i}")));
            }
            for j in i + 1..m {
                let x = w[(i, j)];
                if x != w[(j, i)] {
                    return Err(Error::validation(format!("asymmetric entry ({i}, {j})")));
                }
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) must be finite and nonnegative, got {x}"
                    )));
                }
            }
        }
        Ok(Self(w))
    }

    pub fn nodes(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// Combinatorial Laplacian `L = D - W`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(DMatrix<f64>);

impl LaplacianMatrix {
    /// Checks symmetry, nonpositive off-diagonals and zero row sums.
    ///
    /// Together these make `L` diagonally dominant with a nonnegative
    /// diagonal, hence positive semidefinite.
    pub fn new(l: DMatrix<f64>) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::validation("Laplacian must be square"));
        }
        let m = l.nrows();
        let scale = l.norm().max(f64::MIN_POSITIVE);
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                let x = l[(i, j)];
                if !x.is_finite() {
                    return Err(Error::validation(format!("non-finite entry ({i}, {j})")));
                }
                if i != j {
                    if x > 0.0 {
                        return Err(Error::validation(format!("positive off-diagonal ({i}, {j})")));
                    }
                    if (x - l[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::validation(format!("asymmetric entry ({i}, {j})")));
                    }
                }
                row += x;
            }
            if row.abs() > 1e-12 * scale {
                return Err(Error::validation(format!("row {i} sums to {row}")));
            }
        }
        Ok(Self(l))
    }

    pub(crate) fn from_matrix_unchecked(l: DMatrix<f64>) -> Self {
        Self(l)
    }

    pub fn nodes(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Edge weights read off the negated upper off-diagonal.
    pub fn edges(&self) -> EdgeVector {
        let m = self.nodes();
        EdgeVector::from_vec_unchecked(
            m,
            edge_pairs(m).map(|(i, j)| (-self.0[(i, j)]).max(0.0)).collect(),
        )
    }
}

pub fn vectorform(w: &AdjacencyMatrix) -> EdgeVector {
    let m = w.nodes();
    EdgeVector::from_vec_unchecked(m, edge_pairs(m).map(|(i, j)| w.0[(i, j)]).collect())
}

pub fn matrixform(w: &EdgeVector) -> AdjacencyMatrix {
    let m = w.nodes();
    let mut a = DMatrix::zeros(m, m);
    for ((i, j), &x) in edge_pairs(m).zip(&w.w) {
        a[(i, j)] = x;
        a[(j, i)] = x;
    }
    AdjacencyMatrix(a)
}

/// `out = S w`: out[i] is the sum of the weights incident to node `i`.
pub fn degree_map_into(m: usize, w: &[f64], out: &mut [f64]) {
    debug_assert_eq!(w.len(), edge_count(m));
    debug_assert_eq!(out.len(), m);
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut k = 0;
    for i in 0..m {
        let row = &w[k..k + (m - i - 1)];
        let mut acc = 0.0;
        for (x, dj) in row.iter().zip(&mut out[i + 1..]) {
            acc += x;
            *dj += x;
        }
        out[i] += acc;
        k += m - i - 1;
    }
}

/// `out = S^T v`: the entry for pair `(i, j)` is `v[i] + v[j]`.
pub fn degree_adjoint_into(m: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(v.len(), m);
    debug_assert_eq!(out.len(), edge_count(m));
    let mut k = 0;
    for i in 0..m {
        let vi = v[i];
        for (o, vj) in out[k..k + (m - i - 1)].iter_mut().zip(&v[i + 1..]) {
            *o = vi + vj;
        }
        k += m - i - 1;
    }
}

pub fn degree_map(w: &EdgeVector) -> DegreeVector {
    let mut d = vec![0.0; w.m];
    degree_map_into(w.m, &w.w, &mut d);
    DegreeVector(d)
}

/// Adjoint of [`degree_map`]; the output lives in edge space but may be negative.
pub fn degree_adjoint(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let mut out = vec![0.0; edge_count(m)];
    degree_adjoint_into(m, v, &mut out);
    out
}

/// Spectral norm of the degree operator, `sqrt(2(m-1))`.
pub fn operator_norm_s(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::validation(format!("operator norm needs m >= 2, got {m}")));
    }
    Ok((2.0 * (m as f64 - 1.0)).sqrt())
}

pub fn laplacian_from_edges(w: &EdgeVector) -> LaplacianMatrix {
    let m = w.nodes();
    let mut l = DMatrix::zeros(m, m);
    for ((i, j), &x) in edge_pairs(m).zip(&w.w) {
        l[(i, j)] = -x;
        l[(j, i)] = -x;
        l[(i, i)] += x;
        l[(j, j)] += x;
    }
    LaplacianMatrix(l)
}

/// Row-major copy of a data matrix so that node rows are contiguous.
fn rows_of(x: &DMatrix<f64>) -> Vec<f64> {
    let (m, n) = x.shape();
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        out.extend(x.row(i).iter());
    }
    out
}

/// Dirichlet energy `tr(X^T L X)` of the rows of `x` on the graph `w`.
pub fn smoothness_value(x: &DMatrix<f64>, w: &EdgeVector) -> Result<f64> {
    if x.nrows() != w.nodes() {
        return Err(Error::DimensionMismatch {
            expected: w.nodes(),
            actual: x.nrows(),
        });
    }
    let l = laplacian_from_edges(w);
    let lx = l.matrix() * x;
    Ok(x.component_mul(&lx).sum())
}

/// Squared Euclidean distances between the rows of `x`.
///
/// Differences are formed before squaring; the expanded
/// `|a|^2 + |b|^2 - 2ab` form loses accuracy for nearby rows.
pub fn pairwise_distances(x: &DMatrix<f64>) -> Result<DistanceVector> {
    let (m, n) = x.shape();
    if m < 2 {
        return Err(Error::validation(format!("need at least 2 rows, got {m}")));
    }
    let rows = rows_of(x);
    let mut z = Vec::with_capacity(edge_count(m));
    for i in 0..m {
        let a = &rows[i * n..(i + 1) * n];
        for j in i + 1..m {
            let b = &rows[j * n..(j + 1) * n];
            z.push(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum());
        }
    }
    DistanceVector::new(m, z)
}

/// Edge weighting used by [`knn_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum KnnWeighting {
    Binary,
    /// `exp(-z / (2 sigma^2))` on the selected edges.
    Gaussian { sigma: f64 },
}

/// Symmetrized (union) k-nearest-neighbour graph.
///
/// Pair `(i, j)` is an edge when `j` is among the `k` closest nodes of `i`
/// or vice versa. Equal distances are resolved in favour of the lower node
/// index.
pub fn knn_edges(z: &DistanceVector, k: usize, weighting: KnnWeighting) -> Result<EdgeVector> {
    let m = z.nodes();
    if k < 1 || k + 1 > m {
        return Err(Error::validation(format!("k must lie in [1, {}], got {k}", m.saturating_sub(1))));
    }
    if let KnnWeighting::Gaussian { sigma } = weighting {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::validation("knn Gaussian sigma must be positive"));
        }
    }
    let mut present = vec![false; edge_count(m)];
    let mut neighbours: Vec<usize> = Vec::with_capacity(m - 1);
    for i in 0..m {
        neighbours.clear();
        neighbours.extend((0..m).filter(|&j| j != i));
        neighbours.sort_by(|&a, &b| z.get(i, a).total_cmp(&z.get(i, b)).then(a.cmp(&b)));
        for &j in &neighbours[..k] {
            present[edge_index(m, i.min(j), i.max(j))] = true;
        }
    }
    let w = edge_pairs(m)
        .zip(&present)
        .map(|((i, j), &p)| match (p, weighting) {
            (false, _) => 0.0,
            (true, KnnWeighting::Binary) => 1.0,
            (true, KnnWeighting::Gaussian { sigma }) => (-z.get(i, j) / (2.0 * sigma * sigma)).exp(),
        })
        .collect();
    EdgeVector::new(m, w)
}
