//! Graphs, configurations, frameworks and equilibrium stresses.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{self, SignatureTriple, Tolerance};

/// A simple connected graph. Edges are stored as `(i, j)` with `i < j`,
/// in the order they were supplied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip)]
    lookup: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!(
                "need at least 2 vertices, got {n}"
            )));
        }
        let mut stored = Vec::new();
        let mut lookup = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !lookup.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            stored.push(e);
        }
        let g = Self {
            n,
            edges: stored,
            lookup,
        };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.lookup.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Vertex `i` followed by its neighbors.
    pub fn closed_neighborhood(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        out.extend(self.neighbors(i));
        out
    }

    fn is_connected(&self) -> bool {
        let mut adjacency = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// `n` points in `E^d`, stored as the rows of an `n × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    coords: DMatrix<f64>,
}

impl Configuration {
    pub fn new(dimension: usize, points: &[Vec<f64>]) -> Result<Self> {
        Self::with_tolerance(dimension, points, &Tolerance::default())
    }

    pub fn with_tolerance(dimension: usize, points: &[Vec<f64>], tol: &Tolerance) -> Result<Self> {
        let mut coords = DMatrix::zeros(points.len(), dimension);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: p.len(),
                });
            }
            for (k, &x) in p.iter().enumerate() {
                coords[(i, k)] = x;
            }
        }
        Self::from_matrix(coords, tol)
    }

    /// Rows of `coords` are the points.
    pub fn from_matrix(coords: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        numerics::check_finite(&coords)?;
        let d = coords.ncols();
        if d == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let rank = affine_rank(&coords, tol)?;
        if rank != d {
            return Err(Error::DegenerateConfiguration { dimension: d, rank });
        }
        Ok(Self { coords })
    }

    pub fn dimension(&self) -> usize {
        self.coords.ncols()
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.coords.row(i).transpose()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.coords.row(i).iter().copied().collect())
            .collect()
    }

    pub fn centroid(&self) -> DVector<f64> {
        self.coords.row_mean().transpose()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max((self.coords.row(i) - self.coords.row(j)).norm());
            }
        }
        best
    }

    /// Centered and rescaled copy of the coordinates (unit RMS radius).
    /// Affine-invariant computations use it for conditioning.
    pub(crate) fn normalized(&self) -> (DMatrix<f64>, DVector<f64>, f64) {
        let c = self.centroid();
        let mut centered = self.coords.clone();
        for mut row in centered.row_iter_mut() {
            row -= c.transpose();
        }
        let rms = (centered.norm_squared() / self.len() as f64).sqrt();
        let scale = if rms > 0.0 { rms } else { 1.0 };
        (centered / scale, c, scale)
    }
}

/// Dimension of the affine span of the rows of `points`.
pub fn affine_rank(points: &DMatrix<f64>, tol: &Tolerance) -> Result<usize> {
    if points.nrows() == 0 {
        return Ok(0);
    }
    let c = points.row_mean();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= &c;
    }
    numerics::rank(&centered, tol)
}

/// `[P | 1]` for the given coordinate matrix.
pub(crate) fn homogenize(coords: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = coords.shape();
    let mut out = DMatrix::from_element(n, d + 1, 1.0);
    out.columns_mut(0, d).copy_from(coords);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    graph: Graph,
    config: Configuration,
}

impl Framework {
    pub fn new(graph: Graph, config: Configuration) -> Result<Self> {
        Self::with_tolerance(graph, config, &Tolerance::default())
    }

    pub fn with_tolerance(graph: Graph, config: Configuration, tol: &Tolerance) -> Result<Self> {
        if graph.vertex_count() != config.len() {
            return Err(Error::DimensionMismatch {
                expected: graph.vertex_count(),
                found: config.len(),
            });
        }
        let scale = config.diameter();
        for &(i, j) in graph.edges() {
            let len = (config.coords.row(j) - config.coords.row(i)).norm();
            if tol.is_negligible(len, scale) {
                return Err(Error::CoincidentVertices(i, j));
            }
        }
        Ok(Self { graph, config })
    }

    /// Convenience constructor from raw coordinates and an edge list.
    pub fn from_parts(
        dimension: usize,
        points: &[Vec<f64>],
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let config = Configuration::new(dimension, points)?;
        let graph = Graph::new(points.len(), edges.iter().copied())?;
        Self::new(graph, config)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension()
    }

    /// Rank `n - d - 1` that a maximal equilibrium stress can reach.
    pub fn target_stress_rank(&self) -> usize {
        self.vertex_count().saturating_sub(self.dimension() + 1)
    }

    /// `e_ij = p_j - p_i` for every stored edge `(i, j)`, `i < j`.
    pub fn edge_vectors(&self) -> Vec<DVector<f64>> {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| self.config.point(j) - self.config.point(i))
            .collect()
    }

    pub fn squared_edge_lengths(&self) -> Vec<f64> {
        self.edge_vectors()
            .iter()
            .map(|e| e.norm_squared())
            .collect()
    }

    /// Same graph, new coordinates.
    pub fn with_configuration(&self, config: Configuration) -> Result<Self> {
        Self::new(self.graph.clone(), config)
    }

    /// Vertices whose closed neighborhood has a full `d`-dimensional affine span.
    pub fn full_span_vertices(&self, tol: &Tolerance) -> Result<Vec<usize>> {
        let d = self.dimension();
        let mut out = Vec::new();
        for i in 0..self.vertex_count() {
            let hood = self.graph.closed_neighborhood(i);
            let sub = self.config.coords.select_rows(hood.iter());
            if affine_rank(&sub, tol)? == d {
                out.push(i);
            }
        }
        Ok(out)
    }
}

pub fn edge_vectors(f: &Framework) -> Vec<DVector<f64>> {
    f.edge_vectors()
}

/// True iff both frameworks share the graph and every squared edge length
/// agrees to relative tolerance. Dimensions may differ.
pub fn is_equivalent(f1: &Framework, f2: &Framework, tol: &Tolerance) -> Result<bool> {
    if f1.graph.vertex_count() != f2.graph.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: f1.graph.vertex_count(),
            found: f2.graph.vertex_count(),
        });
    }
    if f1.graph.edges() != f2.graph.edges() {
        return Err(Error::InvalidGraph(
            "frameworks have different edge lists".into(),
        ));
    }
    let a = f1.squared_edge_lengths();
    let b = f2.squared_edge_lengths();
    Ok(a.iter()
        .zip(&b)
        .all(|(x, y)| tol.is_negligible(x - y, x.abs().max(y.abs()))))
}

/// Symmetric matrix supported on a graph with the all-ones vector in its
/// kernel. Off-diagonal entries are the edge scalars directly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StressMatrix {
    #[serde(serialize_with = "crate::serialize_matrix")]
    matrix: DMatrix<f64>,
}

impl StressMatrix {
    /// Validates symmetry, graph support and zero row sums.
    pub fn from_matrix(graph: &Graph, matrix: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        let n = graph.vertex_count();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        let scale = matrix.norm();
        for i in 0..n {
            for j in (i + 1)..n {
                if !tol.is_negligible(matrix[(i, j)] - matrix[(j, i)], scale) {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if !graph.has_edge(i, j) && !tol.is_negligible(matrix[(i, j)], scale) {
                    return Err(Error::NotGraphSupported(i, j));
                }
            }
        }
        let ones = DVector::from_element(n, 1.0);
        let residual = (&matrix * ones).norm();
        if !tol.is_negligible(residual, scale * (n as f64).sqrt()) {
            return Err(Error::OnesNotInKernel);
        }
        Ok(Self {
            matrix: numerics::symmetrize(&matrix),
        })
    }

    /// Wraps a matrix already known to be a stress (internal constructions).
    pub(crate) fn from_raw(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Off-diagonal entries read back in edge order.
    pub fn edge_weights(&self, graph: &Graph) -> Vec<f64> {
        graph
            .edges()
            .iter()
            .map(|&(i, j)| self.matrix[(i, j)])
            .collect()
    }

    pub fn signature(&self, tol: &Tolerance) -> Result<SignatureTriple> {
        numerics::eigen_signature(&self.matrix, tol)
    }

    pub fn rank(&self, tol: &Tolerance) -> Result<usize> {
        Ok(self.signature(tol)?.rank())
    }

    /// Unit Frobenius norm copy; zero stays zero.
    pub fn normalized(&self) -> Self {
        let norm = self.matrix.norm();
        if norm > 0.0 {
            Self::from_raw(&self.matrix / norm)
        } else {
            self.clone()
        }
    }
}

/// Ω_ij = w(ij) on edges, Ω_ii = -Σ_j Ω_ij, zero elsewhere.
pub fn assemble_stress(graph: &Graph, weights: &[f64]) -> Result<StressMatrix> {
    if weights.len() != graph.edge_count() {
        return Err(Error::LengthMismatch {
            expected: graph.edge_count(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = graph.vertex_count();
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &w) in graph.edges().iter().zip(weights) {
        m[(i, j)] = w;
        m[(j, i)] = w;
        m[(i, i)] -= w;
        m[(j, j)] -= w;
    }
    Ok(StressMatrix::from_raw(m))
}

/// Basis of the equilibrium stress space of a framework.
#[derive(Clone, Debug)]
pub struct StressBasis {
    /// Orthonormal in edge-weight coordinates; column `k` belongs to `basis[k]`.
    pub weights: DMatrix<f64>,
    pub basis: Vec<StressMatrix>,
}

impl StressBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Σ c_k Ω_k
    pub fn combination(&self, coefficients: &[f64]) -> StressMatrix {
        let n = self.basis.first().map_or(0, |b| b.dimension());
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in coefficients.iter().zip(&self.basis) {
            m += b.matrix() * *c;
        }
        StressMatrix::from_raw(m)
    }

    /// Combination with independent standard normal coefficients.
    pub fn random_combination<R: Rng + ?Sized>(&self, rng: &mut R) -> StressMatrix {
        let c: Vec<f64> = (0..self.dimension())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.combination(&c)
    }
}

/// Linear map from edge scalars to the `n·d` equilibrium residuals
/// Σ_j Ω_ij (p_i - p_j), row `i·d + k`.
pub(crate) fn equilibrium_operator(graph: &Graph, coords: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = coords.shape();
    let mut a = DMatrix::zeros(n * d, graph.edge_count());
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        for k in 0..d {
            let diff = coords[(i, k)] - coords[(j, k)];
            a[(i * d + k, e)] += diff;
            a[(j * d + k, e)] -= diff;
        }
    }
    a
}

pub fn stress_space_basis(f: &Framework, tol: &Tolerance) -> Result<StressBasis> {
    let (coords, _, _) = f.config.normalized();
    let op = equilibrium_operator(&f.graph, &coords);
    let kernel = numerics::rank_nullspace(&op, tol)?;
    let basis = kernel
        .nullspace
        .column_iter()
        .map(|w| {
            let w: Vec<f64> = w.iter().copied().collect();
            assemble_stress(&f.graph, &w)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StressBasis {
        weights: kernel.nullspace,
        basis,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StressCheck {
    pub is_equilibrium: bool,
    pub rank: usize,
    pub signature: SignatureTriple,
    /// ‖Ω·[P | 1]‖ / (‖Ω‖·‖[P | 1]‖) on centered, rescaled coordinates.
    pub residual: f64,
}

/// Relative equilibrium residual of `stress` against the framework.
pub fn equilibrium_residual(stress: &StressMatrix, f: &Framework) -> Result<f64> {
    if stress.dimension() != f.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: f.vertex_count(),
            found: stress.dimension(),
        });
    }
    let (coords, _, _) = f.config.normalized();
    let hom = homogenize(&coords);
    let denom = stress.matrix().norm() * hom.norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((stress.matrix() * &hom).norm() / denom)
}

pub fn check_stress(stress: &StressMatrix, f: &Framework, tol: &Tolerance) -> Result<StressCheck> {
    let residual = equilibrium_residual(stress, f)?;
    let signature = stress.signature(tol)?;
    Ok(StressCheck {
        is_equilibrium: residual <= tol.relative_cutoff,
        rank: signature.rank(),
        signature,
        residual,
    })
}
