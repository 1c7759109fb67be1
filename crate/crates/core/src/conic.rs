//! Conics at infinity, ruling quadrics and quadric classification.
//!
//! A conic at infinity is a nonzero symmetric form `Q` with `eᵀQe = 0` on
//! every edge vector. A framework is ruled when a nonzero homogeneous form
//! `Q̂` satisfies `p̂ᵢᵀQ̂p̂ᵢ = 0` at every vertex and `p̂ᵢᵀQ̂p̂ⱼ = 0` on every
//! edge; both conditions are linear in the form, so each space is one
//! nullspace computation.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{homogenize, Framework};
use crate::numerics::{self, SignatureTriple, Tolerance};

/// Nonzero symmetric `d × d` form, unit Frobenius norm, first
/// significant entry positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConicForm {
    #[serde(serialize_with = "crate::serialize_matrix")]
    matrix: DMatrix<f64>,
}

impl ConicForm {
    pub fn new(matrix: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let sym = numerics::symmetrize(&matrix);
        Ok(Self {
            matrix: numerics::normalize_symmetric(&sym, tol)?,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// eᵀQe
    pub fn evaluate(&self, e: &DVector<f64>) -> f64 {
        e.dot(&(&self.matrix * e))
    }
}

/// Symmetric `(d+1) × (d+1)` form of `Q(x) = xᵀQx + lᵀx + c`: top-left
/// block `Q`, last column `l/2` over `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneousQuadric {
    #[serde(serialize_with = "crate::serialize_matrix")]
    matrix: DMatrix<f64>,
}

impl HomogeneousQuadric {
    pub fn new(matrix: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let sym = numerics::symmetrize(&matrix);
        Ok(Self {
            matrix: numerics::normalize_symmetric(&sym, tol)?,
        })
    }

    /// Builds `Q̂` from the affine polynomial coefficients.
    pub fn from_polynomial(
        quadratic: &DMatrix<f64>,
        linear: &DVector<f64>,
        constant: f64,
        tol: &Tolerance,
    ) -> Result<Self> {
        let d = quadratic.nrows();
        if linear.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: linear.len(),
            });
        }
        let mut m = DMatrix::zeros(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(quadratic);
        for k in 0..d {
            m[(k, d)] = 0.5 * linear[k];
            m[(d, k)] = 0.5 * linear[k];
        }
        m[(d, d)] = constant;
        Self::new(m, tol)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Ambient dimension `d`.
    pub fn dimension(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn quadratic_part(&self) -> DMatrix<f64> {
        let d = self.dimension();
        self.matrix.view((0, 0), (d, d)).into_owned()
    }

    pub fn linear_part(&self) -> DVector<f64> {
        let d = self.dimension();
        self.matrix.view((0, d), (d, 1)).column(0) * 2.0
    }

    pub fn constant(&self) -> f64 {
        let d = self.dimension();
        self.matrix[(d, d)]
    }

    /// Q(x) = x̂ᵀQ̂x̂
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        let h = homogeneous_point(x);
        h.dot(&(&self.matrix * &h))
    }

    /// Scale against which values of Q near `x` are compared.
    fn value_scale(&self, x: &DVector<f64>) -> f64 {
        self.matrix.norm() * (1.0 + x.norm_squared())
    }
}

pub(crate) fn homogeneous_point(x: &DVector<f64>) -> DVector<f64> {
    let d = x.len();
    let mut h = DVector::from_element(d + 1, 1.0);
    h.rows_mut(0, d).copy_from(x);
    h
}

/// Coefficients of `x̂ᵀQ̂ŷ` in [`numerics::svec`] coordinates.
fn bilinear_row(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut row = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        row.push(x[k] * y[k]);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            row.push((x[k] * y[l] + x[l] * y[k]) / SQRT_2);
        }
    }
    row
}

/// Stacks rows (each rescaled to unit length) into a constraint matrix.
fn constraint_matrix(rows: Vec<Vec<f64>>, width: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), width);
    for (r, row) in rows.iter().enumerate() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (c, x) in row.iter().enumerate() {
                m[(r, c)] = x / norm;
            }
        }
    }
    m
}

/// Conic space spanned by forms vanishing on the given directions.
pub fn conic_space_from_directions(
    directions: &[DVector<f64>],
    dimension: usize,
    tol: &Tolerance,
) -> Result<Vec<ConicForm>> {
    let width = dimension * (dimension + 1) / 2;
    let rows = directions
        .iter()
        .map(|e| {
            if e.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: e.len(),
                });
            }
            let v = e.as_slice();
            Ok(bilinear_row(v, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let kernel = numerics::rank_nullspace(&constraint_matrix(rows, width), tol)?;
    kernel
        .nullspace
        .column_iter()
        .map(|c| ConicForm::new(numerics::smat(c.as_slice(), dimension), tol))
        .collect()
}

/// Orthonormal (Frobenius) basis of forms `Q` with `eᵀQe = 0` on every
/// edge. Empty means no conic at infinity.
pub fn conic_space(f: &Framework, tol: &Tolerance) -> Result<Vec<ConicForm>> {
    conic_space_from_directions(&f.edge_vectors(), f.dimension(), tol)
}

pub fn has_conic_at_infinity(f: &Framework, tol: &Tolerance) -> Result<bool> {
    Ok(!conic_space(f, tol)?.is_empty())
}

/// Ruling-quadric space for raw coordinates (rows of `coords`) and an
/// edge list. Does not require a valid [`Framework`]; used for kernel
/// frameworks reconstructed from stress matrices.
pub fn ruling_space_for_points(
    coords: &DMatrix<f64>,
    edges: &[(usize, usize)],
    tol: &Tolerance,
) -> Result<Vec<HomogeneousQuadric>> {
    numerics::check_finite(coords)?;
    let (n, d) = coords.shape();
    // Condition: work in centered, unit-RMS coordinates, then map back.
    let center = coords.row_mean();
    let mut normalized = coords.clone();
    for mut row in normalized.row_iter_mut() {
        row -= &center;
    }
    let rms = (normalized.norm_squared() / n.max(1) as f64).sqrt();
    let scale = if rms > 0.0 { rms } else { 1.0 };
    normalized /= scale;
    let hom = homogenize(&normalized);

    let width = (d + 1) * (d + 2) / 2;
    let mut rows = Vec::with_capacity(n + edges.len());
    for i in 0..n {
        let p: Vec<f64> = hom.row(i).iter().copied().collect();
        rows.push(bilinear_row(&p, &p));
    }
    for &(i, j) in edges {
        let p: Vec<f64> = hom.row(i).iter().copied().collect();
        let q: Vec<f64> = hom.row(j).iter().copied().collect();
        rows.push(bilinear_row(&p, &q));
    }
    let kernel = numerics::rank_nullspace(&constraint_matrix(rows, width), tol)?;
    if kernel.nullity() == 0 {
        return Ok(Vec::new());
    }

    // p̂ = T p̃ with T = [[s I, c], [0, 1]], so Q̂ = T⁻ᵀ Q̃ T⁻¹.
    let mut t_inv = DMatrix::identity(d + 1, d + 1);
    for k in 0..d {
        t_inv[(k, k)] = 1.0 / scale;
        t_inv[(k, d)] = -center[k] / scale;
    }
    let mapped: Vec<DMatrix<f64>> = kernel
        .nullspace
        .column_iter()
        .map(|c| {
            let q = numerics::smat(c.as_slice(), d + 1);
            t_inv.transpose() * q * &t_inv
        })
        .collect();

    let mut stack = DMatrix::zeros(width, mapped.len());
    for (k, m) in mapped.iter().enumerate() {
        stack.set_column(k, &DVector::from_vec(numerics::svec(m)));
    }
    let ortho = numerics::column_space(&stack, tol)?;
    ortho
        .column_iter()
        .map(|c| HomogeneousQuadric::new(numerics::smat(c.as_slice(), d + 1), tol))
        .collect()
}

/// Basis of quadrics containing every vertex and every edge line.
pub fn ruling_quadric_space(f: &Framework, tol: &Tolerance) -> Result<Vec<HomogeneousQuadric>> {
    ruling_space_for_points(f.config().matrix(), f.graph().edges(), tol)
}

pub fn is_ruled(f: &Framework, tol: &Tolerance) -> Result<bool> {
    Ok(!ruling_quadric_space(f, tol)?.is_empty())
}

/// Singular (cone) points of a quadric in the affine patch.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConePointSpace {
    /// Smooth quadric.
    Empty,
    /// Kernel of `Q̂` lies in the hyperplane at infinity.
    AtInfinity {
        #[serde(serialize_with = "crate::serialize_matrix")]
        directions: DMatrix<f64>,
    },
    /// `base + span(directions)`, directions as orthonormal columns.
    Affine {
        base: Vec<f64>,
        #[serde(serialize_with = "crate::serialize_matrix")]
        directions: DMatrix<f64>,
    },
}

impl ConePointSpace {
    /// Dimension of the affine cone-point set, if it is nonempty.
    pub fn affine_dimension(&self) -> Option<usize> {
        match self {
            ConePointSpace::Affine { directions, .. } => Some(directions.ncols()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadricClassification {
    pub rank: usize,
    pub signature: SignatureTriple,
    pub is_smooth: bool,
    /// Definite or semidefinite forms cannot carry a full-span point set.
    pub is_semidefinite: bool,
    pub cone_points: ConePointSpace,
}

pub fn classify_quadric(q: &HomogeneousQuadric, tol: &Tolerance) -> Result<QuadricClassification> {
    let m = q.matrix();
    if m.norm() <= tol.absolute_floor {
        return Err(Error::ZeroMatrix);
    }
    let d = q.dimension();
    let signature = numerics::eigen_signature(m, tol)?;
    let kernel = numerics::rank_nullspace(m, tol)?.nullspace;
    let cone_points = if kernel.ncols() == 0 {
        ConePointSpace::Empty
    } else {
        let last = kernel.row(d).transpose();
        let last_norm = last.norm();
        if last_norm <= tol.cutoff(1.0).max(1e-10) {
            ConePointSpace::AtInfinity {
                directions: kernel.rows(0, d).into_owned(),
            }
        } else {
            let u = &last / last_norm;
            let base_h = &kernel * &u;
            let base: Vec<f64> = (0..d).map(|k| base_h[k] / base_h[d]).collect();
            let complement =
                numerics::rank_nullspace(&DMatrix::from_row_slice(1, u.len(), u.as_slice()), tol)?
                    .nullspace;
            let directions = (&kernel * complement).rows(0, d).into_owned();
            ConePointSpace::Affine { base, directions }
        }
    };
    Ok(QuadricClassification {
        rank: signature.rank(),
        signature,
        is_smooth: signature.rank() == d + 1,
        is_semidefinite: signature.negatives == 0 || signature.positives == 0,
        cone_points,
    })
}

/// Singular-point test: `Q̂x̂ = 0`. The point must lie on the quadric.
pub fn is_cone_point(q: &HomogeneousQuadric, x: &DVector<f64>, tol: &Tolerance) -> Result<bool> {
    if x.len() != q.dimension() {
        return Err(Error::DimensionMismatch {
            expected: q.dimension(),
            found: x.len(),
        });
    }
    let value = q.evaluate(x);
    if !tol.is_negligible(value, q.value_scale(x)) {
        return Err(Error::NotOnQuadric { value });
    }
    let h = homogeneous_point(x);
    let gradient = q.matrix() * &h;
    Ok(tol.is_negligible(gradient.norm(), q.matrix().norm() * h.norm()))
}

/// Cross-check of [`is_cone_point`] against the line definition: draws
/// random points `y` on the quadric and checks that the whole line `x–y`
/// lies on it. Returns `None` when no sample point could be found.
pub fn cone_point_by_lines<R: Rng + ?Sized>(
    q: &HomogeneousQuadric,
    x: &DVector<f64>,
    samples: usize,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<Option<bool>> {
    let d = q.dimension();
    let mut found = 0;
    let mut attempts = 0;
    while found < samples && attempts < samples * 50 {
        attempts += 1;
        let a = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal)) + x;
        let b = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        // Q(a + t b) = α t² + β t + γ
        let ah = homogeneous_point(&a);
        let mut bh = DVector::zeros(d + 1);
        bh.rows_mut(0, d).copy_from(&b);
        let m = q.matrix();
        let alpha = bh.dot(&(m * &bh));
        let beta = 2.0 * ah.dot(&(m * &bh));
        let gamma = ah.dot(&(m * &ah));
        let t = if alpha.abs() < 1e-14 {
            if beta.abs() < 1e-14 {
                continue;
            }
            -gamma / beta
        } else {
            let disc = beta * beta - 4.0 * alpha * gamma;
            if disc < 0.0 {
                continue;
            }
            (-beta + disc.sqrt()) / (2.0 * alpha)
        };
        let y = &a + &b * t;
        if (&y - x).norm() < 1e-6 * (1.0 + x.norm()) {
            continue;
        }
        found += 1;
        if !line_on_quadric(
            q,
            x,
            &y,
            &Tolerance::relative(tol.relative_cutoff.max(1e-8))?,
        )? {
            return Ok(Some(false));
        }
    }
    Ok(if found == 0 { None } else { Some(true) })
}

/// True iff the whole line through `x1` and `x2` lies on the quadric:
/// both endpoints on it and `eᵀQe = 0` for `e = x2 - x1`, confirmed by
/// evaluating Q at ten points of the line.
pub fn line_on_quadric(
    q: &HomogeneousQuadric,
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    tol: &Tolerance,
) -> Result<bool> {
    let d = q.dimension();
    for x in [x1, x2] {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.len(),
            });
        }
    }
    let e = x2 - x1;
    let quad = q.quadratic_part();
    let scale = q.matrix().norm() * (1.0 + x1.norm_squared().max(x2.norm_squared()));
    let direct = tol.is_negligible(q.evaluate(x1), scale)
        && tol.is_negligible(q.evaluate(x2), scale)
        && tol.is_negligible(
            e.dot(&(&quad * &e)),
            quad.norm().max(q.matrix().norm()) * e.norm_squared(),
        );
    let sampled = (0..10).all(|k| {
        let t = -1.0 + k as f64 / 3.0;
        let x = x1 + &e * t;
        tol.is_negligible(q.evaluate(&x), q.matrix().norm() * (1.0 + x.norm_squared()))
    });
    Ok(direct && sampled)
}

/// Quadratic part of a quadric as a conic at infinity; `None` when the
/// quadratic part vanishes (the quadric is a hyperplane).
pub fn conic_restriction(q: &HomogeneousQuadric, tol: &Tolerance) -> Result<Option<ConicForm>> {
    let block = q.quadratic_part();
    if tol.is_negligible(block.norm(), q.matrix().norm()) {
        return Ok(None);
    }
    ConicForm::new(block, tol).map(Some)
}
