//! Perturbation maps, affine pre-equivalence and precongruence,
//! neighborhood affine rigidity, and explicit affine flexes.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::conic::{ConicForm, HomogeneousQuadric};
use crate::error::{Error, Result};
use crate::framework::{homogenize, Configuration, Framework};
use crate::numerics::{self, Tolerance};

/// `m(x) = x + (xᵀQx) v`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationMap {
    quadratic: DMatrix<f64>,
    direction: DVector<f64>,
}

impl PerturbationMap {
    /// `quadratic` is used as given (not renormalized), so `Q = [[0, ½], [½, 0]]`
    /// gives `xᵀQx = xy`.
    pub fn new(quadratic: DMatrix<f64>, direction: DVector<f64>) -> Result<Self> {
        numerics::check_finite(&quadratic)?;
        if !quadratic.is_square() || quadratic.nrows() != direction.len() {
            return Err(Error::DimensionMismatch {
                expected: quadratic.nrows(),
                found: direction.len(),
            });
        }
        if quadratic.norm() == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        if direction.norm() == 0.0 || direction.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "perturbation direction must be nonzero".into(),
            ));
        }
        Ok(Self {
            quadratic: numerics::symmetrize(&quadratic),
            direction,
        })
    }

    pub fn from_conic(q: &ConicForm, direction: DVector<f64>) -> Result<Self> {
        Self::new(q.matrix().clone(), direction)
    }

    pub fn quadratic(&self) -> &DMatrix<f64> {
        &self.quadratic
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.direction
    }

    pub fn apply_point(&self, x: &DVector<f64>) -> DVector<f64> {
        let bracket = x.dot(&(&self.quadratic * x));
        x + &self.direction * bracket
    }
}

pub fn apply_perturbation(
    m: &PerturbationMap,
    c: &Configuration,
    tol: &Tolerance,
) -> Result<Configuration> {
    if c.dimension() != m.direction.len() {
        return Err(Error::DimensionMismatch {
            expected: m.direction.len(),
            found: c.dimension(),
        });
    }
    let mut out = c.matrix().clone();
    for i in 0..c.len() {
        let image = m.apply_point(&c.point(i));
        out.set_row(i, &image.transpose());
    }
    Configuration::from_matrix(out, tol)
}

/// `x ↦ A x + t`; `A` may be singular.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineMap {
    #[serde(serialize_with = "crate::serialize_matrix")]
    pub linear: DMatrix<f64>,
    #[serde(serialize_with = "crate::serialize_vector")]
    pub translation: DVector<f64>,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        Self {
            linear: DMatrix::identity(d, d),
            translation: DVector::zeros(d),
        }
    }

    pub fn apply_point(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.translation
    }

    /// Applies the map to every row of a coordinate matrix.
    pub fn apply_rows(&self, coords: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = coords * self.linear.transpose();
        for mut row in out.row_iter_mut() {
            row += self.translation.transpose();
        }
        out
    }

    pub fn apply_configuration(&self, c: &Configuration, tol: &Tolerance) -> Result<Configuration> {
        Configuration::from_matrix(self.apply_rows(c.matrix()), tol)
    }
}

/// Least-squares affine fit between matching rows of two coordinate matrices.
pub(crate) fn fit_affine_rows(p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(AffineMap, f64)> {
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            found: q.nrows(),
        });
    }
    let d = p.ncols();
    let x = homogenize(p);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let b = svd
        .solve(q, eps)
        .map_err(|e| Error::InvalidParameter(format!("least-squares solve failed: {e}")))?;
    let residual = (&x * &b - q).norm();
    let linear = b.rows(0, d).transpose();
    let translation = b.row(d).transpose();
    Ok((
        AffineMap {
            linear,
            translation,
        },
        residual,
    ))
}

fn centered_norm(m: &DMatrix<f64>) -> f64 {
    let c = m.row_mean();
    let mut centered = m.clone();
    for mut row in centered.row_iter_mut() {
        row -= &c;
    }
    centered.norm()
}

/// Least-squares map minimizing Σᵢ ‖A pᵢ + t − qᵢ‖², with the root of the minimum.
pub fn fit_affine(p: &Configuration, q: &Configuration) -> Result<(AffineMap, f64)> {
    fit_affine_rows(p.matrix(), q.matrix())
}

pub fn is_affine_precongruent(
    p: &Configuration,
    q: &Configuration,
    tol: &Tolerance,
) -> Result<bool> {
    let (_, residual) = fit_affine(p, q)?;
    Ok(tol.is_negligible(residual, centered_norm(q.matrix())))
}

/// Every closed neighborhood of `f` maps onto the matching points of `q`
/// by some (possibly singular) affine map.
pub fn is_neighborhood_preequivalent(
    f: &Framework,
    q: &Configuration,
    tol: &Tolerance,
) -> Result<bool> {
    if q.len() != f.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: f.vertex_count(),
            found: q.len(),
        });
    }
    let (p, _, _) = f.config().normalized();
    let (qn, _, _) = q.normalized();
    for i in 0..f.vertex_count() {
        let hood = f.graph().closed_neighborhood(i);
        let ps = p.select_rows(hood.iter());
        let qs = qn.select_rows(hood.iter());
        let (_, residual) = fit_affine_rows(&ps, &qs)?;
        if !tol.is_negligible(residual, centered_norm(&qs)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Orthonormal basis (columns) of `W = ∩ᵢ Wᵢ`, where `Wᵢ` holds the
/// vectors whose restriction to the closed neighborhood of `i` is an
/// affine function of the coordinates there.
pub fn neighborhood_affine_space(f: &Framework, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let n = f.vertex_count();
    let (p, _, _) = f.config().normalized();
    let hom = homogenize(&p);
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let hood = f.graph().closed_neighborhood(i);
        let local = hom.select_rows(hood.iter());
        // Vectors orthogonal to the local affine functions.
        let complement = numerics::rank_nullspace(&local.transpose(), tol)?.nullspace;
        for c in complement.column_iter() {
            let mut row = DVector::zeros(n);
            for (k, &v) in hood.iter().enumerate() {
                row[v] = c[k];
            }
            rows.push(row);
        }
    }
    let mut constraints = DMatrix::zeros(rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        constraints.set_row(r, &row.transpose());
    }
    Ok(numerics::rank_nullspace(&constraints, tol)?.nullspace)
}

pub fn is_neighborhood_affine_rigid(f: &Framework, tol: &Tolerance) -> Result<bool> {
    Ok(neighborhood_affine_space(f, tol)?.ncols() == f.dimension() + 1)
}

/// `A_t = sqrt(I + tQ)`; preserves `‖e‖` for every `e` with `eᵀQe = 0`.
pub fn affine_flex_path(q: &ConicForm, t: f64, tol: &Tolerance) -> Result<AffineMap> {
    if !t.is_finite() {
        return Err(Error::FlexOutOfRange { t });
    }
    let d = q.dimension();
    let gram = DMatrix::identity(d, d) + q.matrix() * t;
    let min = numerics::min_eigenvalue(&gram)?;
    if min <= tol.cutoff(1.0) {
        return Err(Error::FlexOutOfRange { t });
    }
    Ok(AffineMap {
        linear: numerics::sqrt_psd(&gram, tol)?,
        translation: DVector::zeros(d),
    })
}

/// The framework after applying [`affine_flex_path`].
pub fn flex_framework(f: &Framework, q: &ConicForm, t: f64, tol: &Tolerance) -> Result<Framework> {
    let a = affine_flex_path(q, t, tol)?;
    f.with_configuration(a.apply_configuration(f.config(), tol)?)
}

/// True iff the linear part is orthogonal.
pub fn is_euclidean(a: &AffineMap, tol: &Tolerance) -> bool {
    let d = a.linear.ncols();
    let gram = a.linear.transpose() * &a.linear;
    let deviation = (&gram - DMatrix::identity(d, d)).norm();
    tol.is_negligible(deviation, 1.0 + gram.norm())
}

/// Quadric through the vertices forced by a precongruence `m(p) = A p + t`:
/// `xᵀQx − (vᵀ(A − I) / ‖v‖²) x − vᵀt / ‖v‖² = 0`.
pub fn precongruence_quadric(
    m: &PerturbationMap,
    a: &AffineMap,
    tol: &Tolerance,
) -> Result<HomogeneousQuadric> {
    let d = m.direction.len();
    let v = &m.direction;
    let vv = v.norm_squared();
    let shifted = &a.linear - DMatrix::identity(d, d);
    let linear = -(shifted.transpose() * v) / vv;
    let constant = -v.dot(&a.translation) / vv;
    HomogeneousQuadric::from_polynomial(&m.quadratic, &linear, constant, tol)
}
