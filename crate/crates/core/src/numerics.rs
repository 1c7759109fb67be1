//! Tolerance-aware dense linear algebra.
//!
//! Every rank, kernel and signature decision in the crate goes through
//! [`Tolerance`], so the numerical policy lives in one place.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical rank policy: a value is treated as zero when it is below
/// `relative_cutoff * scale`, but never below `absolute_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative_cutoff: f64,
    pub absolute_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative_cutoff: 1e-9,
            absolute_floor: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(relative_cutoff: f64, absolute_floor: f64) -> Result<Self> {
        let valid = relative_cutoff.is_finite()
            && absolute_floor.is_finite()
            && relative_cutoff > 0.0
            && relative_cutoff < 1.0
            && absolute_floor > 0.0;
        if !valid {
            return Err(Error::InvalidParameter(format!(
                "tolerance ({relative_cutoff}, {absolute_floor}) must be positive with relative cutoff < 1"
            )));
        }
        Ok(Self {
            relative_cutoff,
            absolute_floor,
        })
    }

    /// Default absolute floor with a custom relative cutoff.
    pub fn relative(relative_cutoff: f64) -> Result<Self> {
        Self::new(relative_cutoff, Tolerance::default().absolute_floor)
    }

    /// Threshold below which a quantity of magnitude `scale` counts as zero.
    pub fn cutoff(&self, scale: f64) -> f64 {
        (self.relative_cutoff * scale.abs()).max(self.absolute_floor)
    }

    pub fn is_negligible(&self, value: f64, scale: f64) -> bool {
        value.abs() <= self.cutoff(scale)
    }
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignatureTriple {
    pub negatives: usize,
    pub zeros: usize,
    pub positives: usize,
}

impl SignatureTriple {
    pub fn dimension(&self) -> usize {
        self.negatives + self.zeros + self.positives
    }

    pub fn rank(&self) -> usize {
        self.negatives + self.positives
    }

    pub fn is_psd(&self) -> bool {
        self.negatives == 0
    }

    pub fn is_nsd(&self) -> bool {
        self.positives == 0
    }
}

/// Numerical rank together with an orthonormal basis of the right kernel.
#[derive(Clone, Debug)]
pub struct RankNullspace {
    pub rank: usize,
    /// Columns form an orthonormal basis of the nullspace.
    pub nullspace: DMatrix<f64>,
}

impl RankNullspace {
    pub fn nullity(&self) -> usize {
        self.nullspace.ncols()
    }
}

pub fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        })
    }
}

/// (M + Mᵀ) / 2
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn largest_singular_value(s: &nalgebra::DVector<f64>) -> f64 {
    s.iter().fold(0.0_f64, |acc, &x| acc.max(x))
}

pub fn rank_nullspace(m: &DMatrix<f64>, tol: &Tolerance) -> Result<RankNullspace> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(RankNullspace {
            rank: 0,
            nullspace: DMatrix::zeros(0, 0),
        });
    }
    if rows == 0 {
        return Ok(RankNullspace {
            rank: 0,
            nullspace: DMatrix::identity(cols, cols),
        });
    }
    // A wide matrix only yields a thin Vᵀ; zero rows give the full one.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let cutoff = tol.cutoff(largest_singular_value(&svd.singular_values));

    let kernel_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let rank = cols - kernel_rows.len();
    let mut nullspace = DMatrix::zeros(cols, kernel_rows.len());
    for (k, &i) in kernel_rows.iter().enumerate() {
        nullspace.set_column(k, &v_t.row(i).transpose());
    }
    Ok(RankNullspace { rank, nullspace })
}

pub fn rank(m: &DMatrix<f64>, tol: &Tolerance) -> Result<usize> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let s = m.clone().singular_values();
    let cutoff = tol.cutoff(largest_singular_value(&s));
    Ok(s.iter().filter(|&&x| x > cutoff).count())
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &DMatrix<f64>, tol: &Tolerance) -> Result<DMatrix<f64>> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(DMatrix::zeros(m.nrows(), 0));
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let cutoff = tol.cutoff(largest_singular_value(&svd.singular_values));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let mut basis = DMatrix::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    Ok(basis)
}

/// Eigendecomposition of the symmetrized input.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_finite(m)?;
    check_square(m)?;
    Ok(SymmetricEigen::new(symmetrize(m)))
}

fn spectral_radius(eigenvalues: &nalgebra::DVector<f64>) -> f64 {
    eigenvalues.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

pub fn eigen_signature(m: &DMatrix<f64>, tol: &Tolerance) -> Result<SignatureTriple> {
    let eig = symmetric_eigen(m)?;
    let cutoff = tol.cutoff(spectral_radius(&eig.eigenvalues));
    let mut sig = SignatureTriple {
        negatives: 0,
        zeros: 0,
        positives: 0,
    };
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -cutoff {
            sig.negatives += 1;
        } else if lambda > cutoff {
            sig.positives += 1;
        } else {
            sig.zeros += 1;
        }
    }
    Ok(sig)
}

/// Smallest eigenvalue of the symmetrized matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigen(m)?;
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

fn reconstruct(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let fl = f(lambda);
        scaled.column_mut(j).scale_mut(fl);
    }
    symmetrize(&(scaled * v.transpose()))
}

/// Nearest PSD matrix in Frobenius norm.
pub fn psd_project(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m)?;
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return Ok(symmetrize(m));
    }
    Ok(reconstruct(&eig, |l| l.max(0.0)))
}

/// Symmetric PSD square root. Eigenvalues within tolerance of zero are
/// clamped; anything more negative is rejected.
pub fn sqrt_psd(m: &DMatrix<f64>, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m)?;
    let cutoff = tol.cutoff(spectral_radius(&eig.eigenvalues));
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -cutoff {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    Ok(reconstruct(&eig, |l| l.max(0.0).sqrt()))
}

/// Coordinates of a symmetric matrix in which the Euclidean inner product
/// equals the Frobenius one: diagonal entries, then √2 × upper entries
/// in row-major order.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        out.push(m[(i, i)]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], n: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), n * (n + 1) / 2);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = v[i];
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = v[k] / std::f64::consts::SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Scales to unit Frobenius norm and flips the sign so that the first
/// entry (row-major) that is not negligible is positive.
pub fn normalize_symmetric(m: &DMatrix<f64>, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let norm = m.norm();
    if norm <= tol.absolute_floor {
        return Err(Error::ZeroMatrix);
    }
    let mut out = m / norm;
    let cutoff = tol.cutoff(1.0).max(1e-8);
    let n = out.nrows();
    'search: for i in 0..n {
        for j in 0..out.ncols() {
            let x = out[(i, j)];
            if x.abs() > cutoff {
                if x < 0.0 {
                    out.neg_mut();
                }
                break 'search;
            }
        }
    }
    Ok(out)
}
