//! Coning, sliding, slicing and projective transforms, together with the
//! transport of equilibrium stresses through each of them.
//!
//! Cone frameworks keep the apex at vertex index 0.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::{equilibrium_residual, Configuration, Framework, Graph, StressMatrix};
use crate::numerics::{self, Tolerance};

/// A framework whose vertex 0 is adjacent to every other vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeFramework {
    framework: Framework,
}

impl ConeFramework {
    pub fn new(framework: Framework) -> Result<Self> {
        let g = framework.graph();
        if let Some(v) = (1..g.vertex_count()).find(|&v| !g.has_edge(0, v)) {
            return Err(Error::NotCone(format!(
                "apex 0 is not adjacent to vertex {v}"
            )));
        }
        Ok(Self { framework })
    }

    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn into_framework(self) -> Framework {
        self.framework
    }

    pub fn apex(&self) -> DVector<f64> {
        self.framework.config().point(0)
    }

    /// Number of non-apex vertices.
    pub fn base_count(&self) -> usize {
        self.framework.vertex_count() - 1
    }

    fn with_coords(&self, coords: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        let config = Configuration::from_matrix(coords, tol)?;
        Ok(Self {
            framework: Framework::with_tolerance(self.framework.graph().clone(), config, tol)?,
        })
    }
}

/// One nonzero scale per non-apex vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SlideScales(Vec<f64>);

impl SlideScales {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if let Some(i) = scales.iter().position(|&s| s == 0.0 || !s.is_finite()) {
            return Err(Error::ZeroSlideScale(i));
        }
        Ok(Self(scales))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `{x : normalᵀx = offset}`
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn signed_distance(&self, x: &DVector<f64>) -> f64 {
        (self.normal.dot(x) - self.offset) / self.normal.norm()
    }
}

/// Invertible `(d+1) × (d+1)` matrix acting on homogeneous coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveTransform {
    matrix: DMatrix<f64>,
}

impl ProjectiveTransform {
    pub fn new(matrix: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        numerics::check_finite(&matrix)?;
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if numerics::rank(&matrix, tol)? < matrix.nrows() {
            return Err(Error::SingularTransform);
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Ambient dimension `d` of the affine patch it acts on.
    pub fn dimension(&self) -> usize {
        self.matrix.nrows() - 1
    }
}

fn check_cone_stress_dims(stress: &StressMatrix, n: usize) -> Result<()> {
    if stress.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: stress.dimension(),
        });
    }
    Ok(())
}

/// Puts `E^d` in the hyperplane `x_{d+1} = 0` and joins an apex at
/// `(centroid, apex_height)` to every vertex.
pub fn cone(f: &Framework, apex_height: f64) -> Result<ConeFramework> {
    if apex_height == 0.0 || !apex_height.is_finite() {
        return Err(Error::ZeroConeHeight);
    }
    let n = f.vertex_count();
    let d = f.dimension();
    let mut coords = DMatrix::zeros(n + 1, d + 1);
    let c = f.config().centroid();
    for k in 0..d {
        coords[(0, k)] = c[k];
    }
    coords[(0, d)] = apex_height;
    coords
        .view_mut((1, 0), (n, d))
        .copy_from(f.config().matrix());
    cone_with_coords(f.graph(), coords)
}

/// Cone over `graph` with the apex in row 0 of `coords`.
fn cone_with_coords(graph: &Graph, coords: DMatrix<f64>) -> Result<ConeFramework> {
    let n = graph.vertex_count();
    let edges = (1..=n)
        .map(|v| (0, v))
        .chain(graph.edges().iter().map(|&(i, j)| (i + 1, j + 1)));
    let graph = Graph::new(n + 1, edges)?;
    let config = Configuration::from_matrix(coords, &Tolerance::default())?;
    ConeFramework::new(Framework::new(graph, config)?)
}

/// Apex at the origin, vertex `i` at `(pᵢ, 1)`.
pub fn homogeneous_cone(f: &Framework) -> Result<ConeFramework> {
    let n = f.vertex_count();
    let d = f.dimension();
    let mut coords = DMatrix::from_element(n + 1, d + 1, 1.0);
    coords.row_mut(0).fill(0.0);
    coords
        .view_mut((1, 0), (n, d))
        .copy_from(f.config().matrix());
    cone_with_coords(f.graph(), coords)
}

/// `qᵢ = p₀ + sᵢ (pᵢ − p₀)`; the apex stays put.
pub fn slide(cf: &ConeFramework, s: &SlideScales) -> Result<ConeFramework> {
    slide_with_tolerance(cf, s, &Tolerance::default())
}

pub fn slide_with_tolerance(
    cf: &ConeFramework,
    s: &SlideScales,
    tol: &Tolerance,
) -> Result<ConeFramework> {
    if s.0.len() != cf.base_count() {
        return Err(Error::LengthMismatch {
            expected: cf.base_count(),
            found: s.0.len(),
        });
    }
    let apex = cf.apex().transpose();
    let mut coords = cf.framework.config().matrix().clone();
    for (i, &si) in s.0.iter().enumerate() {
        let row = coords.row(i + 1) - &apex;
        coords.set_row(i + 1, &(&apex + row * si));
    }
    cf.with_coords(coords, tol)
}

/// Scales that move every non-apex vertex onto `plane` along its apex ray.
pub fn slide_to_flat(
    cf: &ConeFramework,
    plane: &Hyperplane,
    tol: &Tolerance,
) -> Result<(ConeFramework, SlideScales)> {
    let dim = cf.framework.dimension();
    if plane.normal.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: plane.normal.len(),
        });
    }
    let apex = cf.apex();
    let diameter = cf.framework.config().diameter();
    let gap = plane.offset - plane.normal.dot(&apex);
    if tol.is_negligible(gap / plane.normal.norm(), diameter) {
        return Err(Error::ApexOnHyperplane);
    }
    let mut scales = Vec::with_capacity(cf.base_count());
    for i in 0..cf.base_count() {
        let ray = cf.framework.config().point(i + 1) - &apex;
        let along = plane.normal.dot(&ray);
        if tol.is_negligible(along, plane.normal.norm() * ray.norm()) {
            return Err(Error::ParallelRay(i + 1));
        }
        scales.push(gap / along);
    }
    let scales = SlideScales::new(scales)?;
    Ok((slide_with_tolerance(cf, &scales, tol)?, scales))
}

/// Least-squares hyperplane through the non-apex vertices, shifted if
/// necessary so that it misses the apex by at least 10% of the diameter.
pub fn default_slicing_hyperplane(cf: &ConeFramework) -> Hyperplane {
    let base = cf
        .framework
        .config()
        .matrix()
        .rows(1, cf.base_count())
        .into_owned();
    let (normal, centroid) = best_fit_plane(&base);
    let apex = cf.apex();
    let mut offset = normal.dot(&centroid);
    let min_gap = 0.1 * cf.framework.config().diameter();
    let gap = normal.dot(&apex) - offset;
    if gap.abs() < min_gap {
        let side = if gap < 0.0 { -1.0 } else { 1.0 };
        offset = normal.dot(&apex) - side * min_gap;
    }
    Hyperplane { normal, offset }
}

/// Unit normal (smallest right singular vector) and centroid of the rows.
fn best_fit_plane(points: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let (basis, centroid, _) = principal_axes(points);
    let normal = basis.column(basis.ncols() - 1).into_owned();
    (normal, centroid)
}

/// Right singular vectors of the centered rows, ordered by decreasing
/// singular value, plus the centroid and the singular values.
fn principal_axes(points: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, Vec<f64>) {
    let dim = points.ncols();
    let centroid = points.row_mean().transpose();
    let mut centered = points.clone();
    for mut row in centered.row_iter_mut() {
        row -= centroid.transpose();
    }
    if centered.nrows() < dim {
        let mut padded = DMatrix::zeros(dim, dim);
        padded.rows_mut(0, centered.nrows()).copy_from(&centered);
        centered = padded;
    }
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut basis = DMatrix::zeros(dim, dim);
    for (k, &i) in order.iter().enumerate() {
        basis.set_column(k, &v_t.row(i).transpose());
    }
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    (basis, centroid, values)
}

/// Drops the apex of a flat cone framework and expresses the remaining
/// vertices in orthonormal coordinates of their hyperplane.
pub fn slice(cf: &ConeFramework, tol: &Tolerance) -> Result<Framework> {
    let dim = cf.framework.dimension();
    let d = dim - 1;
    let n = cf.base_count();
    let base = cf.framework.config().matrix().rows(1, n).into_owned();
    let (axes, centroid, values) = principal_axes(&base);
    let largest = values.first().copied().unwrap_or(0.0);
    if !tol.is_negligible(values[dim - 1], largest) {
        return Err(Error::NotFlat);
    }
    let normal = axes.column(dim - 1).into_owned();
    let apex_gap = normal.dot(&(cf.apex() - &centroid));
    if tol.is_negligible(apex_gap, cf.framework.config().diameter()) {
        return Err(Error::NotFlat);
    }
    let frame = axes.columns(0, d).into_owned();
    let mut coords = DMatrix::zeros(n, d);
    for i in 0..n {
        let local = frame.transpose() * (base.row(i).transpose() - &centroid);
        coords.set_row(i, &local.transpose());
    }
    let edges: Vec<(usize, usize)> = cf
        .framework
        .graph()
        .edges()
        .iter()
        .filter(|&&(i, _)| i != 0)
        .map(|&(i, j)| (i - 1, j - 1))
        .collect();
    let graph = Graph::new(n, edges)?;
    Framework::with_tolerance(graph, Configuration::from_matrix(coords, tol)?, tol)
}

/// Moves a stress of `cf` to the slid framework: remove the apex row and
/// column, conjugate by `diag(1/sᵢ)`, then restore the apex row and
/// column as negated sums so the all-ones vector is back in the kernel.
pub fn transport_stress_slide(
    stress: &StressMatrix,
    cf: &ConeFramework,
    s: &SlideScales,
    tol: &Tolerance,
) -> Result<StressMatrix> {
    let total = cf.framework.vertex_count();
    check_cone_stress_dims(stress, total)?;
    if s.0.len() != total - 1 {
        return Err(Error::LengthMismatch {
            expected: total - 1,
            found: s.0.len(),
        });
    }
    let residual = equilibrium_residual(stress, &cf.framework)?;
    if residual > tol.relative_cutoff {
        return Err(Error::NotEquilibrium { residual });
    }
    let n = total - 1;
    let psi = stress.matrix().view((1, 1), (n, n));
    let mut out = DMatrix::zeros(total, total);
    for i in 0..n {
        for j in 0..n {
            out[(i + 1, j + 1)] = psi[(i, j)] / (s.0[i] * s.0[j]);
        }
    }
    for i in 1..total {
        let row_sum: f64 = out.row(i).iter().skip(1).sum();
        out[(i, 0)] = -row_sum;
        out[(0, i)] = -row_sum;
    }
    let apex_sum: f64 = out.row(0).iter().skip(1).sum();
    out[(0, 0)] = -apex_sum;
    Ok(StressMatrix::from_raw(out))
}

/// Pads a stress of `f` with a zero apex row and column.
pub fn cone_stress(stress: &StressMatrix) -> StressMatrix {
    let n = stress.dimension();
    let mut out = DMatrix::zeros(n + 1, n + 1);
    out.view_mut((1, 1), (n, n)).copy_from(stress.matrix());
    StressMatrix::from_raw(out)
}

/// Removes the apex row and column, which must vanish for a flat cone.
pub fn slice_stress(stress: &StressMatrix, tol: &Tolerance) -> Result<StressMatrix> {
    let m = stress.matrix();
    let n = m.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: n,
        });
    }
    let max_entry = m.row(0).iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    if !tol.is_negligible(max_entry, m.norm()) {
        return Err(Error::ApexRowNonzero { max_entry });
    }
    Ok(StressMatrix::from_raw(
        m.view((1, 1), (n - 1, n - 1)).into_owned(),
    ))
}

/// Last homogeneous coordinate of `H p̂ᵢ` for every vertex.
fn projective_weights(f: &Framework, h: &ProjectiveTransform, tol: &Tolerance) -> Result<Vec<f64>> {
    let d = f.dimension();
    if h.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.dimension(),
        });
    }
    let last = h.matrix.row(d);
    (0..f.vertex_count())
        .map(|i| {
            let p = crate::conic::homogeneous_point(&f.config().point(i));
            let w = last.dot(&p.transpose());
            if tol.is_negligible(w, h.matrix.norm() * p.norm()) {
                Err(Error::VertexAtInfinity(i))
            } else {
                Ok(w)
            }
        })
        .collect()
}

/// Dehomogenized images `H p̂ᵢ`.
pub fn projective_transform(
    f: &Framework,
    h: &ProjectiveTransform,
    tol: &Tolerance,
) -> Result<Framework> {
    let weights = projective_weights(f, h, tol)?;
    let d = f.dimension();
    let mut coords = DMatrix::zeros(f.vertex_count(), d);
    for (i, w) in weights.iter().enumerate() {
        let p = crate::conic::homogeneous_point(&f.config().point(i));
        let img = &h.matrix * p;
        for k in 0..d {
            coords[(i, k)] = img[k] / w;
        }
    }
    Framework::with_tolerance(
        f.graph().clone(),
        Configuration::from_matrix(coords, tol)?,
        tol,
    )
}

/// Transports a stress of `f` to `projective_transform(f, h)` by coning
/// over the apex at the origin, applying `H` linearly, sliding back onto
/// `x_{d+1} = 1`, and slicing.
pub fn transport_stress_projective(
    stress: &StressMatrix,
    f: &Framework,
    h: &ProjectiveTransform,
    tol: &Tolerance,
) -> Result<StressMatrix> {
    check_cone_stress_dims(stress, f.vertex_count())?;
    let weights = projective_weights(f, h, tol)?;
    let coned = homogeneous_cone(f)?;
    let coned_stress = cone_stress(stress);

    let moved = coned.framework.config().matrix() * h.matrix.transpose();
    let linear_image = coned.with_coords(moved, tol)?;

    let scales = SlideScales::new(weights.iter().map(|w| 1.0 / w).collect())?;
    let slid_stress = transport_stress_slide(&coned_stress, &linear_image, &scales, tol)?;
    slice_stress(&slid_stress, tol)
}
