//! Super-stability certificates, maximum-rank PSD stress search, the
//! Strong Arnold Property test and the aggregated analysis report.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::affine::is_neighborhood_affine_rigid;
use crate::conic::{
    conic_restriction, conic_space, ruling_quadric_space, ruling_space_for_points, ConicForm,
};
use crate::error::{Error, Result};
use crate::framework::{stress_space_basis, Framework, Graph, StressMatrix};
use crate::numerics::{self, svec, Tolerance};

/// Limits for the alternating-projection search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsdSearchParams {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once successive iterates differ by less than this (Frobenius).
    pub convergence: f64,
}

impl Default for PsdSearchParams {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 10_000,
            convergence: 1e-12,
        }
    }
}

/// How often the search tries to snap onto an exact face of the PSD cone.
const POLISH_INTERVAL: usize = 25;
/// Eigenvalues above this fraction of the largest span the candidate face.
const FACE_THRESHOLD: f64 = 1e-6;
const REDUCED_ITERATIONS: usize = 500;
/// Iterates smaller than this (starts have unit norm) count as zero.
const ZERO_NORM: f64 = 1e-8;

/// Orthonormal (Frobenius) basis of a subspace of symmetric matrices,
/// stored as columns of vectorized matrices.
struct MatrixSpan {
    n: usize,
    columns: DMatrix<f64>,
}

impl MatrixSpan {
    fn new(n: usize, matrices: &[DMatrix<f64>], tol: &Tolerance) -> Result<Self> {
        let mut stacked = DMatrix::zeros(n * n, matrices.len());
        for (k, m) in matrices.iter().enumerate() {
            stacked.column_mut(k).copy_from_slice(m.as_slice());
        }
        let columns = if matrices.is_empty() {
            stacked
        } else {
            numerics::column_space(&stacked, tol)?
        };
        Ok(Self { n, columns })
    }

    fn dimension(&self) -> usize {
        self.columns.ncols()
    }

    fn element(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.n, self.columns.column(k).as_slice())
    }

    fn coordinates(&self, x: &DMatrix<f64>) -> DVector<f64> {
        self.columns
            .tr_mul(&DVector::from_column_slice(x.as_slice()))
    }

    fn to_matrix(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let v = &self.columns * c;
        numerics::symmetrize(&DMatrix::from_column_slice(self.n, self.n, v.as_slice()))
    }

    fn project(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.to_matrix(&self.coordinates(x))
    }
}

fn spectrum(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let eig = numerics::symmetric_eigen(m)?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Tries to find an element of `span` that is positive definite on the
/// dominant eigenspace of `x` and vanishes off it. On success the result
/// lies exactly in `span` and its rank equals the face dimension.
fn polish(span: &MatrixSpan, x: &DMatrix<f64>, tol: &Tolerance) -> Result<Option<DMatrix<f64>>> {
    let n = span.n;
    let (values, vectors) = spectrum(x)?;
    let top = values.max();
    if top <= 0.0 {
        return Ok(None);
    }
    let face: Vec<usize> = (0..n)
        .filter(|&i| values[i] > FACE_THRESHOLD * top)
        .collect();
    let v = vectors.select_columns(&face);
    let off_face = DMatrix::identity(n, n) - &v * v.transpose();

    let mut constraints = DMatrix::zeros(n * n, span.dimension());
    for k in 0..span.dimension() {
        let leak = &off_face * span.element(k);
        constraints.column_mut(k).copy_from_slice(leak.as_slice());
    }
    let kernel = numerics::rank_nullspace(&constraints, tol)?.nullspace;
    if kernel.ncols() == 0 {
        return Ok(None);
    }
    let face_elements: Vec<DMatrix<f64>> = kernel
        .column_iter()
        .map(|c| span.to_matrix(&c.into_owned()))
        .collect();
    let reduced: Vec<DMatrix<f64>> = face_elements
        .iter()
        .map(|f| v.transpose() * f * &v)
        .collect();
    let r = face.len();
    let reduced_span = MatrixSpan::new(r, &reduced, tol)?;

    let mut w = reduced_span.project(&(v.transpose() * x * &v));
    for _ in 0..REDUCED_ITERATIONS {
        let (vals, _) = spectrum(&w)?;
        let (lo, hi) = (vals.min(), vals.max());
        if hi > 0.0 && lo > tol.cutoff(hi) {
            // The reduced elements are orthonormal, so lifting is a change of basis.
            let mut lifted = DMatrix::zeros(n, n);
            for (f, red) in face_elements.iter().zip(&reduced) {
                lifted += f * red.dot(&w);
            }
            return Ok(Some(numerics::symmetrize(&lifted)));
        }
        let next = reduced_span.project(&numerics::psd_project(&w)?);
        if (&next - &w).norm() < 1e-14 * (1.0 + w.norm()) {
            break;
        }
        w = next;
    }
    Ok(None)
}

fn is_psd_within(x: &DMatrix<f64>, tol: &Tolerance) -> Result<bool> {
    let (values, _) = spectrum(x)?;
    let scale = values.amax();
    Ok(values.min() >= -tol.cutoff(scale))
}

/// One alternating-projection run from `start`; returns a nonzero PSD
/// element of the span if one is reached.
fn search_from(
    span: &MatrixSpan,
    start: DMatrix<f64>,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<Option<DMatrix<f64>>> {
    let mut x = start;
    for it in 0..params.max_iterations {
        let next = span.project(&numerics::psd_project(&x)?);
        let step = (&next - &x).norm();
        x = next;
        if x.norm() < ZERO_NORM {
            return Ok(None);
        }
        if step < params.convergence {
            break;
        }
        if (it + 1) % POLISH_INTERVAL == 0 {
            if let Some(p) = polish(span, &x, tol)? {
                return Ok(Some(p));
            }
        }
    }
    if let Some(p) = polish(span, &x, tol)? {
        return Ok(Some(p));
    }
    if x.norm() >= ZERO_NORM && is_psd_within(&x, tol)? {
        return Ok(Some(x));
    }
    Ok(None)
}

/// Individual nonzero PSD results of the alternating-projection restarts,
/// each normalized to unit Frobenius norm, in restart order.
pub fn psd_search_runs(
    f: &Framework,
    seed: u64,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<Vec<StressMatrix>> {
    let basis = stress_space_basis(f, tol)?;
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let n = f.vertex_count();
    let mats: Vec<DMatrix<f64>> = basis.basis.iter().map(|b| b.matrix().clone()).collect();
    let span = MatrixSpan::new(n, &mats, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut kept = Vec::new();
    for _ in 0..params.restarts {
        let c: DVector<f64> =
            DVector::from_fn(span.dimension(), |_, _| StandardNormal.sample(&mut rng));
        let start = span.to_matrix(&(&c / c.norm()));
        if let Some(x) = search_from(&span, start, params, tol)? {
            kept.push(StressMatrix::from_raw(&x / x.norm()));
        }
    }
    Ok(kept)
}

/// Searches the equilibrium stress space for a PSD stress of maximal rank.
///
/// Every restart starts from a random unit element of the stress space;
/// the nonzero PSD results are normalized and averaged, so the returned
/// range is the sum of all discovered faces.
pub fn find_max_rank_psd_stress(
    f: &Framework,
    seed: u64,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<Option<StressMatrix>> {
    let kept = psd_search_runs(f, seed, params, tol)?;
    if kept.is_empty() {
        return Ok(None);
    }
    let n = f.vertex_count();
    let mut avg = DMatrix::zeros(n, n);
    for k in &kept {
        avg += k.matrix();
    }
    let avg = numerics::symmetrize(&(&avg / avg.norm()));
    Ok(Some(StressMatrix::from_raw(avg)))
}

/// Rank of one random combination of the stress-space basis; generically
/// this is the largest rank any stress attains.
pub fn generic_stress_rank(f: &Framework, seed: u64, tol: &Tolerance) -> Result<usize> {
    let basis = stress_space_basis(f, tol)?;
    if basis.is_empty() {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    basis.random_combination(&mut rng).rank(tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SuperStable,
    FailsConic,
    FailsStress,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperStabilityCertificate {
    pub verdict: Verdict,
    pub witness_stress: Option<StressMatrix>,
    pub witness_conic: Option<ConicForm>,
    /// Rank of the PSD witness (0 when there is none).
    pub stress_rank: usize,
    pub target_rank: usize,
    /// Full spectrum of the witness, ascending, so marginal eigenvalues are visible.
    pub witness_eigenvalues: Option<Vec<f64>>,
}

struct Ingredients {
    conics: Vec<ConicForm>,
    witness: Option<StressMatrix>,
    psd_rank: usize,
    generic_rank: usize,
}

fn gather(
    f: &Framework,
    seed: u64,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<Ingredients> {
    let conics = conic_space(f, tol)?;
    let witness = find_max_rank_psd_stress(f, seed, params, tol)?;
    let psd_rank = match &witness {
        Some(w) => w.rank(tol)?,
        None => 0,
    };
    let generic_rank = generic_stress_rank(f, seed, tol)?;
    Ok(Ingredients {
        conics,
        witness,
        psd_rank,
        generic_rank,
    })
}

fn certificate(f: &Framework, ing: &Ingredients) -> Result<SuperStabilityCertificate> {
    let target = f.target_stress_rank();
    // With no room for a nonzero stress the zero stress is the witness.
    let witness = match (&ing.witness, target) {
        (None, 0) => Some(StressMatrix::zero(f.vertex_count())),
        (w, _) => w.clone(),
    };
    let has_conic = !ing.conics.is_empty();
    let verdict = if ing.psd_rank == target && !has_conic {
        Verdict::SuperStable
    } else if has_conic {
        Verdict::FailsConic
    } else if ing.generic_rank < target {
        Verdict::FailsStress
    } else {
        Verdict::Undetermined
    };
    let witness_eigenvalues = match &witness {
        Some(w) => {
            let (values, _) = spectrum(w.matrix())?;
            let mut v: Vec<f64> = values.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            Some(v)
        }
        None => None,
    };
    Ok(SuperStabilityCertificate {
        verdict,
        witness_stress: witness,
        witness_conic: ing.conics.first().cloned(),
        stress_rank: ing.psd_rank,
        target_rank: target,
        witness_eigenvalues,
    })
}

/// Super stability: a PSD stress of rank `n − d − 1` and no conic at
/// infinity through the edge directions.
pub fn is_super_stable(
    f: &Framework,
    seed: u64,
    tol: &Tolerance,
) -> Result<SuperStabilityCertificate> {
    is_super_stable_with(f, seed, &PsdSearchParams::default(), tol)
}

pub fn is_super_stable_with(
    f: &Framework,
    seed: u64,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<SuperStabilityCertificate> {
    certificate(f, &gather(f, seed, params, tol)?)
}

/// Coordinates of a framework in the kernel of `stress`: an orthonormal
/// kernel basis rotated so that one column is the normalized all-ones
/// vector, with that column dropped.
pub fn kernel_configuration(stress: &StressMatrix, tol: &Tolerance) -> Result<DMatrix<f64>> {
    let m = stress.matrix();
    let n = m.nrows();
    numerics::check_finite(m)?;
    let ones = DVector::from_element(n, 1.0);
    let scale = m.norm();
    if !tol.is_negligible((m * &ones).norm(), scale * (n as f64).sqrt()) {
        return Err(Error::OnesNotInKernel);
    }
    let kernel = numerics::rank_nullspace(m, tol)?;
    let k = kernel.nullity();
    let u = ones / (n as f64).sqrt();
    let along = kernel.nullspace.tr_mul(&u);
    if (along.norm() - 1.0).abs() > tol.relative_cutoff.sqrt() {
        return Err(Error::OnesNotInKernel);
    }
    if k < 2 {
        return Err(Error::RankInconsistent {
            rank: kernel.rank,
            n,
        });
    }
    let mut rest = kernel.nullspace.clone();
    for mut col in rest.column_iter_mut() {
        let c = col.dot(&u);
        col.axpy(-c, &u, 1.0);
    }
    let svd = rest.svd(true, false);
    let u_mat = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    Ok(u_mat.select_columns(&order[..k - 1]))
}

/// Strong Arnold Property of a stress of rank `n − d − 1`: holds iff the
/// framework in its kernel admits no ruling quadric over `graph`.
pub fn sap_test(stress: &StressMatrix, graph: &Graph, tol: &Tolerance) -> Result<bool> {
    if stress.dimension() != graph.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.vertex_count(),
            found: stress.dimension(),
        });
    }
    let coords = kernel_configuration(stress, tol)?;
    Ok(ruling_space_for_points(&coords, graph.edges(), tol)?.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SapOutcome {
    Holds,
    Fails,
    NotApplicable,
}

impl SapOutcome {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Self::Holds => Some(true),
            Self::Fails => Some(false),
            Self::NotApplicable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyFlag {
    pub name: String,
    /// Whether the hypothesis of the check holds for this framework.
    pub applicable: bool,
    pub passed: bool,
}

impl ConsistencyFlag {
    fn new(name: &str, applicable: bool, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            applicable,
            passed: !applicable || passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub dimension: usize,
    pub has_conic: bool,
    pub conic_space_dim: usize,
    pub is_ruled: bool,
    pub ruling_space_dim: usize,
    pub is_nar: bool,
    pub stress_space_dim: usize,
    pub max_generic_stress_rank: usize,
    pub psd_stress_rank: Option<usize>,
    pub super_stability: SuperStabilityCertificate,
    pub sap: SapOutcome,
    pub consistency_flags: Vec<ConsistencyFlag>,
}

impl AnalysisReport {
    pub fn all_flags_pass(&self) -> bool {
        self.consistency_flags.iter().all(|f| f.passed)
    }

    pub fn flag(&self, name: &str) -> Option<&ConsistencyFlag> {
        self.consistency_flags.iter().find(|f| f.name == name)
    }
}

/// Every ruling generator's quadratic part lies in the span of the conic
/// space (ruled implies a conic at infinity).
fn rulings_within_conics(
    rulings: &[crate::conic::HomogeneousQuadric],
    conics: &[ConicForm],
    tol: &Tolerance,
) -> Result<bool> {
    if rulings.is_empty() {
        return Ok(true);
    }
    if conics.is_empty() {
        return Ok(false);
    }
    let dim = svec(conics[0].matrix()).len();
    let mut c = DMatrix::zeros(dim, conics.len());
    for (k, q) in conics.iter().enumerate() {
        c.column_mut(k).copy_from_slice(&svec(q.matrix()));
    }
    let basis = numerics::column_space(&c, tol)?;
    let slack = tol.relative_cutoff.sqrt();
    for r in rulings {
        let Some(q) = conic_restriction(r, tol)? else {
            continue;
        };
        let v = DVector::from_vec(svec(q.matrix()));
        let v = &v / v.norm();
        let residual = &v - &basis * basis.tr_mul(&v);
        if residual.norm() > slack {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn analyze(f: &Framework, seed: u64, tol: &Tolerance) -> Result<AnalysisReport> {
    analyze_with(f, seed, &PsdSearchParams::default(), tol)
}

pub fn analyze_with(
    f: &Framework,
    seed: u64,
    params: &PsdSearchParams,
    tol: &Tolerance,
) -> Result<AnalysisReport> {
    let ing = gather(f, seed, params, tol)?;
    let cert = certificate(f, &ing)?;
    let rulings = ruling_quadric_space(f, tol)?;
    let has_conic = !ing.conics.is_empty();
    let is_ruled = !rulings.is_empty();
    let is_nar = is_neighborhood_affine_rigid(f, tol)?;
    let stress_space_dim = stress_space_basis(f, tol)?.dimension();
    let target = f.target_stress_rank();

    let full_rank_stress = if cert.stress_rank == target {
        cert.witness_stress.clone()
    } else if ing.generic_rank == target {
        let basis = stress_space_basis(f, tol)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        Some(if basis.is_empty() {
            StressMatrix::zero(f.vertex_count())
        } else {
            basis.random_combination(&mut rng)
        })
    } else {
        None
    };
    let sap = match &full_rank_stress {
        Some(s) => match sap_test(s, f.graph(), tol)? {
            true => SapOutcome::Holds,
            false => SapOutcome::Fails,
        },
        None => SapOutcome::NotApplicable,
    };

    let flags = vec![
        ConsistencyFlag::new("thm-main2", is_nar, has_conic == is_ruled),
        ConsistencyFlag::new(
            "cor-main",
            ing.generic_rank == target,
            has_conic == is_ruled,
        ),
        ConsistencyFlag::new(
            "sap-cycle",
            sap != SapOutcome::NotApplicable,
            sap.as_bool() == Some(!is_ruled) && sap.as_bool() == Some(!has_conic),
        ),
        ConsistencyFlag::new(
            "ruled-implies-conic",
            true,
            (!is_ruled || has_conic) && rulings_within_conics(&rulings, &ing.conics, tol)?,
        ),
    ];

    Ok(AnalysisReport {
        vertex_count: f.vertex_count(),
        edge_count: f.edge_count(),
        dimension: f.dimension(),
        has_conic,
        conic_space_dim: ing.conics.len(),
        is_ruled,
        ruling_space_dim: rulings.len(),
        is_nar,
        stress_space_dim,
        max_generic_stress_rank: ing.generic_rank,
        psd_stress_rank: ing.witness.as_ref().map(|_| ing.psd_rank),
        super_stability: cert,
        sap,
        consistency_flags: flags,
    })
}
