#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix from a QR factorization.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| r[(i, i)].signum()));
    q * signs
}

/// Random PSD matrix of the given size and rank.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> DMatrix<f64> {
    let b = gaussian_matrix(rng, n, rank);
    &b * b.transpose()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = gaussian_matrix(rng, n, n);
    (&a + a.transpose()) * 0.5
}

use rigidity_core::framework::StressMatrix;
use rigidity_core::operations::{
    cone, cone_stress, projective_transform, slice, slice_stress, slide, slide_to_flat,
    transport_stress_projective, transport_stress_slide, Hyperplane, ProjectiveTransform,
    SlideScales,
};
use rigidity_core::{Framework, Tolerance};

pub fn random_scales<R: Rng>(r: &mut R, n: usize) -> SlideScales {
    let s = (0..n)
        .map(|_| {
            let mag = r.random_range(0.3..3.0);
            if r.random_bool(0.3) {
                -mag
            } else {
                mag
            }
        })
        .collect();
    SlideScales::new(s).unwrap()
}

/// Cone at a random height, slide by random scales, slide again onto a
/// random hyperplane missing the apex, and slice. The stress is carried
/// along every step. Returns `None` for inadmissible random draws.
pub fn random_cone_slide_slice<R: Rng>(
    f: &Framework,
    stress: &StressMatrix,
    r: &mut R,
    tol: &Tolerance,
) -> Option<(Framework, StressMatrix)> {
    let cf = cone(f, r.random_range(0.5..2.0)).ok()?;
    let s = random_scales(r, cf.base_count());
    let slid = slide(&cf, &s).ok()?;
    let omega = transport_stress_slide(&cone_stress(stress), &cf, &s, tol).ok()?;

    let normal = gaussian_vector(r, f.dimension() + 1);
    let normal = &normal / normal.norm();
    let apex = slid.apex();
    let offset =
        normal.dot(&apex) + r.random_range(0.5..2.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
    let plane = Hyperplane { normal, offset };
    let (flat, s2) = slide_to_flat(&slid, &plane, tol).ok()?;
    if s2
        .as_slice()
        .iter()
        .any(|x| x.abs() > 50.0 || x.abs() < 0.02)
    {
        return None;
    }
    let omega = transport_stress_slide(&omega, &slid, &s2, tol).ok()?;
    let sliced = slice(&flat, tol).ok()?;
    Some((sliced, slice_stress(&omega, tol).ok()?))
}

/// A random projective transform near the identity that keeps every
/// vertex finite, with the stress carried along.
pub fn random_projective<R: Rng>(
    f: &Framework,
    stress: &StressMatrix,
    r: &mut R,
    tol: &Tolerance,
) -> Option<(Framework, StressMatrix)> {
    let d = f.dimension();
    let h = DMatrix::identity(d + 1, d + 1) + gaussian_matrix(r, d + 1, d + 1) * 0.3;
    let h = ProjectiveTransform::new(h, tol).ok()?;
    let g = projective_transform(f, &h, tol).ok()?;
    let omega = transport_stress_projective(stress, f, &h, tol).ok()?;
    Some((g, omega))
}
