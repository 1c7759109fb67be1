mod common;

use nalgebra::{DMatrix, DVector};
use rigidity_core::affine::{
    affine_flex_path, apply_perturbation, fit_affine, flex_framework, is_affine_precongruent,
    is_euclidean, is_neighborhood_affine_rigid, is_neighborhood_preequivalent,
    precongruence_quadric, PerturbationMap,
};
use rigidity_core::conic::{conic_space, is_ruled};
use rigidity_core::framework::is_equivalent;
use rigidity_core::numerics::{rank_nullspace, smat, svec};
use rigidity_core::{gallery, Framework, Tolerance};

use common::{gaussian_vector, rng};

#[test]
fn flexes_of_frameworks_with_conics() {
    let tol = Tolerance::default();
    let mut seen = 0;
    for (name, f) in gallery::standard_gallery() {
        for q in conic_space(&f, &tol).unwrap() {
            seen += 1;
            let a = affine_flex_path(&q, 0.1, &tol).unwrap();
            let g = flex_framework(&f, &q, 0.1, &tol).unwrap();
            assert!(is_equivalent(&f, &g, &tol).unwrap(), "{name}");
            assert!(!is_euclidean(&a, &tol), "{name}");
        }
    }
    assert!(seen >= 8);
}

/// Symmetric `M` with `eᵀ(M − I)e = 0` on every edge, as a linear system in
/// the free entries of `M` with the identity shift moved to the right side.
fn length_preserving_forms(f: &Framework) -> (usize, DMatrix<f64>) {
    let d = f.dimension();
    let dim = d * (d + 1) / 2;
    let edges = f.edge_vectors();
    let mut a = DMatrix::zeros(edges.len(), dim);
    for (r, e) in edges.iter().enumerate() {
        let outer = e * e.transpose();
        for (k, v) in svec(&outer).into_iter().enumerate() {
            a[(r, k)] = v;
        }
    }
    (dim, a)
}

#[test]
fn identity_is_the_only_length_preserving_form_without_conic() {
    let tol = Tolerance::default();
    for (name, f) in gallery::standard_gallery() {
        let (dim, a) = length_preserving_forms(&f);
        let rn = rank_nullspace(&a, &Tolerance::default()).unwrap();
        // Solutions of a·svec(M) = a·svec(I) are svec(I) + nullspace.
        let only_identity = rn.rank == dim;
        let no_conic = conic_space(&f, &tol).unwrap().is_empty();
        assert_eq!(only_identity, no_conic, "{name}");
        if !only_identity {
            let m = smat(
                &(DVector::from_vec(svec(&DMatrix::identity(f.dimension(), f.dimension())))
                    + rn.nullspace.column(0) * 0.1)
                    .iter()
                    .copied()
                    .collect::<Vec<_>>(),
                f.dimension(),
            );
            for e in f.edge_vectors() {
                let lhs = e.dot(&(&m * &e));
                assert!((lhs - e.norm_squared()).abs() < 1e-9 * (1.0 + e.norm_squared()));
            }
        }
    }
}

#[test]
fn perturbations_along_conics_are_neighborhood_preequivalent() {
    let tol = Tolerance::default();
    let mut r = rng(23);
    for (name, f) in gallery::standard_gallery() {
        for q in conic_space(&f, &tol).unwrap() {
            for _ in 0..5 {
                let v = gaussian_vector(&mut r, f.dimension()) * 0.2;
                let m = PerturbationMap::from_conic(&q, v).unwrap();
                let Ok(img) = apply_perturbation(&m, f.config(), &tol) else {
                    continue;
                };
                assert!(
                    is_neighborhood_preequivalent(&f, &img, &tol).unwrap(),
                    "{name}"
                );
            }
        }
    }
}

#[test]
fn precongruent_perturbations_put_vertices_on_a_quadric() {
    let tol = Tolerance::default();
    let mut r = rng(29);
    let mut precongruent = 0;
    for (name, f) in gallery::standard_gallery() {
        for q in conic_space(&f, &tol).unwrap() {
            for _ in 0..5 {
                let v = gaussian_vector(&mut r, f.dimension());
                let v = &v / v.norm();
                let m = PerturbationMap::from_conic(&q, v).unwrap();
                let Ok(img) = apply_perturbation(&m, f.config(), &tol) else {
                    continue;
                };
                if !is_affine_precongruent(f.config(), &img, &tol).unwrap() {
                    continue;
                }
                precongruent += 1;
                let (a, _) = fit_affine(f.config(), &img).unwrap();
                let quadric = precongruence_quadric(&m, &a, &tol).unwrap();
                for i in 0..f.vertex_count() {
                    let x = f.config().point(i);
                    let scale = quadric.matrix().norm() * (1.0 + x.norm_squared());
                    assert!(
                        quadric.evaluate(&x).abs() < 1e-8 * scale,
                        "{name} vertex {i}"
                    );
                }
            }
        }
    }
    assert!(precongruent > 0);
}

#[test]
fn main_theorem_on_neighborhood_affine_rigid_gallery_items() {
    let tol = Tolerance::default();
    let mut applicable = 0;
    for (name, f) in gallery::standard_gallery() {
        if is_neighborhood_affine_rigid(&f, &tol).unwrap() {
            applicable += 1;
            let has_conic = !conic_space(&f, &tol).unwrap().is_empty();
            assert_eq!(has_conic, is_ruled(&f, &tol).unwrap(), "{name}");
        }
    }
    assert!(applicable >= 8);
}

#[test]
fn grid_perturbation_matches_closed_form() {
    let tol = Tolerance::default();
    let f = gallery::grid(3).unwrap();
    let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let m = PerturbationMap::new(q, DVector::from_vec(vec![0.0, 1.0])).unwrap();
    let img = apply_perturbation(&m, f.config(), &tol).unwrap();
    for i in 0..9 {
        let p = f.config().point(i);
        let expected = [p[0], p[1] + p[0] * p[1]];
        let got = img.point(i);
        assert!((got[0] - expected[0]).abs() < 1e-12 && (got[1] - expected[1]).abs() < 1e-12);
    }
    assert!(is_neighborhood_preequivalent(&f, &img, &tol).unwrap());
    assert!(!is_affine_precongruent(f.config(), &img, &tol).unwrap());
}
