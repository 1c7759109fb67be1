mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rigidity_core::conic::{
    classify_quadric, cone_point_by_lines, conic_restriction, conic_space, is_cone_point, is_ruled,
    line_on_quadric, ruling_quadric_space, ruling_space_for_points, HomogeneousQuadric,
};
use rigidity_core::framework::affine_rank;
use rigidity_core::numerics::{column_space, svec};
use rigidity_core::{gallery, Framework, Tolerance};

use common::{gaussian_matrix, gaussian_vector, random_symmetric, rng};

fn combination(qs: &[HomogeneousQuadric], c: &DVector<f64>) -> DMatrix<f64> {
    let n = qs[0].matrix().nrows();
    let mut m = DMatrix::zeros(n, n);
    for (q, ck) in qs.iter().zip(c.iter()) {
        m += q.matrix() * *ck;
    }
    m
}

#[test]
fn ruled_implies_conic_at_infinity() {
    let tol = Tolerance::default();
    for (name, f) in gallery::standard_gallery() {
        let rulings = ruling_quadric_space(&f, &tol).unwrap();
        if rulings.is_empty() {
            continue;
        }
        let conics = conic_space(&f, &tol).unwrap();
        assert!(!conics.is_empty(), "{name} is ruled but has no conic");
        let mut span = DMatrix::zeros(svec(conics[0].matrix()).len(), conics.len());
        for (k, c) in conics.iter().enumerate() {
            span.column_mut(k).copy_from_slice(&svec(c.matrix()));
        }
        let basis = column_space(&span, &tol).unwrap();
        for q in &rulings {
            let restricted = conic_restriction(q, &tol)
                .unwrap()
                .expect("full-span vertices rule out hyperplanes");
            let v = DVector::from_vec(svec(restricted.matrix()));
            let residual = &v - &basis * basis.tr_mul(&v);
            assert!(
                residual.norm() < 1e-8 * v.norm(),
                "{name}: {}",
                residual.norm()
            );
        }
    }
}

/// Vertices whose incident edge directions span the whole space.
fn spanning_vertices(f: &Framework) -> Vec<usize> {
    let tol = Tolerance::default();
    (0..f.vertex_count())
        .filter(|&i| {
            let p = f.config().point(i);
            let nbrs = f.graph().neighbors(i);
            let mut dirs = DMatrix::zeros(f.dimension(), nbrs.len());
            for (k, &j) in nbrs.iter().enumerate() {
                dirs.set_column(k, &(f.config().point(j) - &p));
            }
            rigidity_core::numerics::rank(&dirs, &tol).unwrap() == f.dimension()
        })
        .collect()
}

fn has_general_subset(f: &Framework, candidates: &[usize], size: usize) -> bool {
    fn rec(f: &Framework, c: &[usize], size: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == size {
            let pts = f.config().matrix().select_rows(chosen.iter());
            return affine_rank(&pts, &Tolerance::default()).unwrap() + 1 == size;
        }
        for (k, &v) in c.iter().enumerate() {
            chosen.push(v);
            if rec(f, &c[k + 1..], size, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    rec(f, candidates, size, &mut Vec::new())
}

#[test]
fn many_cone_points_rule_out_ruling() {
    let tol = Tolerance::default();
    let mut applicable = 0;
    for (name, f) in gallery::standard_gallery() {
        let spanning = spanning_vertices(&f);
        if has_general_subset(&f, &spanning, f.dimension()) {
            applicable += 1;
            assert!(!is_ruled(&f, &tol).unwrap(), "{name}");
        }
    }
    assert!(applicable >= 3);
}

#[test]
fn spanning_vertices_are_cone_points() {
    let tol = Tolerance::default();
    let mut r = rng(17);
    let mut checked = 0;
    for (name, f) in gallery::standard_gallery() {
        let rulings = ruling_quadric_space(&f, &tol).unwrap();
        for q in &rulings {
            for i in spanning_vertices(&f) {
                let x = f.config().point(i);
                assert!(is_cone_point(q, &x, &tol).unwrap(), "{name} vertex {i}");
                assert_eq!(
                    cone_point_by_lines(q, &x, 50, &mut r, &tol).unwrap(),
                    Some(true),
                    "{name} vertex {i}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn non_spanning_vertex_on_paraboloid_is_smooth() {
    let tol = Tolerance::default();
    let f = gallery::hyperbolic_paraboloid(3, 3).unwrap();
    let q = &ruling_quadric_space(&f, &tol).unwrap()[0];
    assert!(!is_cone_point(q, &f.config().point(4), &tol).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn line_through_conjugate_points_lies_on_quadric(seed in any::<u64>(), d in 2usize..=4) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let coords = gaussian_matrix(&mut r, 2, d);
        let space = ruling_space_for_points(&coords, &[(0, 1)], &tol).unwrap();
        prop_assert!(!space.is_empty());
        let c = gaussian_vector(&mut r, space.len());
        let q = HomogeneousQuadric::new(combination(&space, &c), &tol).unwrap();
        let x1 = coords.row(0).transpose();
        let x2 = coords.row(1).transpose();
        prop_assert!(line_on_quadric(&q, &x1, &x2, &tol).unwrap());
        for k in 0..10 {
            let t = -2.0 + 0.5 * k as f64;
            let x = &x1 + (&x2 - &x1) * t;
            let scale = q.matrix().norm() * (1.0 + x.norm_squared());
            prop_assert!(q.evaluate(&x).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn cone_point_dimension_law(seed in any::<u64>(), d in 2usize..=4, corank in 1usize..=3) {
        let tol = Tolerance::default();
        let mut r = rng(seed);
        let corank = corank.min(d);
        // Q̂ = P S P with P the projector off a random kernel of the given size.
        let kernel = column_space(&gaussian_matrix(&mut r, d + 1, corank), &tol).unwrap();
        let p = DMatrix::identity(d + 1, d + 1) - &kernel * kernel.transpose();
        let m = &p * random_symmetric(&mut r, d + 1) * &p;
        let q = HomogeneousQuadric::new(m, &tol).unwrap();
        let class = classify_quadric(&q, &tol).unwrap();
        prop_assert_eq!(class.rank, d + 1 - corank);
        prop_assert_eq!(class.cone_points.affine_dimension(), Some(d - class.rank));
    }
}
