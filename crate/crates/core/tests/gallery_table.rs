use rigidity_core::certify::{analyze, Verdict};
use rigidity_core::conic::{conic_space, ruling_quadric_space};
use rigidity_core::gallery::{self, GallerySpec, GENERATORS};
use rigidity_core::Tolerance;

#[test]
fn every_generator_builds_with_defaults() {
    for name in GENERATORS {
        let spec = if *name == "cone_of" {
            GallerySpec::new(name).with("base", "gate")
        } else {
            GallerySpec::new(name)
        };
        let f = gallery::generate(&spec).unwrap();
        assert!(f.vertex_count() >= 2, "{name}");
    }
}

#[test]
fn property_table() {
    let tol = Tolerance::default();

    let grid = analyze(&gallery::grid(3).unwrap(), 0, &tol).unwrap();
    assert!(grid.has_conic && !grid.is_ruled && !grid.is_nar);

    let gate = analyze(&gallery::gate().unwrap(), 0, &tol).unwrap();
    assert!(gate.has_conic);

    let braced = gallery::two_lines_braced().unwrap();
    let r = analyze(&braced, 0, &tol).unwrap();
    assert!(r.has_conic && r.is_ruled);
    assert_eq!(r.psd_stress_rank, Some(braced.vertex_count() - 3));

    let hp = gallery::hyperbolic_paraboloid(3, 3).unwrap();
    let r = analyze(&hp, 0, &tol).unwrap();
    assert!(r.has_conic && r.is_ruled && r.is_nar);
    assert_eq!(r.psd_stress_rank, Some(hp.vertex_count() - 4));

    let ec = gallery::elliptic_cone().unwrap();
    let r = analyze(&ec, 0, &tol).unwrap();
    assert!(r.has_conic && r.is_ruled && r.is_nar);
    assert!(r.max_generic_stress_rank < ec.vertex_count() - 4);

    let tp = gallery::two_planes().unwrap();
    let r = analyze(&tp, 0, &tol).unwrap();
    assert!(r.has_conic && r.is_ruled && r.is_nar);
    assert_eq!(r.psd_stress_rank, Some(tp.vertex_count() - 4));

    let t = analyze(&gallery::triangle_with_center().unwrap(), 0, &tol).unwrap();
    assert_eq!(t.super_stability.verdict, Verdict::SuperStable);
}

#[test]
fn grid_conic_is_the_xy_form() {
    let tol = Tolerance::default();
    let conics = conic_space(&gallery::grid(3).unwrap(), &tol).unwrap();
    assert_eq!(conics.len(), 1);
    let m = conics[0].matrix();
    assert!(m[(0, 0)].abs() < 1e-12 && m[(1, 1)].abs() < 1e-12);
    assert!((m[(0, 1)] - m[(1, 0)]).abs() < 1e-12 && m[(0, 1)].abs() > 0.5);
    assert!(ruling_quadric_space(&gallery::grid(3).unwrap(), &tol)
        .unwrap()
        .is_empty());
}

#[test]
fn grid_edge_vectors_are_axis_units() {
    let f = gallery::grid(3).unwrap();
    let vectors = f.edge_vectors();
    assert_eq!(vectors.len(), 12);
    for e in vectors {
        let axis = (e[0].abs() == 1.0 && e[1] == 0.0) || (e[0] == 0.0 && e[1].abs() == 1.0);
        assert!(axis, "{e:?}");
    }
}

#[test]
fn quadrics_through_special_frameworks() {
    let tol = Tolerance::default();
    // xy = 0 contains both axes.
    let braced = gallery::two_lines_braced().unwrap();
    for q in ruling_quadric_space(&braced, &tol).unwrap() {
        for i in 0..braced.vertex_count() {
            assert!(q.evaluate(&braced.config().point(i)).abs() < 1e-9);
        }
    }
    assert_eq!(ruling_quadric_space(&braced, &tol).unwrap().len(), 1);
    // z − xy = 0 through the paraboloid.
    let hp = gallery::hyperbolic_paraboloid(3, 3).unwrap();
    let qs = ruling_quadric_space(&hp, &tol).unwrap();
    assert_eq!(qs.len(), 1);
    let m = qs[0].matrix();
    // Homogeneous form of z − xy: off-diagonal xy entries −½, z-constant entries ½.
    let ratio = m[(2, 3)] / m[(0, 1)];
    assert!((ratio + 1.0).abs() < 1e-9, "{ratio}");
}
