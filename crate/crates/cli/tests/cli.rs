use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rigidity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidity"))
        .args(args)
        .output()
        .unwrap()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = rigidity(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gallery_grid_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let grid = grid.to_str().unwrap();
    ok_stdout(&["gallery", "grid", "--param", "k=3", "-o", grid]);
    let report: Value = serde_json::from_str(&ok_stdout(&["analyze", grid])).unwrap();
    assert_eq!(report["has_conic"], Value::Bool(true));
    assert_eq!(report["is_ruled"], Value::Bool(false));
    assert_eq!(report["vertex_count"], 9);
}

#[test]
fn single_edge_in_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "edge.json",
        r#"{"dimension": 1, "vertices": [[0.0], [1.0]], "edges": [[0, 1]]}"#,
    );
    let report: Value = serde_json::from_str(&ok_stdout(&["analyze", &f])).unwrap();
    assert_eq!(report["stress_space_dim"], 0);
    let text = ok_stdout(&["analyze", &f, "--report", "text"]);
    assert!(text.contains("stress space dimension: 0"), "{text}");
}

#[test]
fn vertex_sent_to_infinity_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "tri.json",
        r#"{"dimension": 2, "vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "edges": [[0, 1], [1, 2], [0, 2]]}"#,
    );
    // Last row (1, 0, -1) sends x = 1 to the hyperplane at infinity.
    let out = rigidity(&["transform", &f, "--matrix", "1,0,0,0,1,0,1,0,-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.json",
        r#"{"dimension": 2, "vertices": [[0.0]], "edges": []}"#,
    );
    assert_eq!(rigidity(&["analyze", &f]).status.code(), Some(2));
    assert_eq!(
        rigidity(&["analyze", "/nonexistent/file.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rigidity(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        rigidity(&["gallery", "no_such_item"]).status.code(),
        Some(2)
    );
    assert!(rigidity(&["--help"]).status.success());
}

#[test]
fn flex_without_conic_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.json");
    let f = f.to_str().unwrap();
    ok_stdout(&["gallery", "triangle_with_center", "-o", f]);
    assert_eq!(rigidity(&["flex", f, "--t", "0.5"]).status.code(), Some(2));
}

#[test]
fn flex_preserves_edge_lengths_of_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let grid = grid.to_str().unwrap();
    ok_stdout(&["gallery", "grid", "--param", "k=3", "-o", grid]);
    let before: Value = serde_json::from_str(&fs::read_to_string(grid).unwrap()).unwrap();
    let after: Value = serde_json::from_str(&ok_stdout(&["flex", grid, "--t", "0.3"])).unwrap();
    let len = |v: &Value, i: usize, j: usize| {
        let p = v["vertices"][i].as_array().unwrap();
        let q = v["vertices"][j].as_array().unwrap();
        p.iter()
            .zip(q)
            .map(|(a, b)| (a.as_f64().unwrap() - b.as_f64().unwrap()).powi(2))
            .sum::<f64>()
    };
    for e in before["edges"].as_array().unwrap() {
        let (i, j) = (
            e[0].as_u64().unwrap() as usize,
            e[1].as_u64().unwrap() as usize,
        );
        assert!((len(&before, i, j) - len(&after, i, j)).abs() < 1e-9);
    }
}

#[test]
fn cone_then_slice_recovers_size() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri.json");
    let cone = dir.path().join("cone.json");
    ok_stdout(&[
        "gallery",
        "triangle_with_center",
        "-o",
        tri.to_str().unwrap(),
    ]);
    ok_stdout(&[
        "cone",
        tri.to_str().unwrap(),
        "--height",
        "2",
        "-o",
        cone.to_str().unwrap(),
    ]);
    let coned: Value = serde_json::from_str(&fs::read_to_string(&cone).unwrap()).unwrap();
    assert_eq!(coned["dimension"], 3);
    assert_eq!(coned["vertices"].as_array().unwrap().len(), 5);
    let sliced: Value =
        serde_json::from_str(&ok_stdout(&["slice", cone.to_str().unwrap()])).unwrap();
    assert_eq!(sliced["dimension"], 2);
    assert_eq!(sliced["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(sliced["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn perturb_checks_vector_length() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    let grid = grid.to_str().unwrap();
    ok_stdout(&["gallery", "grid", "-o", grid]);
    assert_eq!(
        rigidity(&["perturb", grid, "--v", "1,2,3"]).status.code(),
        Some(2)
    );
    let out: Value =
        serde_json::from_str(&ok_stdout(&["perturb", grid, "--v", "0.1,-0.2"])).unwrap();
    assert_eq!(out["dimension"], 2);
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"dimension": 2, "vertices": [[0.1, 0.30000000000000004], [3.141592653589793, -2.5e-17], [-12345.678901234567, 0.3333333333333333]], "edges": [[0, 1], [1, 2]]}"#;
    let f = write(dir.path(), "in.json", text);
    // The identity transform rewrites the file through the full load/save path.
    let out: Value = serde_json::from_str(&ok_stdout(&[
        "transform",
        &f,
        "--matrix",
        "1,0,0,0,1,0,0,0,1",
    ]))
    .unwrap();
    let input: Value = serde_json::from_str(text).unwrap();
    for (a, b) in input["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .zip(out["vertices"].as_array().unwrap())
    {
        for (x, y) in a.as_array().unwrap().iter().zip(b.as_array().unwrap()) {
            assert_eq!(x.as_f64().unwrap().to_bits(), y.as_f64().unwrap().to_bits());
        }
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let hp = dir.path().join("hp.json");
    let hp = hp.to_str().unwrap();
    ok_stdout(&["gallery", "hyperbolic_paraboloid", "-o", hp]);
    let a = ok_stdout(&["analyze", hp, "--seed", "7"]);
    let b = ok_stdout(&["analyze", hp, "--seed", "7"]);
    assert_eq!(a, b);
    let c = ok_stdout(&["certify", hp, "--report", "text"]);
    assert!(c.contains("verdict: fails_conic"), "{c}");
}

#[test]
fn emits_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("grid.svg");
    ok_stdout(&[
        "gallery",
        "grid",
        "--param",
        "k=3",
        "--emit-svg",
        svg.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<line").count(), 12);
}
