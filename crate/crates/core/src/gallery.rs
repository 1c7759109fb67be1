//! Deterministic example frameworks, plus seeded random helpers for tests.
//!
//! | name | parameters | dimension |
//! |------|------------|-----------|
//! | `grid` | `k` (default 3) | 2 |
//! | `gate` | none | 2 |
//! | `two_lines_braced` | none | 2 |
//! | `hyperbolic_paraboloid` | `s`, `t` (default 3, at least 3) | 3 |
//! | `collinear_complete` | `k` (default 3, at least 2) | 1 |
//! | `elliptic_cone` | none | 3 |
//! | `two_planes` | none | 3 |
//! | `triangle_with_center` | none | 2 |
//! | `cone_of` | `base` (another name) and its parameters | base + 1 |

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conic::conic_space;
use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework, Graph};
use crate::numerics::Tolerance;
use crate::operations::cone;

pub const GENERATORS: &[&str] = &[
    "grid",
    "gate",
    "two_lines_braced",
    "hyperbolic_paraboloid",
    "collinear_complete",
    "elliptic_cone",
    "two_planes",
    "triangle_with_center",
    "cone_of",
];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GallerySpec {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
}

impl GallerySpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    fn integer(&self, key: &str, default: usize) -> Result<usize> {
        match self.parameters.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::InvalidParameter(format!("{key} must be a non-negative integer, got {v:?}"))
            }),
        }
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self
            .parameters
            .keys()
            .find(|k| !allowed.contains(&k.as_str()))
        {
            Some(k) => Err(Error::InvalidParameter(format!(
                "{} takes no parameter {k:?}",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

pub fn generate(spec: &GallerySpec) -> Result<Framework> {
    match spec.name.as_str() {
        "grid" => {
            spec.reject_unknown(&["k"])?;
            grid(spec.integer("k", 3)?)
        }
        "gate" => {
            spec.reject_unknown(&[])?;
            gate()
        }
        "two_lines_braced" => {
            spec.reject_unknown(&[])?;
            two_lines_braced()
        }
        "hyperbolic_paraboloid" => {
            spec.reject_unknown(&["s", "t"])?;
            hyperbolic_paraboloid(spec.integer("s", 3)?, spec.integer("t", 3)?)
        }
        "collinear_complete" => {
            spec.reject_unknown(&["k"])?;
            collinear_complete(spec.integer("k", 3)?)
        }
        "elliptic_cone" => {
            spec.reject_unknown(&[])?;
            elliptic_cone()
        }
        "two_planes" => {
            spec.reject_unknown(&[])?;
            two_planes()
        }
        "triangle_with_center" => {
            spec.reject_unknown(&[])?;
            triangle_with_center()
        }
        "cone_of" => {
            let base = spec
                .parameters
                .get("base")
                .ok_or_else(|| Error::InvalidParameter("cone_of needs a base generator".into()))?;
            let mut inner = GallerySpec::new(base);
            inner.parameters = spec.parameters.clone();
            inner.parameters.remove("base");
            cone_of(&inner)
        }
        other => Err(Error::UnknownGenerator(other.to_string())),
    }
}

/// Every named example with default parameters, plus the cones used by
/// the sliding and coning tests.
pub fn standard_gallery() -> Vec<(String, Framework)> {
    let specs = [
        GallerySpec::new("grid"),
        GallerySpec::new("grid").with("k", 4),
        GallerySpec::new("gate"),
        GallerySpec::new("two_lines_braced"),
        GallerySpec::new("hyperbolic_paraboloid"),
        GallerySpec::new("hyperbolic_paraboloid")
            .with("s", 3)
            .with("t", 4),
        GallerySpec::new("collinear_complete").with("k", 3),
        GallerySpec::new("collinear_complete").with("k", 4),
        GallerySpec::new("collinear_complete").with("k", 5),
        GallerySpec::new("elliptic_cone"),
        GallerySpec::new("two_planes"),
        GallerySpec::new("triangle_with_center"),
        GallerySpec::new("cone_of").with("base", "triangle_with_center"),
        GallerySpec::new("cone_of").with("base", "grid"),
        GallerySpec::new("cone_of").with("base", "two_lines_braced"),
    ];
    specs
        .iter()
        .map(|s| {
            let label = if s.parameters.is_empty() {
                s.name.clone()
            } else {
                let params: Vec<String> = s
                    .parameters
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                format!("{}({})", s.name, params.join(","))
            };
            (label, generate(s).expect("gallery generators are valid"))
        })
        .collect()
}

fn build(dimension: usize, points: &[Vec<f64>], edges: &[(usize, usize)]) -> Result<Framework> {
    let config = Configuration::new(dimension, points)?;
    Framework::new(Graph::new(points.len(), edges.iter().copied())?, config)
}

/// All pairs within each group of vertex indices.
fn cliques(groups: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for g in groups {
        for (a, &i) in g.iter().enumerate() {
            for &j in &g[a + 1..] {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// `k × k` integer grid centred on the origin (coordinates `j − ⌊k/2⌋`),
/// vertex `row·k + col`, with horizontal and vertical unit edges.
pub fn grid(k: usize) -> Result<Framework> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs k >= 2, got {k}"
        )));
    }
    let h = (k / 2) as f64;
    let coords: Vec<f64> = (0..k).map(|j| j as f64 - h).collect();
    grid_with_coordinates(&coords, &coords)
}

fn grid_with_coordinates(xs: &[f64], ys: &[f64]) -> Result<Framework> {
    let (nx, ny) = (xs.len(), ys.len());
    let mut points = Vec::with_capacity(nx * ny);
    for &y in ys {
        for &x in xs {
            points.push(vec![x, y]);
        }
    }
    let mut edges = Vec::new();
    for r in 0..ny {
        for c in 0..nx {
            let v = r * nx + c;
            if c + 1 < nx {
                edges.push((v, v + 1));
            }
            if r + 1 < ny {
                edges.push((v, v + nx));
            }
        }
    }
    build(2, &points, &edges)
}

/// Two stacked unit squares of width 2: vertices (0,0), (2,0), (0,1),
/// (2,1), (0,2), (2,2); three horizontal and four vertical bars.
pub fn gate() -> Result<Framework> {
    let points = [
        [0.0, 0.0],
        [2.0, 0.0],
        [0.0, 1.0],
        [2.0, 1.0],
        [0.0, 2.0],
        [2.0, 2.0],
    ];
    let points: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    let edges = [(0, 1), (2, 3), (4, 5), (0, 2), (2, 4), (1, 3), (3, 5)];
    let f = build(2, &points, &edges)?;
    if conic_space(&f, &Tolerance::default())?.is_empty() {
        return Err(Error::InvalidParameter(
            "gate lost its conic at infinity".into(),
        ));
    }
    Ok(f)
}

/// Origin plus the points -1, 1, 2 on each coordinate axis; all pairs on
/// each axis are joined, which includes the two long braces -1 to 2.
pub fn two_lines_braced() -> Result<Framework> {
    let mut points = vec![vec![0.0, 0.0]];
    for &a in &[-1.0, 1.0, 2.0] {
        points.push(vec![a, 0.0]);
    }
    for &a in &[-1.0, 1.0, 2.0] {
        points.push(vec![0.0, a]);
    }
    let edges = cliques(&[vec![0, 1, 2, 3], vec![0, 4, 5, 6]]);
    build(2, &points, &edges)
}

/// Vertices `(a, b, ab)` for `a ∈ 1..=s`, `b ∈ 1..=t`, vertex
/// `(a-1)·t + (b-1)`; every pair on a common ruling is joined.
pub fn hyperbolic_paraboloid(s: usize, t: usize) -> Result<Framework> {
    let a: Vec<f64> = (1..=s).map(|v| v as f64).collect();
    let b: Vec<f64> = (1..=t).map(|v| v as f64).collect();
    hyperbolic_paraboloid_at(&a, &b)
}

fn hyperbolic_paraboloid_at(a: &[f64], b: &[f64]) -> Result<Framework> {
    let (s, t) = (a.len(), b.len());
    if s < 3 || t < 3 {
        return Err(Error::InvalidParameter(format!(
            "hyperbolic_paraboloid needs s, t >= 3, got ({s}, {t})"
        )));
    }
    let mut points = Vec::with_capacity(s * t);
    for &x in a {
        for &y in b {
            points.push(vec![x, y, x * y]);
        }
    }
    let mut groups: Vec<Vec<usize>> = (0..s)
        .map(|i| (0..t).map(|j| i * t + j).collect())
        .collect();
    groups.extend((0..t).map(|j| (0..s).map(|i| i * t + j).collect()));
    build(3, &points, &cliques(&groups))
}

/// Points `0, 1, …, k−1` on the real line, complete graph.
pub fn collinear_complete(k: usize) -> Result<Framework> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "collinear_complete needs k >= 2, got {k}"
        )));
    }
    let points: Vec<Vec<f64>> = (0..k).map(|i| vec![i as f64]).collect();
    build(1, &points, &cliques(&[(0..k).collect()]))
}

/// Apex at the origin and four rulings of `x² + y² = z²` with directions
/// (3/5, 4/5, 1), (−4/5, 3/5, 1), (−5/13, −12/13, 1), (12/13, −5/13, 1);
/// each ruling carries the points at parameters 1 and 2 and is complete.
pub fn elliptic_cone() -> Result<Framework> {
    let dirs = [
        [0.6, 0.8, 1.0],
        [-0.8, 0.6, 1.0],
        [-5.0 / 13.0, -12.0 / 13.0, 1.0],
        [12.0 / 13.0, -5.0 / 13.0, 1.0],
    ];
    let mut points = vec![vec![0.0, 0.0, 0.0]];
    let mut groups = Vec::new();
    for d in &dirs {
        let first = points.len();
        for &s in &[1.0, 2.0] {
            points.push(d.iter().map(|c| c * s).collect());
        }
        groups.push(vec![0, first, first + 1]);
    }
    build(3, &points, &cliques(&groups))
}

/// Two complete quadrilaterals, one in `z = 0` and one in `x = 0`, sharing
/// the vertices A = (0,0,0) and B = (0,1,0) on the common line. In each
/// plane two lines pass through A and two through B; every line carries
/// three vertices joined pairwise.
pub fn two_planes() -> Result<Framework> {
    let points = vec![
        vec![0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        // z = 0: y = x, y = −2x through A; y = 1 − 3x, y = 1 + x/2 through B.
        vec![0.25, 0.25, 0.0],
        vec![2.0, 2.0, 0.0],
        vec![1.0, -2.0, 0.0],
        vec![-0.4, 0.8, 0.0],
        // x = 0: z = y, z = −y through A; z = 2(y − 1), z = (1 − y)/2 through B.
        vec![0.0, 2.0, 2.0],
        vec![0.0, 1.0 / 3.0, 1.0 / 3.0],
        vec![0.0, 2.0 / 3.0, -2.0 / 3.0],
        vec![0.0, -1.0, 1.0],
    ];
    let lines = [
        vec![0, 2, 3],
        vec![0, 4, 5],
        vec![1, 2, 4],
        vec![1, 3, 5],
        vec![0, 6, 7],
        vec![0, 8, 9],
        vec![1, 6, 8],
        vec![1, 7, 9],
    ];
    build(3, &points, &cliques(&lines))
}

/// K4 on (0,0), (4,0), (1,3) and their centroid (5/3, 1).
pub fn triangle_with_center() -> Result<Framework> {
    let points = vec![
        vec![0.0, 0.0],
        vec![4.0, 0.0],
        vec![1.0, 3.0],
        vec![5.0 / 3.0, 1.0],
    ];
    build(2, &points, &cliques(&[vec![0, 1, 2, 3]]))
}

/// The named framework coned at height 1 (apex is vertex 0).
pub fn cone_of(base: &GallerySpec) -> Result<Framework> {
    if base.name == "cone_of" && !base.parameters.contains_key("base") {
        return Err(Error::InvalidParameter(
            "cone_of needs a base generator".into(),
        ));
    }
    Ok(cone(&generate(base)?, 1.0)?.into_framework())
}

/// Generic points with a random spanning tree plus extra edges, `n`
/// vertices in `E^d`.
pub fn random_generic(
    n: usize,
    d: usize,
    extra_edge_probability: f64,
    seed: u64,
) -> Result<Framework> {
    if n < d + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} vertices in dimension {d}",
            d + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        edges.push((parent.min(order[k]), parent.max(order[k])));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.random::<f64>() < extra_edge_probability {
                edges.push((i, j));
            }
        }
    }
    build(d, &points, &edges)
}

fn sorted_spread<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(count);
    let mut x = 0.0;
    for _ in 0..count {
        x += rng.random_range(0.5..2.0);
        v.push(x);
    }
    v
}

/// Axis-parallel grid with random spacings, `nx × ny` vertices.
pub fn random_grid(nx: usize, ny: usize, seed: u64) -> Result<Framework> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter(
            "random grid needs at least 2 × 2 vertices".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = sorted_spread(&mut rng, nx);
    let ys = sorted_spread(&mut rng, ny);
    grid_with_coordinates(&xs, &ys)
}

/// Hyperbolic-paraboloid framework with random distinct parameters.
pub fn random_hyperbolic_paraboloid(s: usize, t: usize, seed: u64) -> Result<Framework> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = sorted_spread(&mut rng, s);
    let b: Vec<f64> = sorted_spread(&mut rng, t).iter().map(|y| y - 2.0).collect();
    hyperbolic_paraboloid_at(&a, &b)
}

/// Mixed family used by the randomized theorem checks: generic frameworks
/// in the plane and in space, random grids, random paraboloids, and cones
/// over generic planar frameworks.
pub fn random_framework(seed: u64) -> Result<Framework> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
    let sub = rng.random::<u64>();
    match seed % 5 {
        0 => random_generic(rng.random_range(4..9), 2, rng.random_range(0.2..0.8), sub),
        1 => random_generic(rng.random_range(5..10), 3, rng.random_range(0.2..0.8), sub),
        2 => random_grid(rng.random_range(2..5), rng.random_range(2..5), sub),
        3 => random_hyperbolic_paraboloid(rng.random_range(3..5), rng.random_range(3..5), sub),
        _ => {
            let base = random_generic(rng.random_range(3..7), 2, rng.random_range(0.2..0.8), sub)?;
            Ok(cone(&base, rng.random_range(0.5..2.0))?.into_framework())
        }
    }
}
