//! Numerical tools for the rigidity of bar-joint frameworks: equilibrium
//! stresses, conics at infinity, ruling quadrics, neighborhood affine
//! rigidity, coning/sliding/slicing, and super-stability certificates.
//!
//! ```
//! use rigidity_core::{certify, gallery, Tolerance};
//!
//! let f = gallery::triangle_with_center().unwrap();
//! let report = certify::analyze(&f, 0, &Tolerance::default()).unwrap();
//! assert_eq!(report.super_stability.verdict, certify::Verdict::SuperStable);
//! ```

pub mod affine;
pub mod certify;
pub mod conic;
pub mod error;
pub mod framework;
pub mod gallery;
pub mod numerics;
pub mod operations;

pub use error::{Error, Result};
pub use framework::{Configuration, Framework, Graph, StressMatrix};
pub use numerics::{SignatureTriple, Tolerance};

use nalgebra::{DMatrix, DVector};
use serde::ser::{SerializeSeq, Serializer};

/// Serializes a matrix as an array of rows.
pub(crate) fn serialize_matrix<S: Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        let row: Vec<f64> = row.iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

pub(crate) fn serialize_vector<S: Serializer>(
    v: &DVector<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}
