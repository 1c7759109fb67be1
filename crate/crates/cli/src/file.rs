use std::fs;
use std::path::Path;

use rigidity_core::{Configuration, Framework, Graph, Tolerance};
use serde::{Deserialize, Serialize};

/// On-disk framework: `{"dimension": d, "vertices": [[..]], "edges": [[i, j]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkFile {
    pub dimension: usize,
    pub vertices: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

impl FrameworkFile {
    pub fn from_framework(f: &Framework) -> Self {
        Self {
            dimension: f.dimension(),
            vertices: f.config().points(),
            edges: f.graph().edges().iter().map(|&(i, j)| [i, j]).collect(),
        }
    }

    pub fn to_framework(&self, tol: &Tolerance) -> Result<Framework, String> {
        let config = Configuration::with_tolerance(self.dimension, &self.vertices, tol)
            .map_err(|e| e.to_string())?;
        let graph = Graph::new(self.vertices.len(), self.edges.iter().map(|e| (e[0], e[1])))
            .map_err(|e| e.to_string())?;
        Framework::with_tolerance(graph, config, tol).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("framework files always serialize")
    }
}

pub fn read_framework(path: &Path, tol: &Tolerance) -> Result<Framework, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let file: FrameworkFile = serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a framework file: {e}", path.display()))?;
    file.to_framework(tol)
        .map_err(|e| format!("{}: {e}", path.display()))
}
