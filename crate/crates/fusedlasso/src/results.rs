//! JSON result documents. Every document carries `schema_version` and the
//! `command` that produced it.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use fusedlasso_core::path::{CellStatus, PathCell, PathResult};
use fusedlasso_core::simgen::SimMetadata;
use fusedlasso_core::verify::{ErrReport, Optimality, Violation};
use fusedlasso_core::{Loss, SolverKind};

pub const SCHEMA_VERSION: u32 = 1;

pub fn loss_name(loss: Loss) -> &'static str {
    match loss {
        Loss::Squared => "squared",
        Loss::Logistic => "logistic",
        Loss::Cox => "cox",
    }
}

/// Coefficients stored as `[index, value]` pairs for the nonzero entries;
/// indices are 1-based like the edge files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseBeta {
    pub p: usize,
    pub nonzero: Vec<(usize, f64)>,
}

impl SparseBeta {
    pub fn from_dense(beta: &[f64]) -> Self {
        SparseBeta {
            p: beta.len(),
            nonzero: beta
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(k, v)| (k + 1, *v))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Result<Vec<f64>, String> {
        let mut beta = vec![0.0; self.p];
        for &(k, v) in &self.nonzero {
            if k == 0 || k > self.p {
                return Err(format!("coefficient index {k} outside 1..={}", self.p));
            }
            beta[k - 1] = v;
        }
        Ok(beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDoc {
    pub schema_version: u32,
    pub command: String,
    pub loss: String,
    pub solver: String,
    pub n: usize,
    pub p: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub certificate_residual: Option<f64>,
    pub beta: SparseBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDoc {
    pub lambda1_index: usize,
    pub lambda2_index: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `solved`, `skipped` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub objective: Option<f64>,
    pub nonzero: usize,
    pub converged: bool,
    pub seconds: f64,
    pub certificate_residual: Option<f64>,
    pub beta: Option<SparseBeta>,
}

impl CellDoc {
    pub fn from_cell(cell: &PathCell) -> Self {
        let (status, error) = match &cell.status {
            CellStatus::Solved => ("solved", None),
            CellStatus::Skipped => ("skipped", None),
            CellStatus::Failed(e) => ("failed", Some(e.to_string())),
        };
        CellDoc {
            lambda1_index: cell.lambda1_index,
            lambda2_index: cell.lambda2_index,
            lambda1: cell.lambda1,
            lambda2: cell.lambda2,
            status: status.to_owned(),
            error,
            objective: cell.objective,
            nonzero: cell.nonzero,
            converged: cell.converged,
            seconds: cell.seconds,
            certificate_residual: cell.certificate_residual,
            beta: cell.beta.as_deref().map(SparseBeta::from_dense),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDoc {
    pub schema_version: u32,
    pub command: String,
    pub loss: String,
    pub solver: String,
    pub n: usize,
    pub p: usize,
    pub grid: GridDoc,
    /// Row-major: all λ₁ cells of the first λ₂ value, then the next row.
    pub cells: Vec<CellDoc>,
}

impl PathDoc {
    pub fn new(loss: Loss, solver: SolverKind, n: usize, p: usize, path: &PathResult) -> Self {
        PathDoc {
            schema_version: SCHEMA_VERSION,
            command: "path".to_owned(),
            loss: loss_name(loss).to_owned(),
            solver: solver.name().to_owned(),
            n,
            p,
            grid: GridDoc {
                lambda1: path.grid.lambda1.clone(),
                lambda2: path.grid.lambda2.clone(),
            },
            cells: path.cells.iter().map(CellDoc::from_cell).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub schema_version: u32,
    pub command: String,
    pub loss: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub objective: f64,
    pub certified: bool,
    pub max_residual: f64,
    pub violations: Vec<String>,
    pub s: Vec<f64>,
    /// One multiplier per edge, in edge-file order.
    pub t: Vec<f64>,
}

pub fn describe_violation(v: &Violation) -> String {
    let one_based = |set: &[usize]| set.iter().map(|k| k + 1).collect::<Vec<_>>();
    match v {
        Violation::CoordinateMove { set, from, to } => {
            format!("group {:?} moves from {from} to {to}", one_based(set))
        }
        Violation::Split { set, mode, components } => format!(
            "group {:?} splits ({:?}) into {:?}",
            one_based(set),
            mode,
            components.iter().map(|c| one_based(c)).collect::<Vec<_>>()
        ),
        Violation::Residual { max_residual } => {
            format!("stationarity residual {max_residual} above tolerance")
        }
    }
}

pub fn violations_of(verdict: &Optimality) -> Vec<String> {
    match verdict {
        Optimality::Certified(_) => Vec::new(),
        Optimality::Refuted { violations, .. } => violations.iter().map(describe_violation).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateDoc {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub n: usize,
    pub dims: u8,
    pub side: usize,
    pub p: usize,
    pub sigma: f64,
    /// Length (1D) or side (2D) of the block of ones in the true β.
    pub block: usize,
    pub files: Vec<String>,
}

impl SimulateDoc {
    pub fn new(meta: &SimMetadata, p: usize, files: Vec<String>) -> Self {
        SimulateDoc {
            schema_version: SCHEMA_VERSION,
            command: "simulate".to_owned(),
            seed: meta.seed,
            n: meta.n,
            dims: meta.dims,
            side: meta.side,
            p,
            sigma: meta.sigma,
            block: meta.block,
            files,
        }
    }
}

/// Worst-over-grid accuracy of one solver against the reference solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDoc {
    pub solver: String,
    pub reference: String,
    pub l1_mean: f64,
    pub rmse: f64,
    pub linf: f64,
    pub cells: usize,
}

impl AccuracyDoc {
    pub fn new(solver: SolverKind, reference: SolverKind, report: &ErrReport) -> Self {
        AccuracyDoc {
            solver: solver.name().to_owned(),
            reference: reference.name().to_owned(),
            l1_mean: report.l1_mean,
            rmse: report.rmse,
            linf: report.linf,
            cells: report.cells,
        }
    }
}

/// Indented JSON in which arrays of scalars, and arrays of such arrays,
/// stay on one line.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let value = serde_json::to_value(doc).expect("documents serialize");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(items) => items.iter().all(|i| !i.is_object() && !i.is_array()),
        _ => true,
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(item, indent + 2, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
        Value::Array(items) if !items.iter().all(is_flat) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 2, out);
                write_value(item, indent + 2, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_round_trip() {
        let beta = vec![0.0, 0.1, 0.0, -1e-300, 3.0];
        let s = SparseBeta::from_dense(&beta);
        assert_eq!(s.nonzero, vec![(2, 0.1), (4, -1e-300), (5, 3.0)]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"p":5,"nonzero":[[2,0.1],[4,-1e-300],[5,3.0]]}"#);
        let back: SparseBeta = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_dense().unwrap(), beta);
        assert!(SparseBeta { p: 2, nonzero: vec![(3, 1.0)] }.to_dense().is_err());
    }

    #[test]
    fn layout_keeps_pairs_inline() {
        let doc = serde_json::json!({"a": 1, "b": {"p": 2, "nonzero": [[1, 0.5]]}, "c": [{"x": []}]});
        assert_eq!(
            to_json(&doc),
            "{\n  \"a\": 1,\n  \"b\": {\n    \"p\": 2,\n    \"nonzero\": [[1,0.5]]\n  },\n  \"c\": [\n    {\n      \"x\": []\n    }\n  ]\n}\n"
        );
    }
}
