//! Plain-text inputs: headerless CSV design matrices, one-per-line
//! responses, 1-based edge lists and node-weight lists.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use fusedlasso_core::{CoxData, Loss, Matrix, PenaltyGraph, Response};

/// A malformed or inconsistent input file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct DataError {
    pub file: String,
    /// 1-based line number, when the problem is on one line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file, line, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl DataError {
    pub fn new(file: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        DataError {
            file: file.to_owned(),
            line,
            message: message.into(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path)
        .map_err(|e| DataError::new(&path.display().to_string(), None, e.to_string()))
}

/// Non-blank lines that are not `#` comments, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(file: &str, line: usize, field: &str) -> Result<f64, DataError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| DataError::new(file, Some(line), format!("not a number: {:?}", field.trim())))?;
    if !v.is_finite() {
        return Err(DataError::new(file, Some(line), format!("non-finite value {:?}", field.trim())));
    }
    Ok(v)
}

fn parse_index(file: &str, line: usize, field: &str, p: usize) -> Result<usize, DataError> {
    let k: usize = field
        .trim()
        .parse()
        .map_err(|_| DataError::new(file, Some(line), format!("not an index: {:?}", field.trim())))?;
    if k == 0 || k > p {
        return Err(DataError::new(
            file,
            Some(line),
            format!("index {k} outside 1..={p}"),
        ));
    }
    Ok(k - 1)
}

/// Headerless CSV, one observation per row.
pub fn parse_design(text: &str, file: &str) -> Result<Matrix, DataError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(text) {
        let row = l
            .split(',')
            .map(|f| parse_f64(file, line, f))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(DataError::new(
                    file,
                    Some(line),
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::new(file, None, "no rows"));
    }
    Matrix::from_rows(&rows).map_err(|e| DataError::new(file, None, e.to_string()))
}

/// One value per line; `time,status` pairs for Cox.
pub fn parse_response(text: &str, file: &str, loss: Loss) -> Result<Response, DataError> {
    match loss {
        Loss::Squared | Loss::Logistic => {
            let mut y = Vec::new();
            for (line, l) in content_lines(text) {
                let v = parse_f64(file, line, l)?;
                if loss == Loss::Logistic && v != 0.0 && v != 1.0 {
                    return Err(DataError::new(file, Some(line), format!("logistic response must be 0 or 1, got {l}")));
                }
                y.push(v);
            }
            Ok(match loss {
                Loss::Squared => Response::Continuous(y),
                _ => Response::Binary(y),
            })
        }
        Loss::Cox => {
            let mut times = Vec::new();
            let mut status = Vec::new();
            for (line, l) in content_lines(text) {
                let Some((t, s)) = l.split_once(',') else {
                    return Err(DataError::new(file, Some(line), "expected time,status"));
                };
                times.push(parse_f64(file, line, t)?);
                status.push(match s.trim() {
                    "1" => true,
                    "0" => false,
                    other => {
                        return Err(DataError::new(file, Some(line), format!("status must be 0 or 1, got {other:?}")))
                    }
                });
            }
            CoxData::new(times, status)
                .map(Response::Survival)
                .map_err(|e| DataError::new(file, None, e.to_string()))
        }
    }
}

/// `k l w` triples, 1-based; the weight may be omitted and defaults to 1.
pub fn parse_edges(text: &str, file: &str, p: usize) -> Result<Vec<(usize, usize, f64)>, DataError> {
    let mut edges = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(DataError::new(file, Some(line), format!("expected `k l w`, got {} fields", fields.len())));
        }
        let k = parse_index(file, line, fields[0], p)?;
        let l = parse_index(file, line, fields[1], p)?;
        let w = match fields.get(2) {
            Some(f) => parse_f64(file, line, f)?,
            None => 1.0,
        };
        if k == l {
            return Err(DataError::new(file, Some(line), format!("self-loop at node {}", k + 1)));
        }
        if !(w > 0.0) {
            return Err(DataError::new(file, Some(line), format!("edge weight {w} must be positive")));
        }
        edges.push((k, l, w));
    }
    Ok(edges)
}

/// `k w` pairs, 1-based; unlisted nodes keep weight 1.
pub fn parse_node_weights(text: &str, file: &str, p: usize) -> Result<Vec<f64>, DataError> {
    let mut weights = vec![1.0; p];
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(DataError::new(file, Some(line), format!("expected `k w`, got {} fields", fields.len())));
        }
        let k = parse_index(file, line, fields[0], p)?;
        let w = parse_f64(file, line, fields[1])?;
        if !(w > 0.0) {
            return Err(DataError::new(file, Some(line), format!("node weight {w} must be positive")));
        }
        weights[k] = w;
    }
    Ok(weights)
}

/// Builds the penalty graph, reporting core validation failures against the
/// edge file.
pub fn build_graph(
    edges: Vec<(usize, usize, f64)>,
    weights: Vec<f64>,
    file: &str,
) -> Result<PenaltyGraph, DataError> {
    PenaltyGraph::new(weights, edges).map_err(|e| DataError::new(file, None, e.to_string()))
}

/// Shortest decimal that reads back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn format_design(x: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(x.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = String::new();
    for x in v {
        out.push_str(&fmt_f64(*x));
        out.push('\n');
    }
    out
}

pub fn format_response(response: &Response) -> String {
    match response {
        Response::Continuous(y) | Response::Binary(y) => format_vector(y),
        Response::Survival(d) => {
            let mut out = String::new();
            for (t, s) in d.times().iter().zip(d.status()) {
                let _ = writeln!(out, "{},{}", fmt_f64(*t), u8::from(*s));
            }
            out
        }
    }
}

pub fn format_edges(graph: &PenaltyGraph) -> String {
    let mut out = String::new();
    for &(k, l, w) in graph.edges() {
        let _ = writeln!(out, "{} {} {}", k + 1, l + 1, fmt_f64(w));
    }
    out
}

/// Only weights different from 1 are listed.
pub fn format_node_weights(graph: &PenaltyGraph) -> String {
    let mut out = String::new();
    for (k, w) in graph.node_weights().iter().enumerate() {
        if *w != 1.0 {
            let _ = writeln!(out, "{} {}", k + 1, fmt_f64(*w));
        }
    }
    out
}
