//! Problem data and objective evaluation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::Partition;
use crate::matrix::{dot, Matrix};

/// One adjacency entry of a [`PenaltyGraph`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: usize,
    pub weight: f64,
    pub edge: usize,
}

/// Undirected weighted graph over coefficient indices `0..p`.
///
/// Node weights multiply the λ₁ term, edge weights the λ₂ term. All weights
/// are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGraph {
    node_weights: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    adjacency: Vec<Neighbor>,
}

impl PenaltyGraph {
    /// Builds a graph; edges are normalized to `k < l`.
    pub fn new(node_weights: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let p = node_weights.len();
        if let Some(k) = node_weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidGraph(format!(
                "node weight {} of node {k} is not strictly positive",
                node_weights[k]
            )));
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b, w) in &edges {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a node outside 0..{p}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has weight {w}, expected > 0"
                )));
            }
            let (k, l) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((k, l)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({k}, {l})")));
            }
            normalized.push((k, l, w));
        }

        let mut degree = vec![0usize; p];
        for &(k, l, _) in &normalized {
            degree[k] += 1;
            degree[l] += 1;
        }
        let mut offsets = vec![0usize; p + 1];
        for k in 0..p {
            offsets[k + 1] = offsets[k] + degree[k];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![
            Neighbor {
                node: 0,
                weight: 0.0,
                edge: 0
            };
            offsets[p]
        ];
        for (e, &(k, l, w)) in normalized.iter().enumerate() {
            adjacency[fill[k]] = Neighbor {
                node: l,
                weight: w,
                edge: e,
            };
            fill[k] += 1;
            adjacency[fill[l]] = Neighbor {
                node: k,
                weight: w,
                edge: e,
            };
            fill[l] += 1;
        }
        Ok(PenaltyGraph {
            node_weights,
            edges: normalized,
            offsets,
            adjacency,
        })
    }

    /// Graph with unit node weights.
    pub fn with_unit_weights(p: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        PenaltyGraph::new(vec![1.0; p], edges)
    }

    /// Chain `0 – 1 – … – p−1` with unit weights.
    pub fn chain(p: usize) -> Self {
        let edges = (1..p).map(|k| (k - 1, k, 1.0)).collect();
        PenaltyGraph::with_unit_weights(p, edges).expect("chain is a valid graph")
    }

    /// 4-neighbour grid on a `side × side` lattice, node `r * side + c`.
    pub fn grid(side: usize) -> Self {
        let mut edges = Vec::with_capacity(2 * side * side.saturating_sub(1));
        for r in 0..side {
            for c in 0..side {
                let k = r * side + c;
                if c + 1 < side {
                    edges.push((k, k + 1, 1.0));
                }
                if r + 1 < side {
                    edges.push((k, k + side, 1.0));
                }
            }
        }
        PenaltyGraph::with_unit_weights(side * side, edges).expect("grid is a valid graph")
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.node_weights.len()
    }

    #[inline]
    pub fn node_weight(&self, k: usize) -> f64 {
        self.node_weights[k]
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    /// Edges as `(k, l, w_kl)` with `k < l`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, k: usize) -> &[Neighbor] {
        &self.adjacency[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn edge_weight(&self, k: usize, l: usize) -> Option<f64> {
        self.neighbors(k)
            .iter()
            .find(|nb| nb.node == l)
            .map(|nb| nb.weight)
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let p = self.p();
        let mut label = vec![usize::MAX; p];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..p {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut comp = Vec::new();
            label[start] = id;
            stack.push(start);
            while let Some(k) = stack.pop() {
                comp.push(k);
                for nb in self.neighbors(k) {
                    if label[nb.node] == usize::MAX {
                        label[nb.node] = id;
                        stack.push(nb.node);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// λ₁ Σ w_k|β_k| + λ₂ Σ w_kl|β_k − β_l|
    pub fn penalty(&self, beta: &[f64], lambda1: f64, lambda2: f64) -> f64 {
        let l1: f64 = self
            .node_weights
            .iter()
            .zip(beta)
            .map(|(w, b)| w * b.abs())
            .sum();
        let l2: f64 = self
            .edges
            .iter()
            .map(|&(k, l, w)| w * (beta[k] - beta[l]).abs())
            .sum();
        lambda1 * l1 + lambda2 * l2
    }
}

/// Right-censored survival outcome without tied times.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxData {
    times: Vec<f64>,
    status: Vec<bool>,
    /// Observation indices sorted by increasing time.
    order: Vec<usize>,
}

impl CoxData {
    pub fn new(times: Vec<f64>, status: Vec<bool>) -> Result<Self> {
        if times.len() != status.len() {
            return Err(Error::DimensionMismatch {
                what: "survival status",
                expected: times.len(),
                found: status.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("event times"));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        for w in order.windows(2) {
            if times[w[0]] == times[w[1]] {
                let (a, b) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
                return Err(Error::TiedTimes(a, b));
            }
        }
        if !status.iter().any(|&s| s) {
            return Err(Error::NoEvents);
        }
        Ok(CoxData {
            times,
            status,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn status(&self) -> &[bool] {
        &self.status
    }

    /// Indices sorted by increasing time; the risk set of `order[j]` is
    /// `order[j..]`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Members of `R(t_k) = {l : t_l ≥ t_k}`.
    pub fn risk_set(&self, k: usize) -> Vec<usize> {
        let tk = self.times[k];
        (0..self.len()).filter(|&l| self.times[l] >= tk).collect()
    }

    /// Negative log partial likelihood at linear predictor `eta`.
    pub fn neg_log_partial_likelihood(&self, eta: &[f64]) -> f64 {
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut risk_sum = 0.0;
        let mut nll = 0.0;
        for &i in self.order.iter().rev() {
            risk_sum += libm::exp(eta[i] - shift);
            if self.status[i] {
                nll -= eta[i] - shift - libm::log(risk_sum);
            }
        }
        nll
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Squared,
    Logistic,
    Cox,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// Real response, squared-error loss.
    Continuous(Vec<f64>),
    /// 0/1 response, logistic loss.
    Binary(Vec<f64>),
    Survival(CoxData),
}

impl Response {
    pub fn loss(&self) -> Loss {
        match self {
            Response::Continuous(_) => Loss::Squared,
            Response::Binary(_) => Loss::Logistic,
            Response::Survival(_) => Loss::Cox,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Response::Continuous(y) | Response::Binary(y) => y.len(),
            Response::Survival(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A full fused lasso instance: design, response, graph and penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedProblem {
    x: Matrix,
    response: Response,
    graph: PenaltyGraph,
    lambda1: f64,
    lambda2: f64,
    obs_weights: Option<Vec<f64>>,
}

fn check_lambda(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if v < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

impl FusedProblem {
    pub fn new(
        x: Matrix,
        response: Response,
        graph: PenaltyGraph,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        if x.ncols() != graph.p() {
            return Err(Error::DimensionMismatch {
                what: "design columns vs graph nodes",
                expected: graph.p(),
                found: x.ncols(),
            });
        }
        if response.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                what: "response length",
                expected: x.nrows(),
                found: response.len(),
            });
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("design matrix"));
        }
        match &response {
            Response::Continuous(y) => {
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("response"));
                }
            }
            Response::Binary(y) => {
                if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "response",
                        reason: "logistic response must be 0 or 1",
                    });
                }
            }
            Response::Survival(_) => {}
        }
        check_lambda("lambda1", lambda1)?;
        check_lambda("lambda2", lambda2)?;
        Ok(FusedProblem {
            x,
            response,
            graph,
            lambda1,
            lambda2,
            obs_weights: None,
        })
    }

    /// Squared-error problem.
    pub fn squared(
        x: Matrix,
        y: Vec<f64>,
        graph: PenaltyGraph,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        FusedProblem::new(x, Response::Continuous(y), graph, lambda1, lambda2)
    }

    /// Attaches per-observation weights `v_i ≥ 0` to a squared-error problem.
    pub fn with_obs_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if self.loss() != Loss::Squared {
            return Err(Error::UnsupportedLoss(self.loss()));
        }
        if weights.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "observation weights",
                expected: self.n(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "obs_weights",
                reason: "must be finite and non-negative",
            });
        }
        self.obs_weights = Some(weights);
        Ok(self)
    }

    pub fn set_lambdas(&mut self, lambda1: f64, lambda2: f64) -> Result<()> {
        check_lambda("lambda1", lambda1)?;
        check_lambda("lambda2", lambda2)?;
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        Ok(())
    }

    pub fn with_lambdas(&self, lambda1: f64, lambda2: f64) -> Result<Self> {
        let mut out = self.clone();
        out.set_lambdas(lambda1, lambda2)?;
        Ok(out)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn graph(&self) -> &PenaltyGraph {
        &self.graph
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn obs_weights(&self) -> Option<&[f64]> {
        self.obs_weights.as_deref()
    }

    pub fn loss(&self) -> Loss {
        self.response.loss()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// The squared-error core of this problem, with observation weights
    /// folded into the rows as `√v_i`.
    pub fn least_squares(&self) -> Result<LeastSquares> {
        let y = match &self.response {
            Response::Continuous(y) => y,
            _ => return Err(Error::UnsupportedLoss(self.loss())),
        };
        match &self.obs_weights {
            None => LeastSquares::new(
                self.x.clone(),
                y.clone(),
                None,
                self.graph.clone(),
                self.lambda1,
                self.lambda2,
            ),
            Some(v) => {
                let root: Vec<f64> = v.iter().map(|w| libm::sqrt(*w)).collect();
                let mut x = self.x.clone();
                for j in 0..x.ncols() {
                    for (xij, r) in x.col_mut(j).iter_mut().zip(&root) {
                        *xij *= r;
                    }
                }
                let y = y.iter().zip(&root).map(|(a, r)| a * r).collect();
                LeastSquares::new(x, y, None, self.graph.clone(), self.lambda1, self.lambda2)
            }
        }
    }

    /// Data-fit term only: ½ Σ v_i (y_i − x_iᵀβ)², or the negative
    /// (partial) log-likelihood.
    pub fn data_loss(&self, beta: &[f64]) -> Result<f64> {
        self.check_beta(beta)?;
        let eta = self.x.mul_vec(beta);
        let value = match &self.response {
            Response::Continuous(y) => {
                let w = self.obs_weights.as_deref();
                0.5 * y
                    .iter()
                    .zip(&eta)
                    .enumerate()
                    .map(|(i, (yi, ei))| {
                        let r = yi - ei;
                        w.map_or(1.0, |w| w[i]) * r * r
                    })
                    .sum::<f64>()
            }
            Response::Binary(y) => y
                .iter()
                .zip(&eta)
                .map(|(yi, ei)| log1p_exp(*ei) - yi * ei)
                .sum(),
            Response::Survival(d) => d.neg_log_partial_likelihood(&eta),
        };
        if !value.is_finite() {
            return Err(Error::NonFinite("loss value"));
        }
        Ok(value)
    }

    fn check_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: self.p(),
                found: beta.len(),
            });
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        Ok(())
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Objective of a fused lasso instance at `beta`.
pub fn loss_value(problem: &FusedProblem, beta: &[f64]) -> Result<f64> {
    let data = problem.data_loss(beta)?;
    Ok(data + problem.graph.penalty(beta, problem.lambda1, problem.lambda2))
}

/// Gradient of the part of the objective that is differentiable once the
/// partition is fixed: the squared-error term plus the λ₂ terms of edges
/// that cross between partition sets.
pub fn loss_gradient_smooth_part(
    problem: &FusedProblem,
    beta: &[f64],
    partition: &Partition,
) -> Result<Vec<f64>> {
    problem.check_beta(beta)?;
    let ls = problem.least_squares()?;
    partition.check_consistent(ls.graph(), beta)?;
    let mut grad = ls.smooth_gradient(beta);
    ls.add_cross_partition_terms(partition, &mut grad);
    Ok(grad)
}

/// Squared-error fused lasso with an optional linear term:
///
/// ```text
/// ½‖y − Xβ‖² − cᵀβ + λ₁ Σ w_k|β_k| + λ₂ Σ w_kl|β_k − β_l|
/// ```
///
/// Every solver in the crate runs on this form. The linear term carries the
/// exact gradient of the Cox likelihood when its curvature is rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    x: Matrix,
    y: Vec<f64>,
    linear: Option<Vec<f64>>,
    graph: PenaltyGraph,
    lambda1: f64,
    lambda2: f64,
    col_sq_norms: Vec<f64>,
}

impl LeastSquares {
    pub fn new(
        x: Matrix,
        y: Vec<f64>,
        linear: Option<Vec<f64>>,
        graph: PenaltyGraph,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        if x.ncols() != graph.p() {
            return Err(Error::DimensionMismatch {
                what: "design columns vs graph nodes",
                expected: graph.p(),
                found: x.ncols(),
            });
        }
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                what: "response length",
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if let Some(c) = &linear {
            if c.len() != x.ncols() {
                return Err(Error::DimensionMismatch {
                    what: "linear term",
                    expected: x.ncols(),
                    found: c.len(),
                });
            }
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        check_lambda("lambda1", lambda1)?;
        check_lambda("lambda2", lambda2)?;
        let col_sq_norms = x.col_sq_norms();
        Ok(LeastSquares {
            x,
            y,
            linear,
            graph,
            lambda1,
            lambda2,
            col_sq_norms,
        })
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn linear(&self) -> Option<&[f64]> {
        self.linear.as_deref()
    }

    pub fn graph(&self) -> &PenaltyGraph {
        &self.graph
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn set_lambdas(&mut self, lambda1: f64, lambda2: f64) -> Result<()> {
        check_lambda("lambda1", lambda1)?;
        check_lambda("lambda2", lambda2)?;
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// `(XᵀX)_kk` for every column.
    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    pub fn linear_at(&self, k: usize) -> f64 {
        self.linear.as_ref().map_or(0.0, |c| c[k])
    }

    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let fit = self.x.mul_vec(beta);
        self.y.iter().zip(fit).map(|(y, f)| y - f).collect()
    }

    pub fn smooth_value(&self, beta: &[f64]) -> f64 {
        let r = self.residual(beta);
        let lin = self.linear.as_ref().map_or(0.0, |c| dot(c, beta));
        0.5 * dot(&r, &r) - lin
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        self.smooth_value(beta) + self.graph.penalty(beta, self.lambda1, self.lambda2)
    }

    /// `−Xᵀ(y − Xβ) − c`
    pub fn smooth_gradient(&self, beta: &[f64]) -> Vec<f64> {
        let r = self.residual(beta);
        self.gradient_from_residual(&r)
    }

    pub(crate) fn gradient_from_residual(&self, r: &[f64]) -> Vec<f64> {
        (0..self.p())
            .map(|k| -dot(self.x.col(k), r) - self.linear_at(k))
            .collect()
    }

    /// Adds λ₂ w_kl sign(v_i − v_j) for every edge between distinct
    /// partition sets.
    pub(crate) fn add_cross_partition_terms(&self, partition: &Partition, grad: &mut [f64]) {
        if self.lambda2 == 0.0 {
            return;
        }
        let membership = partition.membership();
        let values = partition.values();
        for &(k, l, w) in self.graph.edges() {
            let (a, b) = (membership[k], membership[l]);
            if a == b {
                continue;
            }
            let s = sign(values[a] - values[b]);
            grad[k] += self.lambda2 * w * s;
            grad[l] -= self.lambda2 * w * s;
        }
    }
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient multipliers witnessing stationarity of the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCertificate {
    /// `s_k ∈ [−1, 1]`, equal to `sign(β_k)` when `β_k ≠ 0`.
    pub s: Vec<f64>,
    /// `t_kl` per edge in [`PenaltyGraph::edges`] order (`k < l`);
    /// `t_lk = −t_kl`.
    pub t: Vec<f64>,
    /// Largest absolute stationarity residual over all coordinates.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub beta: Vec<f64>,
    pub objective: f64,
    /// Total coordinate sweeps across all inner solves.
    pub iterations: usize,
    pub converged: bool,
    pub certificate: Option<OptimalityCertificate>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(lambda1: f64, lambda2: f64) -> FusedProblem {
        FusedProblem::squared(
            Matrix::identity(2),
            vec![2.0, 0.0],
            PenaltyGraph::chain(2),
            lambda1,
            lambda2,
        )
        .unwrap()
    }

    #[test]
    fn loss_at_zero_is_half_yty() {
        let p = toy(3.0, 7.0);
        assert_eq!(loss_value(&p, &[0.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn loss_scalar_substitution() {
        let p = FusedProblem::squared(
            Matrix::identity(1),
            vec![2.0],
            PenaltyGraph::with_unit_weights(1, vec![]).unwrap(),
            1.0,
            0.0,
        )
        .unwrap();
        assert_eq!(loss_value(&p, &[1.0]).unwrap(), 1.5);
    }

    #[test]
    fn loss_two_node_chain() {
        let p = toy(0.0, 0.5);
        assert!((loss_value(&p, &[1.5, 0.5]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn loss_errors() {
        let p = toy(0.0, 0.5);
        assert!(matches!(
            loss_value(&p, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            loss_value(&p, &[f64::NAN, 0.0]),
            Err(Error::NonFinite("coefficients"))
        );
    }

    #[test]
    fn graph_validation() {
        assert!(PenaltyGraph::with_unit_weights(3, vec![(0, 0, 1.0)]).is_err());
        assert!(PenaltyGraph::with_unit_weights(3, vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(PenaltyGraph::with_unit_weights(3, vec![(0, 1, 0.0)]).is_err());
        assert!(PenaltyGraph::new(vec![1.0, 0.0], vec![]).is_err());
        let g = PenaltyGraph::with_unit_weights(3, vec![(2, 0, 1.5)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2, 1.5)]);
        assert_eq!(g.neighbors(0).len(), 1);
        assert_eq!(g.neighbors(2)[0].node, 0);
        assert_eq!(g.edge_weight(2, 0), Some(1.5));
        assert!(g.neighbors(1).is_empty());
    }

    #[test]
    fn grid_edge_count() {
        assert_eq!(PenaltyGraph::grid(3).edges().len(), 12);
        assert_eq!(PenaltyGraph::grid(5).edges().len(), 2 * 5 * 4);
    }

    #[test]
    fn smooth_gradient_fused_pair() {
        use crate::fusion::build_partition;
        let p = toy(0.0, 3.0);
        let beta = [1.0, 1.0];
        let part = build_partition(p.graph(), &beta);
        let g = loss_gradient_smooth_part(&p, &beta, &part).unwrap();
        assert_eq!(g, vec![-1.0, 1.0]);
    }

    #[test]
    fn cox_ties_and_no_events_rejected() {
        assert_eq!(
            CoxData::new(vec![1.0, 2.0, 1.0], vec![true, true, false]),
            Err(Error::TiedTimes(0, 2))
        );
        assert_eq!(
            CoxData::new(vec![1.0, 2.0], vec![false, false]),
            Err(Error::NoEvents)
        );
    }

    #[test]
    fn cox_partial_likelihood_two_obs() {
        let d = CoxData::new(vec![1.0, 2.0], vec![true, true]).unwrap();
        // log L(0) = log(1/2) + log(1/1)
        let nll = d.neg_log_partial_likelihood(&[0.0, 0.0]);
        assert!((nll - libm::log(2.0)).abs() < 1e-15);
        assert_eq!(d.risk_set(0), vec![0, 1]);
        assert_eq!(d.risk_set(1), vec![1]);
    }
}
