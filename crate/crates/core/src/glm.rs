//! Logistic and Cox losses by iteratively reweighted least squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{loss_value, CoxData, FusedProblem, LeastSquares, Response, Solution};
use crate::solver::{solve_least_squares, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct IrwlsConfig {
    pub max_outer: usize,
    /// Stop when the penalized loss changes by less than this, relatively.
    pub tol: f64,
    /// Fitted probabilities are clamped to `[c, 1 − c]`.
    pub prob_clamp: f64,
}

impl Default for IrwlsConfig {
    fn default() -> Self {
        IrwlsConfig {
            max_outer: 50,
            tol: 1e-8,
            prob_clamp: 1e-5,
        }
    }
}

impl IrwlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter {
                name: "max_outer",
                reason: "must be at least 1",
            });
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be positive",
            });
        }
        if !(self.prob_clamp > 0.0 && self.prob_clamp < 0.5) {
            return Err(Error::InvalidParameter {
                name: "prob_clamp",
                reason: "must lie in (0, 0.5)",
            });
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Working response `z` and weights `v` of one logistic IRWLS step.
pub fn logistic_working_response(
    x: &Matrix,
    y: &[f64],
    beta: &[f64],
    prob_clamp: f64,
) -> (Vec<f64>, Vec<f64>) {
    let eta = x.mul_vec(beta);
    let mut z = Vec::with_capacity(eta.len());
    let mut v = Vec::with_capacity(eta.len());
    for (e, yi) in eta.iter().zip(y) {
        let p = sigmoid(*e).clamp(prob_clamp, 1.0 - prob_clamp);
        let w = p * (1.0 - p);
        z.push(e + (yi - p) / w);
        v.push(w);
    }
    (z, v)
}

/// Gradient of the log partial likelihood.
pub fn cox_gradient(x: &Matrix, data: &CoxData, beta: &[f64]) -> Vec<f64> {
    cox_pieces(x, data, beta).gradient
}

struct CoxPieces {
    gradient: Vec<f64>,
    qdiag: Vec<f64>,
    weights: Vec<f64>,
}

fn cox_pieces(x: &Matrix, data: &CoxData, beta: &[f64]) -> CoxPieces {
    let n = data.len();
    let p = x.ncols();
    let eta = x.mul_vec(beta);
    let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = eta.iter().map(|v| libm::exp(v - shift)).collect();
    let order = data.order();
    let status = data.status();

    let mut gradient = vec![0.0; p];
    let mut qdiag = vec![0.0; p];
    let mut s0_at = vec![0.0; n];
    let mut s0 = 0.0;
    let mut s1 = vec![0.0; p];
    let mut s2 = vec![0.0; p];
    for &i in order.iter().rev() {
        s0 += e[i];
        for j in 0..p {
            let xij = x.get(i, j);
            s1[j] += xij * e[i];
            s2[j] += xij * xij * e[i];
        }
        s0_at[i] = s0;
        if status[i] {
            for j in 0..p {
                let mean = s1[j] / s0;
                gradient[j] += x.get(i, j) - mean;
                qdiag[j] += s2[j] / s0 - mean * mean;
            }
        }
    }

    // v_l = Σ over events i with t_i ≤ t_l of π_il(1 − π_il)
    let mut weights = vec![0.0; n];
    let (mut a, mut b) = (0.0, 0.0);
    for &l in order {
        if status[l] {
            a += 1.0 / s0_at[l];
            b += 1.0 / (s0_at[l] * s0_at[l]);
        }
        weights[l] = (e[l] * a - e[l] * e[l] * b).max(0.0);
    }
    CoxPieces {
        gradient,
        qdiag,
        weights,
    }
}

/// Quadratic model of the negative log partial likelihood at `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxQuadratic {
    /// `∇ log L(β)`
    pub gradient: Vec<f64>,
    /// Diagonal of `Q = −∇² log L(β)`.
    pub qdiag: Vec<f64>,
    /// Diagonal of the Hessian in the linear predictor.
    pub weights: Vec<f64>,
    /// Column scales `D` with `diag(D Xᵀ W X D) = diag(Q)`.
    pub scale: Vec<f64>,
}

pub fn cox_quadratic(x: &Matrix, data: &CoxData, beta: &[f64]) -> Result<CoxQuadratic> {
    if data.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "survival records",
            expected: x.nrows(),
            found: data.len(),
        });
    }
    if beta.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: x.ncols(),
            found: beta.len(),
        });
    }
    let pieces = cox_pieces(x, data, beta);
    let scale = (0..x.ncols())
        .map(|j| {
            let denom: f64 = x
                .col(j)
                .iter()
                .zip(&pieces.weights)
                .map(|(xij, v)| v * xij * xij)
                .sum();
            if denom > 0.0 && pieces.qdiag[j] > 0.0 {
                libm::sqrt(pieces.qdiag[j] / denom)
            } else {
                1.0
            }
        })
        .collect();
    Ok(CoxQuadratic {
        gradient: pieces.gradient,
        qdiag: pieces.qdiag,
        weights: pieces.weights,
        scale,
    })
}

/// The squared-error problem solved at one IRWLS step from `beta`.
///
/// Logistic: rows weighted by `v`, response `z`. Cox: design
/// `A = W^½ X D`, response `Aβ` and linear term `∇ log L(β)`, so that the
/// working objective is `½‖A(β' − β)‖² − ∇ log L(β)ᵀβ'` plus penalties.
pub fn working_problem(
    problem: &FusedProblem,
    beta: &[f64],
    config: &IrwlsConfig,
) -> Result<LeastSquares> {
    match problem.response() {
        Response::Continuous(_) => problem.least_squares(),
        Response::Binary(y) => {
            let (z, v) = logistic_working_response(problem.x(), y, beta, config.prob_clamp);
            FusedProblem::squared(
                problem.x().clone(),
                z,
                problem.graph().clone(),
                problem.lambda1(),
                problem.lambda2(),
            )?
            .with_obs_weights(v)?
            .least_squares()
        }
        Response::Survival(data) => {
            let q = cox_quadratic(problem.x(), data, beta)?;
            let x = problem.x();
            let root: Vec<f64> = q.weights.iter().map(|v| libm::sqrt(*v)).collect();
            let columns: Vec<Vec<f64>> = (0..x.ncols())
                .map(|j| {
                    x.col(j)
                        .iter()
                        .zip(&root)
                        .map(|(xij, r)| xij * r * q.scale[j])
                        .collect()
                })
                .collect();
            let a = Matrix::from_columns(x.nrows(), &columns)?;
            let target = a.mul_vec(beta);
            LeastSquares::new(
                a,
                target,
                Some(q.gradient),
                problem.graph().clone(),
                problem.lambda1(),
                problem.lambda2(),
            )
        }
    }
}

/// Gradient of the data-fit term at `beta`.
pub fn loss_gradient(problem: &FusedProblem, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != problem.p() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: problem.p(),
            found: beta.len(),
        });
    }
    match problem.response() {
        Response::Continuous(_) => Ok(problem.least_squares()?.smooth_gradient(beta)),
        Response::Binary(y) => {
            let eta = problem.x().mul_vec(beta);
            let r: Vec<f64> = eta.iter().zip(y).map(|(e, yi)| sigmoid(*e) - yi).collect();
            Ok(problem.x().tr_mul_vec(&r))
        }
        Response::Survival(data) => Ok(cox_gradient(problem.x(), data, beta)
            .into_iter()
            .map(|g| -g)
            .collect()),
    }
}

/// Fits a logistic or Cox problem by repeated squared-error solves.
///
/// A step that increases the exact penalized loss is rejected and the fit
/// is flagged as not converged.
pub fn fit_glm(problem: &FusedProblem, beta0: Option<&[f64]>, config: &SolverConfig) -> Result<Solution> {
    let irwls = &config.irwls;
    irwls.validate()?;
    let p = problem.p();
    let mut beta = match beta0 {
        Some(b) => b.to_vec(),
        None => vec![0.0; p],
    };
    let mut objective = loss_value(problem, &beta)?;
    let mut sweeps = 0;
    let mut converged = false;
    for _ in 0..irwls.max_outer {
        let ls = working_problem(problem, &beta, irwls)?;
        let inner = solve_least_squares(&ls, &beta, config)?;
        sweeps += inner.iterations;
        let next = loss_value(problem, &inner.beta)?;
        if next > objective + 1e-12 * (1.0 + objective.abs()) {
            break;
        }
        let change = (objective - next).abs() / objective.abs().max(1.0);
        beta = inner.beta;
        objective = next;
        if change < irwls.tol {
            converged = true;
            break;
        }
    }
    Ok(Solution {
        beta,
        objective,
        iterations: sweeps,
        converged,
        certificate: None,
    })
}
