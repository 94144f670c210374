//! One entry point over all losses and solvers.

use core::fmt;
use core::str::FromStr;

use alloc::vec;

use crate::coordinate::{run_cd, CdConfig};
use crate::error::{Error, Result};
use crate::fusion::{solve_exact_traced, ExactConfig};
use crate::glm::{fit_glm, IrwlsConfig};
use crate::huber::{solve_huber_ls, HuberConfig};
use crate::model::{FusedProblem, LeastSquares, Loss, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverKind {
    /// Coordinate descent with fusion and max-flow splits.
    #[default]
    Exact,
    /// Plain coordinate descent.
    Naive,
    /// Coordinate descent with fusion and smoothed un-sticking passes.
    Huber,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Exact, SolverKind::Naive, SolverKind::Huber];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Naive => "naive",
            SolverKind::Huber => "huber",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "naive" => Ok(SolverKind::Naive),
            "huber" => Ok(SolverKind::Huber),
            _ => Err(Error::InvalidParameter {
                name: "solver",
                reason: "expected exact, naive or huber",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub exact: ExactConfig,
    pub naive: CdConfig,
    pub huber: HuberConfig,
    pub irwls: IrwlsConfig,
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        SolverConfig {
            kind,
            ..SolverConfig::default()
        }
    }
}

/// Solves a squared-error working problem with the configured solver.
pub fn solve_least_squares(ls: &LeastSquares, beta0: &[f64], config: &SolverConfig) -> Result<Solution> {
    match config.kind {
        SolverKind::Exact => solve_exact_traced(ls, beta0, &config.exact).map(|(s, _)| s),
        SolverKind::Naive => {
            let out = run_cd(ls, beta0, &config.naive)?;
            Ok(Solution {
                objective: ls.objective(&out.beta),
                beta: out.beta,
                iterations: out.sweeps,
                converged: out.converged,
                certificate: None,
            })
        }
        SolverKind::Huber => solve_huber_ls(ls, beta0, &config.huber),
    }
}

/// Solves `problem` from `beta0` (zero when absent). Logistic and Cox
/// problems go through iteratively reweighted least squares.
pub fn solve(problem: &FusedProblem, beta0: Option<&[f64]>, config: &SolverConfig) -> Result<Solution> {
    if let Some(b) = beta0 {
        if b.len() != problem.p() {
            return Err(Error::DimensionMismatch {
                what: "starting coefficients",
                expected: problem.p(),
                found: b.len(),
            });
        }
    }
    match problem.loss() {
        Loss::Squared => {
            let ls = problem.least_squares()?;
            let zero = vec![0.0; problem.p()];
            solve_least_squares(&ls, beta0.unwrap_or(&zero), config)
        }
        Loss::Logistic | Loss::Cox => fit_glm(problem, beta0, config),
    }
}
