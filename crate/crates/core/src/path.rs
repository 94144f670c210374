//! Regularization paths over exponential (λ₁, λ₂) grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::coordinate::{run_cd, CdConfig};
use crate::error::{Error, Result};
use crate::fusion::{build_partition, collapse, split_with_gradient, partition_gradient};
use crate::fusion::{FusedSets, SplitMode};
use crate::glm::working_problem;
use crate::model::{FusedProblem, LeastSquares};
use crate::solver::{solve, SolverConfig};
use crate::verify;

/// Grid values, both ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

fn exponential(max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 1 {
        return vec![max];
    }
    (0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else {
                let t = (count - 1 - i) as f64 / (count - 1) as f64;
                max * libm::pow(ratio, t)
            }
        })
        .collect()
}

impl PathGrid {
    /// `count` values from `max·ratio` to `max`, equally spaced in logs.
    pub fn exponential(
        lambda1_max: f64,
        lambda2_max: f64,
        n1: usize,
        n2: usize,
        ratio: f64,
    ) -> Result<Self> {
        if !(lambda1_max > 0.0 && lambda1_max.is_finite()) {
            return Err(Error::DegenerateGrid("lambda1 maximum is not positive"));
        }
        if !(lambda2_max > 0.0 && lambda2_max.is_finite()) {
            return Err(Error::DegenerateGrid("lambda2 maximum is not positive"));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::DegenerateGrid("grid needs at least one value per axis"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::DegenerateGrid("ratio must lie in (0, 1)"));
        }
        Ok(PathGrid {
            lambda1: exponential(lambda1_max, n1, ratio),
            lambda2: exponential(lambda2_max, n2, ratio),
        })
    }

    /// 50 values of λ₁ and 20 of λ₂, each spanning four decades.
    pub fn standard(lambda1_max: f64, lambda2_max: f64) -> Result<Self> {
        PathGrid::exponential(lambda1_max, lambda2_max, 50, 20, 1e-4)
    }

    pub fn n1(&self) -> usize {
        self.lambda1.len()
    }

    pub fn n2(&self) -> usize {
        self.lambda2.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Solved,
    /// Not attempted: an earlier cell of the row exceeded the density limit.
    Skipped,
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathCell {
    pub lambda1_index: usize,
    pub lambda2_index: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub certificate_residual: Option<f64>,
    pub seconds: f64,
    pub nonzero: usize,
    pub converged: bool,
    pub status: CellStatus,
}

/// Cells stored row by row: index `λ₂ index · n1 + λ₁ index`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub grid: PathGrid,
    pub cells: Vec<PathCell>,
}

impl PathResult {
    pub fn cell(&self, lambda2_index: usize, lambda1_index: usize) -> &PathCell {
        &self.cells[lambda2_index * self.grid.n1() + lambda1_index]
    }
}

/// Seconds since an arbitrary origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOptions {
    pub solver: SolverConfig,
    /// Skip the rest of a row once more than `stop_factor · n` coefficients
    /// are nonzero; `None` disables the rule.
    pub stop_factor: Option<usize>,
    /// Record the certificate residual of every solved cell.
    pub certify: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            solver: SolverConfig::default(),
            stop_factor: Some(2),
            certify: true,
        }
    }
}

fn null_working_problem(problem: &FusedProblem, solver: &SolverConfig) -> Result<LeastSquares> {
    let zero = vec![0.0; problem.p()];
    working_problem(problem, &zero, &solver.irwls)
}

fn ls_lambda1_max(ls: &LeastSquares) -> f64 {
    let zero = vec![0.0; ls.p()];
    let grad = ls.smooth_gradient(&zero);
    grad.iter()
        .zip(ls.graph().node_weights())
        .fold(0.0f64, |m, (g, w)| m.max(g.abs() / w))
}

/// Smallest λ₁ with the zero vector optimal at λ₂ = 0: `max_k |x_kᵀy| / w_k`.
/// For logistic and Cox losses the gradient of the loss at zero is used.
pub fn lambda1_max(problem: &FusedProblem) -> Result<f64> {
    Ok(ls_lambda1_max(&null_working_problem(problem, &SolverConfig::default())?))
}

/// Per connected component of the graph, the smallest λ₂ at which the
/// fully fused fit with λ₁ = 0 is stable.
pub fn lambda2_max_by_component(problem: &FusedProblem) -> Result<Vec<f64>> {
    let ls = null_working_problem(problem, &SolverConfig::default())?;
    ls_lambda2_max(&ls)
}

/// Largest of [`lambda2_max_by_component`].
pub fn lambda2_max(problem: &FusedProblem) -> Result<f64> {
    Ok(lambda2_max_by_component(problem)?
        .into_iter()
        .fold(0.0, f64::max))
}

pub(crate) fn ls_lambda2_max(ls: &LeastSquares) -> Result<Vec<f64>> {
    let mut ls = ls.clone();
    ls.set_lambdas(0.0, 0.0)?;
    let components = ls.graph().components();
    let fused = FusedSets::new(
        ls.graph(),
        components.clone(),
        vec![crate::fusion::Provenance::Whole; components.len()],
    )?;
    let collapsed = collapse(&ls, &fused)?;
    let cd = CdConfig {
        tol: 1e-13,
        max_sweeps: 1_000_000,
        use_active_set: false,
    };
    let start = vec![0.0; components.len()];
    let theta = run_cd(collapsed.problem(), &start, &cd)?.beta;
    let beta = collapsed.expand(&theta);
    // equal values within each component, so each component is one set
    // unless two components share a value, which does not matter here
    let partition = build_partition(ls.graph(), &beta);
    let grad = partition_gradient(&ls, &beta, &partition);

    let splits = |ls: &LeastSquares, i: usize| -> Result<bool> {
        let mode = if partition.values()[i] != 0.0 {
            SplitMode::Active
        } else {
            SplitMode::Inactive
        };
        Ok(split_with_gradient(ls, &partition, &grad, i, mode)?.is_split())
    };

    let mut out = Vec::with_capacity(partition.len());
    for i in 0..partition.len() {
        let mut probe = ls.clone();
        probe.set_lambdas(0.0, 0.0)?;
        if !splits(&probe, i)? {
            out.push(0.0);
            continue;
        }
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mut hi = scale.max(1e-300);
        loop {
            probe.set_lambdas(0.0, hi)?;
            if !splits(&probe, i)? {
                break;
            }
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        probe.set_lambdas(0.0, lo)?;
        while !splits(&probe, i)? && lo > 1e-300 {
            hi = lo;
            lo /= 2.0;
            probe.set_lambdas(0.0, lo)?;
        }
        while hi / lo > 1.0 + 1e-7 {
            let mid = libm::sqrt(lo * hi);
            probe.set_lambdas(0.0, mid)?;
            if splits(&probe, i)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(hi);
    }
    Ok(out)
}

/// Solves one λ₂ row, λ₁ descending, each cell warm-started from the
/// previous one; the first cell starts from zero.
pub fn run_path_row(
    problem: &FusedProblem,
    grid: &PathGrid,
    lambda2_index: usize,
    options: &PathOptions,
    clock: &dyn Clock,
) -> Result<Vec<PathCell>> {
    let n = problem.n();
    let lambda2 = grid.lambda2[lambda2_index];
    let mut cells: Vec<PathCell> = Vec::with_capacity(grid.n1());
    let mut beta = vec![0.0; problem.p()];
    let mut stopped = false;
    for i1 in (0..grid.n1()).rev() {
        let lambda1 = grid.lambda1[i1];
        let mut cell = PathCell {
            lambda1_index: i1,
            lambda2_index,
            lambda1,
            lambda2,
            beta: None,
            objective: None,
            certificate_residual: None,
            seconds: 0.0,
            nonzero: 0,
            converged: false,
            status: CellStatus::Skipped,
        };
        if !stopped {
            let instance = problem.with_lambdas(lambda1, lambda2)?;
            let t0 = clock.now();
            let result = solve(&instance, Some(&beta), &options.solver);
            cell.seconds = clock.now() - t0;
            match result {
                Ok(sol) => {
                    cell.nonzero = sol.beta.iter().filter(|b| **b != 0.0).count();
                    cell.objective = Some(sol.objective);
                    cell.converged = sol.converged;
                    if options.certify {
                        cell.certificate_residual = match &sol.certificate {
                            Some(c) => Some(c.max_residual),
                            None => verify::problem_certificate(&instance, &sol.beta)
                                .ok()
                                .map(|c| c.max_residual),
                        };
                    }
                    cell.status = CellStatus::Solved;
                    if let Some(f) = options.stop_factor {
                        if cell.nonzero > f * n {
                            stopped = true;
                        }
                    }
                    beta = sol.beta.clone();
                    cell.beta = Some(sol.beta);
                }
                Err(e) => cell.status = CellStatus::Failed(e),
            }
        }
        cells.push(cell);
    }
    cells.reverse();
    Ok(cells)
}

/// Solves every row of `grid` in order.
pub fn run_path(
    problem: &FusedProblem,
    grid: &PathGrid,
    options: &PathOptions,
    clock: &dyn Clock,
) -> Result<PathResult> {
    let mut cells = Vec::with_capacity(grid.n1() * grid.n2());
    for i2 in 0..grid.n2() {
        cells.extend(run_path_row(problem, grid, i2, options, clock)?);
    }
    Ok(PathResult {
        grid: grid.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::PenaltyGraph;

    fn toy() -> FusedProblem {
        FusedProblem::squared(Matrix::identity(2), vec![2.0, 0.0], PenaltyGraph::chain(2), 0.0, 0.0)
            .unwrap()
    }

    #[test]
    fn lambda_max_toy() {
        assert_eq!(lambda1_max(&toy()).unwrap(), 2.0);
        let l2 = lambda2_max(&toy()).unwrap();
        assert!((l2 - 1.0).abs() < 1e-6, "{l2}");
    }

    #[test]
    fn zero_response() {
        let p = FusedProblem::squared(Matrix::identity(3), vec![0.0; 3], PenaltyGraph::chain(3), 0.0, 0.0)
            .unwrap();
        assert_eq!(lambda1_max(&p).unwrap(), 0.0);
        assert_eq!(lambda2_max(&p).unwrap(), 0.0);
        let c = FusedProblem::squared(Matrix::identity(3), vec![1.5; 3], PenaltyGraph::chain(3), 0.0, 0.0)
            .unwrap();
        assert_eq!(lambda2_max(&c).unwrap(), 0.0);
    }

    #[test]
    fn grid_shape() {
        let g = PathGrid::standard(2.0, 1.0).unwrap();
        assert_eq!((g.n1(), g.n2()), (50, 20));
        assert_eq!(g.lambda1[49], 2.0);
        assert!((g.lambda1[0] / g.lambda1[49] - 1e-4).abs() < 1e-15);
        let r = g.lambda1[1] / g.lambda1[0];
        for w in g.lambda1.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        assert!(PathGrid::standard(0.0, 1.0).is_err());
    }

    #[test]
    fn top_cell_is_null() {
        let p = toy();
        let grid = PathGrid::exponential(2.0, 1.0, 3, 2, 1e-2).unwrap();
        let res = run_path(&p, &grid, &PathOptions::default(), &NoClock).unwrap();
        for i2 in 0..2 {
            let cell = res.cell(i2, 2);
            assert_eq!(cell.nonzero, 0);
            assert_eq!(cell.beta.as_deref(), Some(&[0.0, 0.0][..]));
        }
    }
}
