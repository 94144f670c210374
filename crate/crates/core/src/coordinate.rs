//! Naive coordinate-wise minimization with active-set management.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot};
use crate::model::{FusedProblem, LeastSquares, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct CdConfig {
    /// Stop when the largest coordinate change in a sweep is below this.
    pub tol: f64,
    /// Cap on the total number of sweeps of one run.
    pub max_sweeps: usize,
    /// When false every coordinate is swept from the start.
    pub use_active_set: bool,
}

impl Default for CdConfig {
    fn default() -> Self {
        CdConfig {
            tol: 1e-10,
            max_sweeps: 1_000_000,
            use_active_set: true,
        }
    }
}

impl CdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: "must be positive",
            });
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter {
                name: "max_sweeps",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// The set 𝒜 of coordinates visited by the inner sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    member: Vec<bool>,
    list: Vec<usize>,
    /// Whether the last expansion added a coordinate.
    pub dirty: bool,
}

impl ActiveSet {
    /// `{k : β_k ≠ 0}`
    pub fn from_support(beta: &[f64]) -> Self {
        let member: Vec<bool> = beta.iter().map(|b| *b != 0.0).collect();
        let list = (0..beta.len()).filter(|&k| member[k]).collect();
        ActiveSet {
            member,
            list,
            dirty: false,
        }
    }

    pub fn full(p: usize) -> Self {
        ActiveSet {
            member: vec![true; p],
            list: (0..p).collect(),
            dirty: false,
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.member[k]
    }

    /// Members in ascending order.
    pub fn members(&self) -> &[usize] {
        &self.list
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    fn extend(&mut self, new: &[usize]) {
        self.dirty = !new.is_empty();
        for &k in new {
            self.member[k] = true;
        }
        if self.dirty {
            self.list = (0..self.member.len()).filter(|&k| self.member[k]).collect();
        }
    }
}

/// A single coordinate update `β_k: from → to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub coordinate: usize,
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdOutcome {
    pub beta: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Minimizes `½a(β − b)² + Σ_i d_i |β − c_i|` over β.
///
/// `kinks` holds `(c_i, d_i)` with `d_i > 0`; it is sorted and coincident
/// breakpoints are merged in place. The derivative is an increasing step
/// function, so the minimizer is either the root of one linear piece or a
/// breakpoint whose left and right limits bracket zero. A breakpoint answer
/// is returned bit-exactly.
pub fn minimize_piecewise(a: f64, b: f64, kinks: &mut Vec<(f64, f64)>) -> f64 {
    debug_assert!(a > 0.0);
    kinks.retain(|k| k.1 > 0.0);
    if kinks.is_empty() {
        return b;
    }
    kinks.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut w = 0;
    for r in 1..kinks.len() {
        if kinks[r].0 == kinks[w].0 {
            kinks[w].1 += kinks[r].1;
        } else {
            w += 1;
            kinks[w] = kinks[r];
        }
    }
    kinks.truncate(w + 1);

    let total: f64 = kinks.iter().map(|k| k.1).sum();
    let m = kinks.len();
    // prefix[j] = sum of the first j jump weights
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    for k in kinks.iter() {
        let last = *prefix.last().unwrap();
        prefix.push(last + k.1);
    }
    // On the piece right of the first j breakpoints the derivative is
    // a(β − b) + D_j with D_j = 2·prefix[j] − total.
    let root = |j: usize| b - (2.0 * prefix[j] - total) / a;
    let j = (0..m).collect::<Vec<_>>().partition_point(|&j| root(j) > kinks[j].0);
    let candidate = root(j);
    if j > 0 && candidate <= kinks[j - 1].0 {
        kinks[j - 1].0
    } else {
        candidate
    }
}

/// Working state of one coordinate-descent run: coefficients plus the
/// residual `y − Xβ`.
pub(crate) struct CdState<'a> {
    ls: &'a LeastSquares,
    pub(crate) beta: Vec<f64>,
    resid: Vec<f64>,
    kinks: Vec<(f64, f64)>,
}

impl<'a> CdState<'a> {
    pub(crate) fn new(ls: &'a LeastSquares, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != ls.p() {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: ls.p(),
                found: beta.len(),
            });
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        if let Some(k) = ls.col_sq_norms().iter().position(|a| *a <= 0.0) {
            return Err(Error::ZeroColumn(k));
        }
        let resid = ls.residual(&beta);
        Ok(CdState {
            ls,
            beta,
            resid,
            kinks: Vec::new(),
        })
    }

    pub(crate) fn refresh_residual(&mut self) {
        self.resid = self.ls.residual(&self.beta);
    }

    /// Exact minimizer of the objective over coordinate `k`.
    pub(crate) fn target(&mut self, k: usize) -> f64 {
        let ls = self.ls;
        let a = ls.col_sq_norms()[k];
        let grad = -dot(ls.x().col(k), &self.resid) - ls.linear_at(k);
        let b = self.beta[k] - grad / a;
        self.kinks.clear();
        let l1 = ls.lambda1() * ls.graph().node_weight(k);
        if l1 > 0.0 {
            self.kinks.push((0.0, l1));
        }
        if ls.lambda2() > 0.0 {
            for nb in ls.graph().neighbors(k) {
                self.kinks.push((self.beta[nb.node], ls.lambda2() * nb.weight));
            }
        }
        minimize_piecewise(a, b, &mut self.kinks)
    }

    pub(crate) fn set(&mut self, k: usize, value: f64) {
        let delta = value - self.beta[k];
        if delta != 0.0 {
            axpy(-delta, self.ls.x().col(k), &mut self.resid);
            self.beta[k] = value;
        }
    }

    /// One ascending pass over `coords`; returns the largest change.
    fn sweep(&mut self, coords: &[usize], observer: &mut dyn FnMut(Move)) -> f64 {
        let mut max_change: f64 = 0.0;
        for &k in coords {
            let from = self.beta[k];
            let to = self.target(k);
            if to != from {
                self.set(k, to);
                observer(Move {
                    coordinate: k,
                    from,
                    to,
                });
                max_change = max_change.max((to - from).abs());
            }
        }
        max_change
    }
}

/// Exact minimizer of `problem`'s objective over coordinate `k` with the
/// other coefficients held at `beta`.
pub fn coordinate_minimize(ls: &LeastSquares, beta: &[f64], k: usize) -> Result<f64> {
    if k >= ls.p() {
        return Err(Error::DimensionMismatch {
            what: "coordinate index",
            expected: ls.p(),
            found: k,
        });
    }
    if ls.col_sq_norms()[k] <= 0.0 {
        return Err(Error::ZeroColumn(k));
    }
    let mut state = CdState::new(ls, beta.to_vec())?;
    Ok(state.target(k))
}

/// Runs the coordinate-wise algorithm on the working form.
pub fn run_cd(ls: &LeastSquares, beta0: &[f64], config: &CdConfig) -> Result<CdOutcome> {
    run_cd_observed(ls, beta0, config, &mut |_| {})
}

/// As [`run_cd`], reporting every coordinate move to `observer`.
pub fn run_cd_observed(
    ls: &LeastSquares,
    beta0: &[f64],
    config: &CdConfig,
    observer: &mut dyn FnMut(Move),
) -> Result<CdOutcome> {
    config.validate()?;
    let mut state = CdState::new(ls, beta0.to_vec())?;
    let sweeps = cd_loop(&mut state, config, observer);
    let converged = sweeps.1;
    Ok(CdOutcome {
        beta: state.beta,
        sweeps: sweeps.0,
        converged,
    })
}

/// Returns `(sweeps, converged)`.
pub(crate) fn cd_loop(
    state: &mut CdState<'_>,
    config: &CdConfig,
    observer: &mut dyn FnMut(Move),
) -> (usize, bool) {
    let p = state.beta.len();
    let mut active = if config.use_active_set {
        ActiveSet::from_support(&state.beta)
    } else {
        ActiveSet::full(p)
    };
    let mut sweeps = 0;
    loop {
        state.refresh_residual();
        loop {
            if sweeps >= config.max_sweeps {
                return (sweeps, false);
            }
            let change = state.sweep(active.members(), observer);
            sweeps += 1;
            if change < config.tol {
                break;
            }
        }
        if active.len() == p {
            return (sweeps, true);
        }
        // Non-members are still at zero: they have never been visited.
        let grow: Vec<usize> = (0..p)
            .filter(|&k| !active.contains(k))
            .filter(|&k| state.target(k) != 0.0)
            .collect();
        active.extend(&grow);
        if !active.dirty {
            return (sweeps, true);
        }
    }
}

/// Naive coordinate-wise algorithm for a squared-error problem.
pub fn naive_cd(problem: &FusedProblem, beta0: &[f64], config: &CdConfig) -> Result<Solution> {
    let ls = problem.least_squares()?;
    let out = run_cd(&ls, beta0, config)?;
    Ok(Solution {
        objective: ls.objective(&out.beta),
        beta: out.beta,
        iterations: out.sweeps,
        converged: out.converged,
        certificate: None,
    })
}
