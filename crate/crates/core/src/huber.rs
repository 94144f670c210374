//! Approximate solver: Huber-smoothed difference penalties used to get the
//! coordinate-wise algorithm unstuck.

use alloc::vec::Vec;

use crate::coordinate::{run_cd, CdConfig};
use crate::error::{Error, Result};
use crate::fusion::{build_partition, collapse, FusedSets};
use crate::matrix::{axpy, dot};
use crate::model::{FusedProblem, LeastSquares, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct HuberConfig {
    /// Smoothing parameter; the quadratic zone is `|x| ≤ 1/m`.
    pub m: f64,
    /// Maximum smoothed sweeps per un-sticking attempt.
    pub k: usize,
    /// Stop once a stuck point moves less than this in L1 norm.
    pub epsilon: f64,
    pub cd: CdConfig,
    /// Cap on collapse/solve rounds.
    pub max_rounds: usize,
}

impl Default for HuberConfig {
    fn default() -> Self {
        HuberConfig {
            m: 1000.0,
            k: 100,
            epsilon: 1e-6,
            cd: CdConfig::default(),
            max_rounds: 500,
        }
    }
}

impl HuberConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be positive",
            });
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be at least 1",
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be positive",
            });
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidParameter {
                name: "max_rounds",
                reason: "must be at least 1",
            });
        }
        self.cd.validate()
    }
}

/// `p_M(x)`: `(M/2)x²` for `|x| ≤ 1/M`, otherwise `|x| − 1/(2M)`.
pub fn huber_penalty(x: f64, m: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 / m {
        0.5 * m * x * x
    } else {
        ax - 0.5 / m
    }
}

/// `p_M'(x)`, i.e. `Mx` clamped to `[−1, 1]`.
pub fn huber_derivative(x: f64, m: f64) -> f64 {
    (m * x).clamp(-1.0, 1.0)
}

/// The objective with every difference penalty smoothed by `p_M`.
pub fn huber_objective(ls: &LeastSquares, beta: &[f64], m: f64) -> f64 {
    let graph = ls.graph();
    let l1: f64 = beta
        .iter()
        .zip(graph.node_weights())
        .map(|(b, w)| w * b.abs())
        .sum();
    let l2: f64 = graph
        .edges()
        .iter()
        .map(|&(k, l, w)| w * huber_penalty(beta[k] - beta[l], m))
        .sum();
    ls.smooth_value(beta) + ls.lambda1() * l1 + ls.lambda2() * l2
}

/// Root of the continuous increasing function
/// `a(β − b) + shift + Σ_i d_i·clamp(M(β − c_i), −1, 1)`.
fn smooth_root(a: f64, b: f64, shift: f64, terms: &[(f64, f64)], m: f64) -> f64 {
    let f = |x: f64| {
        a * (x - b)
            + shift
            + terms
                .iter()
                .map(|(c, d)| d * huber_derivative(x - c, m))
                .sum::<f64>()
    };
    let mut knots: Vec<f64> = terms
        .iter()
        .flat_map(|(c, _)| [c - 1.0 / m, c + 1.0 / m])
        .collect();
    if knots.is_empty() {
        return b - shift / a;
    }
    knots.sort_by(f64::total_cmp);
    let values: Vec<f64> = knots.iter().map(|&x| f(x)).collect();
    let i = values.partition_point(|&v| v < 0.0);
    if i == 0 {
        // every term saturated at −1 to the left of the first knot
        knots[0] - values[0] / a
    } else if i == knots.len() {
        knots[i - 1] - values[i - 1] / a
    } else {
        let (x0, x1, f0, f1) = (knots[i - 1], knots[i], values[i - 1], values[i]);
        if f1 == f0 {
            x0
        } else {
            x0 - f0 * (x1 - x0) / (f1 - f0)
        }
    }
}

/// Up to `config.k` sweeps of exact coordinate minimization of the smoothed
/// objective, stopping early once a sweep moves no coefficient by more than
/// `config.cd.tol`.
pub fn huber_cd_sweeps(ls: &LeastSquares, beta: &[f64], config: &HuberConfig) -> Result<Vec<f64>> {
    config.validate()?;
    if beta.len() != ls.p() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: ls.p(),
            found: beta.len(),
        });
    }
    if let Some(k) = ls.col_sq_norms().iter().position(|a| *a <= 0.0) {
        return Err(Error::ZeroColumn(k));
    }
    let mut beta = beta.to_vec();
    let mut resid = ls.residual(&beta);
    let graph = ls.graph();
    let m = config.m;
    let mut terms = Vec::new();
    for _ in 0..config.k {
        let mut max_change: f64 = 0.0;
        for k in 0..ls.p() {
            let a = ls.col_sq_norms()[k];
            let grad = -dot(ls.x().col(k), &resid) - ls.linear_at(k);
            let b = beta[k] - grad / a;
            terms.clear();
            if ls.lambda2() > 0.0 {
                for nb in graph.neighbors(k) {
                    terms.push((beta[nb.node], ls.lambda2() * nb.weight));
                }
            }
            let c = ls.lambda1() * graph.node_weight(k);
            let at_zero = a * (0.0 - b)
                + terms
                    .iter()
                    .map(|(v, d)| d * huber_derivative(-v, m))
                    .sum::<f64>();
            let new = if at_zero + c < 0.0 {
                smooth_root(a, b, c, &terms, m).max(0.0)
            } else if at_zero - c > 0.0 {
                smooth_root(a, b, -c, &terms, m).min(0.0)
            } else {
                0.0
            };
            let delta = new - beta[k];
            if delta != 0.0 {
                axpy(-delta, ls.x().col(k), &mut resid);
                beta[k] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < config.cd.tol {
            break;
        }
    }
    Ok(beta)
}

/// Approximate solver for a squared-error problem.
pub fn solve_huber(problem: &FusedProblem, beta0: &[f64], config: &HuberConfig) -> Result<Solution> {
    let ls = problem.least_squares()?;
    solve_huber_ls(&ls, beta0, config)
}

/// Approximate solver on the working form.
///
/// Alternates coordinate passes on the collapsed problem with fusing. When
/// fusing no longer changes the sets, the point is stuck; a burst of
/// smoothed sweeps on the full problem follows. The run ends when a stuck
/// point lies within `epsilon` (L1) of the previous stuck point. The best
/// stuck point by exact objective is returned.
pub fn solve_huber_ls(ls: &LeastSquares, beta0: &[f64], config: &HuberConfig) -> Result<Solution> {
    config.validate()?;
    let p = ls.p();
    if beta0.len() != p {
        return Err(Error::DimensionMismatch {
            what: "starting coefficients",
            expected: p,
            found: beta0.len(),
        });
    }
    let mut beta = beta0.to_vec();
    let mut sets = FusedSets::singletons(p);
    let mut saved: Option<Vec<f64>> = None;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut sweeps = 0;
    let mut converged = false;
    for _ in 0..config.max_rounds {
        let collapsed = collapse(ls, &sets)?;
        let out = run_cd(collapsed.problem(), &collapsed.restrict(&beta), &config.cd)?;
        sweeps += out.sweeps;
        let partition = build_partition(ls.graph(), &collapsed.expand(&out.beta));
        beta = partition.snapped();
        let fused = FusedSets::from_partition(&partition);
        if fused != sets {
            sets = fused;
            continue;
        }
        let objective = ls.objective(&beta);
        if best.as_ref().map_or(true, |(g, _)| objective < *g) {
            best = Some((objective, beta.clone()));
        }
        if let Some(prev) = &saved {
            let moved: f64 = prev.iter().zip(&beta).map(|(a, b)| (a - b).abs()).sum();
            if moved < config.epsilon {
                converged = true;
                break;
            }
        }
        saved = Some(beta.clone());
        beta = huber_cd_sweeps(ls, &beta, config)?;
        sweeps += config.k;
        sets = FusedSets::from_partition(&build_partition(ls.graph(), &beta));
    }
    let beta = match best {
        Some((_, b)) => b,
        None => beta,
    };
    Ok(Solution {
        objective: ls.objective(&beta),
        beta,
        iterations: sweeps,
        converged,
        certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::PenaltyGraph;
    use proptest::prelude::*;

    fn toy(lambda1: f64, lambda2: f64) -> LeastSquares {
        LeastSquares::new(
            Matrix::identity(2),
            alloc::vec![2.0, 0.0],
            None,
            PenaltyGraph::chain(2),
            lambda1,
            lambda2,
        )
        .unwrap()
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(huber_penalty(0.0, 1000.0), 0.0);
        let m = 1000.0;
        assert!((huber_penalty(1.0 / m, m) - 0.5 / m).abs() < 1e-18);
        assert!((huber_penalty(2.0, 1000.0) - 1.9995).abs() < 1e-15);
    }

    #[test]
    fn smooth_root_matches_bisection() {
        let terms = [(0.3, 2.0), (0.301, 1.0), (-1.0, 0.5)];
        for (a, b, shift) in [(1.0, 0.0, 0.2), (0.2, 5.0, -1.0), (3.0, 0.3, 0.0)] {
            let m = 1000.0;
            let f = |x: f64| {
                a * (x - b) + shift + terms.iter().map(|(c, d)| d * huber_derivative(x - c, m)).sum::<f64>()
            };
            let (mut lo, mut hi) = (-100.0, 100.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let got = smooth_root(a, b, shift, &terms, m);
            assert!((got - lo).abs() < 1e-10, "{got} vs {lo}");
        }
    }

    #[test]
    fn zero_lambda2_is_lasso_sweep() {
        let x = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0], [2.0, -1.0]]).unwrap();
        let ls = LeastSquares::new(x, alloc::vec![1.0, -2.0, 0.5], None, PenaltyGraph::chain(2), 0.3, 0.0)
            .unwrap();
        let cfg = HuberConfig::default();
        let smooth = huber_cd_sweeps(&ls, &[0.0, 0.0], &cfg).unwrap();
        let exact = run_cd(&ls, &[0.0, 0.0], &CdConfig { use_active_set: false, ..CdConfig::default() })
            .unwrap();
        for (a, b) in smooth.iter().zip(&exact.beta) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn sweeps_unstick_toy() {
        let ls = toy(0.0, 2.0);
        let cfg = HuberConfig::default();
        let moved = huber_cd_sweeps(&ls, &[0.0, 0.0], &cfg).unwrap();
        // each sweep drifts the fused pair by about 1/M
        assert!(moved[0] > 0.05 && moved[1] > 0.05);
        assert!((moved[0] - moved[1]).abs() < 1e-2);
        assert!(ls.objective(&moved) < ls.objective(&[0.0, 0.0]));
    }

    #[test]
    fn solve_huber_on_stall_instance() {
        let sol = solve_huber_ls(&toy(0.0, 2.0), &[0.0, 0.0], &HuberConfig::default()).unwrap();
        assert!(sol.objective <= 1.0 + 1e-3);
        assert!(sol.converged);
    }

    proptest! {
        #[test]
        fn smoothing_gap(x in -10.0f64..10.0, m in 0.1f64..1e6) {
            let h = huber_penalty(x, m);
            prop_assert!(h <= x.abs() + 1e-15);
            prop_assert!(x.abs() - h <= 0.5 / m + 1e-12);
            prop_assert!(h >= 0.0);
        }
    }
}
