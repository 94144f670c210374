#![allow(dead_code)]

use fusedlasso_core::{FusedProblem, Matrix, PenaltyGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const LAMBDAS: [f64; 4] = [0.0, 0.1, 1.0, 5.0];

/// Random connected graph on `p` nodes: a random spanning tree plus extra
/// edges, at most `2p` in total.
pub fn random_graph(rng: &mut ChaCha8Rng, p: usize) -> PenaltyGraph {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for k in 1..p {
        let l = rng.random_range(0..k);
        edges.push((l, k, rng.random_range(0.5..2.0)));
    }
    let extra = rng.random_range(0..=p + 1);
    for _ in 0..extra {
        let a = rng.random_range(0..p);
        let b = rng.random_range(0..p);
        let (k, l) = (a.min(b), a.max(b));
        if k != l && !edges.iter().any(|e| e.0 == k && e.1 == l) {
            edges.push((k, l, rng.random_range(0.5..2.0)));
        }
    }
    PenaltyGraph::new(vec![1.0; p], edges).unwrap()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    let data = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Matrix::from_col_major(n, p, data).unwrap()
}

/// A squared-error instance with `n ∈ [5, 15]`, `p ∈ [2, 10]` and λ values
/// drawn from [`LAMBDAS`].
pub fn random_problem(seed: u64) -> FusedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..=15);
    let p = rng.random_range(2..=10);
    random_problem_sized(&mut rng, n, p)
}

pub fn random_problem_sized(rng: &mut ChaCha8Rng, n: usize, p: usize) -> FusedProblem {
    let x = gaussian_matrix(rng, n, p);
    let graph = random_graph(rng, p);
    let mut beta = vec![0.0; p];
    for b in beta.iter_mut() {
        if rng.random_bool(0.6) {
            *b = rng.random_range(-2i32..=2) as f64;
        }
    }
    let mut y = x.mul_vec(&beta);
    for v in y.iter_mut() {
        *v += rng.sample::<f64, _>(StandardNormal);
    }
    let l1 = LAMBDAS[rng.random_range(0..4)];
    let l2 = LAMBDAS[rng.random_range(0..4)];
    FusedProblem::squared(x, y, graph, l1, l2).unwrap()
}

/// Same as [`random_problem`] but with `n ≥ p + 3`, so the quadratic term
/// is strictly convex almost surely.
pub fn strictly_convex_problem(seed: u64) -> FusedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p = rng.random_range(2..=8);
    let n = rng.random_range(p + 3..=p + 10);
    random_problem_sized(&mut rng, n, p)
}

pub fn toy(lambda1: f64, lambda2: f64) -> FusedProblem {
    FusedProblem::squared(
        Matrix::identity(2),
        vec![2.0, 0.0],
        PenaltyGraph::chain(2),
        lambda1,
        lambda2,
    )
    .unwrap()
}
