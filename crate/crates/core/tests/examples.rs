mod common;

use common::toy;
use fusedlasso_core::coordinate::{naive_cd, CdConfig};
use fusedlasso_core::fusion::{solve_exact, ExactConfig};
use fusedlasso_core::huber::{solve_huber, HuberConfig};
use fusedlasso_core::model::loss_value;
use fusedlasso_core::path::{
    lambda1_max, lambda2_max, run_path, CellStatus, NoClock, PathGrid, PathOptions,
};
use fusedlasso_core::verify::{
    accuracy_report, check_optimality, smoothed_oracle, OracleConfig,
};
use fusedlasso_core::{FusedProblem, Matrix, PenaltyGraph, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn naive_stalls_where_exact_and_huber_do_not() {
    let problem = toy(0.0, 2.0);
    let naive = naive_cd(&problem, &[0.0, 0.0], &CdConfig::default()).unwrap();
    assert!((naive.objective - 2.0).abs() <= 1e-9);
    let exact = solve_exact(&problem, &[0.0, 0.0], &ExactConfig::default()).unwrap();
    assert!((exact.objective - 1.0).abs() <= 1e-9);
    assert_eq!(exact.beta, vec![1.0, 1.0]);
    let huber = solve_huber(&problem, &[0.0, 0.0], &HuberConfig::default()).unwrap();
    assert!(huber.objective <= 1.0 + 1e-3);
}

#[test]
fn oracle_on_hand_solved_instances() {
    let cfg = OracleConfig::default();
    let apart = smoothed_oracle(&toy(0.0, 0.5), &cfg).unwrap();
    assert!((apart.beta[0] - 1.5).abs() < 1e-6 && (apart.beta[1] - 0.5).abs() < 1e-6);
    assert!((apart.objective - 0.75).abs() <= apart.certified_gap + 1e-9);

    let fused = smoothed_oracle(&toy(0.0, 2.0), &cfg).unwrap();
    assert!((fused.objective - 1.0).abs() <= fused.certified_gap + 1e-9);

    let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]]).unwrap();
    let plain = FusedProblem::squared(x, vec![1.0, 2.0, 3.0], PenaltyGraph::chain(2), 0.0, 0.0)
        .unwrap();
    let ls = smoothed_oracle(&plain, &cfg).unwrap();
    // normal equations [[2,1],[1,5]]β = [3,8]
    assert!((ls.beta[0] - 7.0 / 9.0).abs() < 1e-9 && (ls.beta[1] - 13.0 / 9.0).abs() < 1e-9);
    assert!(ls.certified_gap < 1e-9);
}

#[test]
fn null_model_certificate_is_the_scaled_correlation() {
    let x = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0], [2.0, -1.0]]).unwrap();
    let y = vec![1.0, -2.0, 0.5];
    // x₁ᵀy = 2, x₂ᵀy = −2
    let problem = FusedProblem::squared(x, y, PenaltyGraph::chain(2), 4.0, 0.0).unwrap();
    let verdict = check_optimality(&problem, &[0.0, 0.0], 1e-9).unwrap();
    assert!(verdict.is_certified());
    let s = &verdict.certificate().s;
    assert!((s[0] - 0.5).abs() < 1e-9 && (s[1] + 0.5).abs() < 1e-9, "{s:?}");
}

#[test]
fn lambda_max_brackets_the_null_and_fused_solutions() {
    for seed in 0..20u64 {
        let base = common::random_problem(seed);
        let zero = vec![0.0; base.p()];
        let cfg = ExactConfig::default();

        let l1 = lambda1_max(&base).unwrap();
        let at = solve_exact(&base.with_lambdas(l1, 0.0).unwrap(), &zero, &cfg).unwrap();
        assert!(at.beta.iter().all(|b| *b == 0.0), "seed {seed}: {:?}", at.beta);
        let below = solve_exact(&base.with_lambdas(0.9 * l1, 0.0).unwrap(), &zero, &cfg).unwrap();
        assert!(below.beta.iter().any(|b| *b != 0.0), "seed {seed}");

        let l2 = lambda2_max(&base).unwrap();
        let fused = solve_exact(&base.with_lambdas(0.0, l2 * 1.001).unwrap(), &zero, &cfg).unwrap();
        assert!(fused.beta.iter().all(|b| *b == fused.beta[0]), "seed {seed}: {:?}", fused.beta);
        let loose = solve_exact(&base.with_lambdas(0.0, l2 * 0.95).unwrap(), &zero, &cfg).unwrap();
        assert!(loose.beta.iter().any(|b| *b != loose.beta[0]), "seed {seed}");
    }
}

#[test]
fn toy_path_matches_cold_starts_cell_by_cell() {
    let problem = toy(0.0, 0.0);
    let grid = PathGrid::standard(lambda1_max(&problem).unwrap(), lambda2_max(&problem).unwrap())
        .unwrap();
    let path = run_path(&problem, &grid, &PathOptions::default(), &NoClock).unwrap();
    assert_eq!(path.cells.len(), 1000);
    let cfg = ExactConfig::default();
    for cell in &path.cells {
        let inst = problem.with_lambdas(cell.lambda1, cell.lambda2).unwrap();
        let cold = solve_exact(&inst, &[0.0, 0.0], &cfg).unwrap();
        let warm = cell.objective.unwrap();
        assert!((warm - cold.objective).abs() <= 1e-8, "{cell:?}");
    }
}

#[test]
fn dense_solutions_stop_the_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, p) = (5, 100);
    let x = common::gaussian_matrix(&mut rng, n, p);
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let problem = FusedProblem::squared(x, y, PenaltyGraph::chain(p), 0.0, 0.0).unwrap();
    let grid = PathGrid::exponential(lambda1_max(&problem).unwrap(), 1e-3, 20, 1, 1e-4).unwrap();
    let path = run_path(&problem, &grid, &PathOptions::default(), &NoClock).unwrap();
    let row = &path.cells;
    let first_skip = row.iter().rposition(|c| c.status == CellStatus::Skipped);
    let Some(last_skipped) = first_skip else {
        panic!("no cell skipped: {:?}", row.iter().map(|c| c.nonzero).collect::<Vec<_>>());
    };
    let trigger = &row[last_skipped + 1];
    assert!(trigger.nonzero > 2 * n);
    assert!(row[..=last_skipped].iter().all(|c| c.status == CellStatus::Skipped && c.beta.is_none()));
    assert_eq!(row[19].nonzero, 0);
}

#[test]
fn null_boundary_is_exactly_zero() {
    let problem = common::random_problem(3);
    let l1 = lambda1_max(&problem).unwrap();
    for scale in [1.0, 1.5, 10.0] {
        let inst = problem.with_lambdas(l1 * scale, 0.0).unwrap();
        let sol = fusedlasso_core::solve(&inst, None, &SolverConfig::default()).unwrap();
        assert!(sol.beta.iter().all(|b| *b == 0.0));
    }
}

#[test]
fn accuracy_report_examples() {
    let problem = toy(0.0, 0.0);
    let grid = PathGrid::exponential(2.0, 1.0, 3, 2, 0.1).unwrap();
    let reference = run_path(&problem, &grid, &PathOptions::default(), &NoClock).unwrap();
    let same = accuracy_report(&reference, &reference.clone()).unwrap();
    assert_eq!((same.l1_mean, same.rmse, same.linf), (0.0, 0.0, 0.0));
    assert_eq!(same.cells, 6);

    let mut shifted = reference.clone();
    for b in shifted.cells[1].beta.as_mut().unwrap() {
        *b += 0.1;
    }
    let r = accuracy_report(&reference, &shifted).unwrap();
    for v in [r.l1_mean, r.rmse, r.linf] {
        assert!((v - 0.1).abs() < 1e-12);
    }

    let mut empty = reference.clone();
    for c in &mut empty.cells {
        c.beta = None;
    }
    assert!(accuracy_report(&reference, &empty).is_err());
}

#[test]
fn oracle_objective_is_the_exact_objective_of_its_beta() {
    let problem = common::random_problem(11);
    let o = smoothed_oracle(&problem, &OracleConfig::default()).unwrap();
    assert!((loss_value(&problem, &o.beta).unwrap() - o.objective).abs() < 1e-12);
}
