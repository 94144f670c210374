mod common;

use common::{random_problem, strictly_convex_problem};
use fusedlasso_core::model::loss_value;
use fusedlasso_core::coordinate::{run_cd, run_cd_observed, CdConfig};
use fusedlasso_core::fusion::{build_partition, collapse, solve_exact, ExactConfig, FusedSets};
use fusedlasso_core::verify::{
    check_optimality, error_metrics, smoothed_oracle, OracleConfig, Violation,
};
use proptest::prelude::*;

fn tiny(a: f64, b: f64) -> f64 {
    1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn active_set_matches_full_sweeps_for_lasso(seed in any::<u64>()) {
        let problem = random_problem(seed);
        let problem = problem.with_lambdas(problem.lambda1().max(0.1), 0.0).unwrap();
        let ls = problem.least_squares().unwrap();
        let zero = vec![0.0; ls.p()];
        let tight = CdConfig { tol: 1e-12, ..CdConfig::default() };
        let with = run_cd(&ls, &zero, &tight).unwrap();
        let without = run_cd(&ls, &zero, &CdConfig { use_active_set: false, ..tight }).unwrap();
        prop_assert!(with.converged && without.converged);
        let (a, b) = (ls.objective(&with.beta), ls.objective(&without.beta));
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn every_move_decreases_the_objective(seed in any::<u64>()) {
        let ls = random_problem(seed).least_squares().unwrap();
        let diag = ls.col_sq_norms().to_vec();
        let mut beta = vec![0.0; ls.p()];
        let mut failures = Vec::new();
        run_cd_observed(&ls, &beta.clone(), &CdConfig::default(), &mut |m| {
            let before = ls.objective(&beta);
            beta[m.coordinate] = m.to;
            let after = ls.objective(&beta);
            let drop = 0.5 * diag[m.coordinate] * (m.to - m.from).powi(2);
            if after > before - drop + tiny(before, after) {
                failures.push((before, after, drop));
            }
        })
        .unwrap();
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }

    #[test]
    fn exact_output_is_a_fixed_point(seed in any::<u64>()) {
        let problem = random_problem(seed);
        let cfg = ExactConfig::default();
        let first = solve_exact(&problem, &vec![0.0; problem.p()], &cfg).unwrap();
        let again = solve_exact(&problem, &first.beta, &cfg).unwrap();
        prop_assert!(again.objective <= first.objective + tiny(first.objective, again.objective));
        prop_assert!((again.objective - first.objective).abs() <= 1e-8 * (1.0 + first.objective));
    }

    #[test]
    fn exact_output_is_certified(seed in any::<u64>()) {
        let problem = random_problem(seed);
        let sol = solve_exact(&problem, &vec![0.0; problem.p()], &ExactConfig::default()).unwrap();
        prop_assert!(sol.converged);
        let verdict = check_optimality(&problem, &sol.beta, 1e-6).unwrap();
        prop_assert!(verdict.is_certified(), "{:?}", verdict);
    }

    #[test]
    fn perturbed_optimum_is_refuted(seed in any::<u64>(), pick in any::<usize>(), up in any::<bool>()) {
        let problem = strictly_convex_problem(seed);
        let sol = solve_exact(&problem, &vec![0.0; problem.p()], &ExactConfig::default()).unwrap();
        let tol = 1e-6;
        let mut beta = sol.beta.clone();
        let k = pick % beta.len();
        beta[k] += if up { 10.0 * tol } else { -10.0 * tol };
        let verdict = check_optimality(&problem, &beta, tol).unwrap();
        prop_assert!(!verdict.is_certified());
    }

    #[test]
    fn exact_sits_inside_the_oracle_sandwich(seed in any::<u64>()) {
        let problem = random_problem(seed);
        let sol = solve_exact(&problem, &vec![0.0; problem.p()], &ExactConfig::default()).unwrap();
        let oracle = smoothed_oracle(&problem, &OracleConfig::default()).unwrap();
        let g = loss_value(&problem, &sol.beta).unwrap();
        prop_assert!(g <= oracle.objective + oracle.certified_gap + 1e-9);
        prop_assert!((g - oracle.objective).abs() <= oracle.certified_gap + 1e-8,
            "exact {} oracle {} gap {}", g, oracle.objective, oracle.certified_gap);
    }

    #[test]
    fn collapsed_objective_matches_expanded(seed in any::<u64>(), values in proptest::collection::vec(-2i32..=2, 10)) {
        let ls = random_problem(seed).least_squares().unwrap();
        let beta: Vec<f64> = values[..ls.p()].iter().map(|v| *v as f64).collect();
        let sets = FusedSets::from_partition(&build_partition(ls.graph(), &beta));
        let collapsed = collapse(&ls, &sets).unwrap();
        let theta = collapsed.restrict(&beta);
        prop_assert_eq!(collapsed.expand(&theta), beta.clone());
        let a = ls.objective(&beta);
        let b = collapsed.problem().objective(&theta);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn metric_inequalities(a in proptest::collection::vec(-100.0f64..100.0, 1..40), shift in -5.0f64..5.0) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + shift * (i % 3) as f64).collect();
        let m = error_metrics(&a, &b).unwrap();
        prop_assert!(m.l1_mean >= 0.0);
        prop_assert!(m.rmse + 1e-12 >= m.l1_mean);
        prop_assert!(m.linf + 1e-12 >= m.rmse);
    }
}

#[test]
fn stall_point_is_refuted() {
    // (0, 0) is one fused group, which wants to move to the mean 1
    let problem = common::toy(0.0, 2.0);
    let verdict = check_optimality(&problem, &[0.0, 0.0], 1e-9).unwrap();
    let fusedlasso_core::verify::Optimality::Refuted { violations, .. } = verdict else {
        panic!("stall point certified");
    };
    assert!(violations.contains(&Violation::CoordinateMove { set: vec![0, 1], from: 0.0, to: 1.0 }));
    assert!(!violations.iter().any(|v| matches!(v, Violation::Split { .. })));
}

#[test]
fn split_stall_is_refuted_by_the_active_split() {
    // at (1.5, 1.5) with λ₂ = 0.5 the pair should shear apart
    let problem = common::toy(0.0, 0.5);
    let verdict = check_optimality(&problem, &[1.0, 1.0], 1e-9).unwrap();
    let fusedlasso_core::verify::Optimality::Refuted { violations, .. } = verdict else {
        panic!("fused point certified");
    };
    assert!(violations.iter().any(|v| matches!(
        v,
        Violation::Split { mode: fusedlasso_core::fusion::SplitMode::Active, .. }
    )), "{violations:?}");
}
