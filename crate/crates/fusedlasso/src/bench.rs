//! Timing harness: full-grid paths on simulated instances, one timing
//! column per solver and, when several solvers run, their worst-over-grid
//! accuracy against a reference solver.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use fusedlasso_core::path::{lambda1_max, CellStatus, lambda2_max, PathGrid, PathOptions, PathResult};
use fusedlasso_core::simgen::{gen_1d, gen_2d, SimConfig, SimInstance};
use fusedlasso_core::verify::accuracy_report;
use fusedlasso_core::{FusedProblem, SolverConfig, SolverKind};

use crate::driver::run_path_parallel;
use crate::results::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    /// 1 or 2.
    pub dims: u8,
    /// `(n, p)` pairs; in 2D `p` is the grid side.
    pub sizes: Vec<(usize, usize)>,
    pub seeds: Vec<u64>,
    pub sigma: f64,
    pub solvers: Vec<SolverKind>,
    pub n_lambda1: usize,
    pub n_lambda2: usize,
    pub ratio: f64,
    /// Untimed runs before the timed one.
    pub warmup: usize,
    pub threads: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            dims: 1,
            sizes: vec![(50, 100)],
            seeds: vec![1],
            sigma: 10.0,
            solvers: SolverKind::ALL.to_vec(),
            n_lambda1: 50,
            n_lambda2: 20,
            ratio: 1e-4,
            warmup: 1,
            threads: 1,
        }
    }
}

/// Rows of numbers under named columns: `n`, `p`, `seed`, one
/// `<solver>_seconds` per solver, one `<solver>_failed` cell count per
/// solver, then `<solver>_l1_mean`, `_rmse` and
/// `_linf` for every solver other than the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub schema_version: u32,
    pub command: String,
    pub dims: u8,
    pub reference: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl BenchTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Tab-separated text with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| crate::formats::fmt_f64(*v)).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

pub fn simulate(dims: u8, n: usize, p: usize, seed: u64, sigma: f64) -> fusedlasso_core::Result<SimInstance> {
    let config = SimConfig {
        sigma,
        ..SimConfig::new(n, p, seed)
    };
    match dims {
        2 => gen_2d(&config),
        _ => gen_1d(&config),
    }
}

pub fn sim_problem(sim: &SimInstance) -> fusedlasso_core::Result<FusedProblem> {
    FusedProblem::squared(sim.x.clone(), sim.y.clone(), sim.graph.clone(), 0.0, 0.0)
}

/// Standard-shaped grid anchored at the instance's λ maxima.
pub fn grid_for(problem: &FusedProblem, n1: usize, n2: usize, ratio: f64) -> fusedlasso_core::Result<PathGrid> {
    PathGrid::exponential(lambda1_max(problem)?, lambda2_max(problem)?, n1, n2, ratio)
}

fn reference_of(solvers: &[SolverKind]) -> Option<SolverKind> {
    if solvers.len() < 2 {
        return None;
    }
    Some(if solvers.contains(&SolverKind::Exact) {
        SolverKind::Exact
    } else {
        solvers[0]
    })
}

pub fn run_bench(spec: &BenchSpec) -> fusedlasso_core::Result<BenchTable> {
    let reference = reference_of(&spec.solvers);
    let mut columns: Vec<String> = ["n", "p", "seed"].iter().map(|s| s.to_string()).collect();
    for s in &spec.solvers {
        columns.push(format!("{s}_seconds"));
    }
    for s in &spec.solvers {
        columns.push(format!("{s}_failed"));
    }
    let compared: Vec<SolverKind> = spec
        .solvers
        .iter()
        .copied()
        .filter(|s| reference.is_some_and(|r| r != *s))
        .collect();
    for s in &compared {
        for m in ["l1_mean", "rmse", "linf"] {
            columns.push(format!("{s}_{m}"));
        }
    }

    let mut rows = Vec::new();
    for &(n, p) in &spec.sizes {
        for &seed in &spec.seeds {
            let sim = simulate(spec.dims, n, p, seed, spec.sigma)?;
            let problem = sim_problem(&sim)?;
            let grid = grid_for(&problem, spec.n_lambda1, spec.n_lambda2, spec.ratio)?;
            let mut row = vec![n as f64, p as f64, seed as f64];
            let mut paths: Vec<(SolverKind, PathResult)> = Vec::new();
            for &kind in &spec.solvers {
                let options = PathOptions {
                    solver: SolverConfig::new(kind),
                    ..PathOptions::default()
                };
                for _ in 0..spec.warmup {
                    run_path_parallel(&problem, &grid, &options, spec.threads)?;
                }
                let start = Instant::now();
                let path = run_path_parallel(&problem, &grid, &options, spec.threads)?;
                row.push(start.elapsed().as_secs_f64());
                paths.push((kind, path));
            }
            for (_, path) in &paths {
                let failed = path.cells.iter().filter(|c| matches!(c.status, CellStatus::Failed(_))).count();
                row.push(failed as f64);
            }
            if let Some(r) = reference {
                let reference_path = &paths.iter().find(|(k, _)| *k == r).expect("reference ran").1;
                for s in &compared {
                    let candidate = &paths.iter().find(|(k, _)| k == s).expect("solver ran").1;
                    let report = accuracy_report(reference_path, candidate)?;
                    row.extend([report.l1_mean, report.rmse, report.linf]);
                }
            }
            rows.push(row);
        }
    }
    Ok(BenchTable {
        schema_version: SCHEMA_VERSION,
        command: "bench".to_owned(),
        dims: spec.dims,
        reference: reference.map(|r| r.name().to_owned()),
        columns,
        rows,
    })
}
