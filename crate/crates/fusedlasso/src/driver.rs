//! Path computation over a pool of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use fusedlasso_core::path::{run_path_row, Clock, PathCell, PathGrid, PathOptions, PathResult};
use fusedlasso_core::{FusedProblem, Result};

/// Monotonic wall clock.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        StdClock {
            origin: Instant::now(),
        }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        StdClock::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Runs every λ₂ row, up to `threads` at a time. Rows are cold-started, so
/// the result does not depend on the thread count apart from timings.
pub fn run_path_parallel(
    problem: &FusedProblem,
    grid: &PathGrid,
    options: &PathOptions,
    threads: usize,
) -> Result<PathResult> {
    let rows = grid.n2();
    let clock = StdClock::new();
    let workers = threads.clamp(1, rows.max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Vec<PathCell>>>>> = Mutex::new(vec![None; rows]);

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i2 = next.fetch_add(1, Ordering::Relaxed);
                if i2 >= rows {
                    break;
                }
                let row = run_path_row(problem, grid, i2, options, &clock);
                slots.lock().expect("no worker panicked")[i2] = Some(row);
            });
        }
    });

    let mut cells = Vec::with_capacity(rows * grid.n1());
    for slot in slots.into_inner().expect("no worker panicked") {
        cells.extend(slot.expect("every row ran")?);
    }
    Ok(PathResult {
        grid: grid.clone(),
        cells,
    })
}
