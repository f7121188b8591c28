//! Parameter sweeps over a bounded worker pool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lorenz_core::classify::{classify, ClassifyParams};
use lorenz_core::{validate, MapParams, StandardLorenzMap, Tolerances};

use crate::report::SummaryRow;

/// Seed of the grid point at `index`.
pub fn row_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn analyse(p: MapParams, tol: Tolerances, params: &ClassifyParams, seed: u64) -> SummaryRow {
    let report = validate(&p);
    if !report.is_valid() {
        return SummaryRow::rejected(p, seed, report.messages().join("; "));
    }
    match StandardLorenzMap::with_tolerances(p, tol) {
        Ok(f) => SummaryRow::classified(p, &classify(&f, &ClassifyParams { seed, ..*params })),
        Err(e) => SummaryRow::rejected(p, seed, e.to_string()),
    }
}

/// Classify every grid point with `workers` threads. Rows come back in grid
/// order whatever the completion order, and each point's seed depends only
/// on its index, so the output does not depend on the worker count.
pub fn run_sweep(
    points: &[MapParams],
    tol: Tolerances,
    params: &ClassifyParams,
    workers: usize,
) -> Vec<SummaryRow> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SummaryRow>>> = Mutex::new(vec![None; points.len()]);
    let workers = workers.clamp(1, points.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&p) = points.get(i) else { break };
                let row = analyse(p, tol, params, row_seed(params.seed, i));
                slots.lock().expect("a sweep worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("a sweep worker panicked")
        .into_iter()
        .map(|r| r.expect("every grid point is analysed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn light() -> ClassifyParams {
        ClassifyParams {
            max_period: 6,
            grid: 256,
            horizon: 500,
            transient: 200,
            samples: 4,
            max_depth: 2,
            rotation_n: 2000,
            invariance_samples: 500,
            basin_grid: 100,
            basin_iterations: 500,
            transitivity_trials: 4,
            ..ClassifyParams::default()
        }
    }

    #[test]
    fn rows_follow_grid_order_for_any_worker_count() {
        let points: Vec<MapParams> = (0..6).map(|i| MapParams::new(0.5, 2.0, 2.0, 0.5 + 0.1 * i as f64, 0.1)).collect();
        let one = run_sweep(&points, Tolerances::default(), &light(), 1);
        let four = run_sweep(&points, Tolerances::default(), &light(), 4);
        assert_eq!(one, four);
        assert!(one.iter().zip(&points).all(|(r, p)| r.params == *p));
    }

    #[test]
    fn invalid_points_are_rejected_rows() {
        let points = [MapParams::new(0.5, 2.0, 2.0, 0.1, 0.3)];
        let rows = run_sweep(&points, Tolerances::default(), &light(), 2);
        assert_eq!(rows[0].status, "rejected");
        assert!(rows[0].note.contains("v0"));
    }
}
