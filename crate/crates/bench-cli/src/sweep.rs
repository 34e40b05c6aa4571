//! Monte-Carlo sweep execution: independent runs on a rayon pool, panic
//! isolation per run, and a deterministic sorted merge of the results.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{Algorithm, SweepConfig};
use crate::record::{sort_records, RunRecord, Timing};
use crate::runner::{single_run, RunPoint};
use crate::seed::child_seed;
use crate::{BenchError, Result};

#[derive(Clone, Copy, Debug)]
pub struct Task {
    pub algorithm: Option<Algorithm>,
    pub sweep_value: f64,
    pub run_index: u32,
    pub seed: u64,
}

pub fn plan_tasks(cfg: &SweepConfig) -> Vec<Task> {
    let algs: Vec<Option<Algorithm>> = if cfg.algorithms.is_empty() {
        vec![None]
    } else {
        cfg.algorithms.iter().copied().map(Some).collect()
    };
    let mut tasks = Vec::new();
    for alg in &algs {
        let alg_name = alg.map(|a| a.name()).unwrap_or("none");
        for &sv in &cfg.sweep_values {
            for run in 0..cfg.fixed.runs {
                tasks.push(Task {
                    algorithm: *alg,
                    sweep_value: sv,
                    run_index: run,
                    seed: child_seed(
                        cfg.fixed.master_seed,
                        cfg.experiment.name(),
                        alg_name,
                        sv,
                        run,
                    ),
                });
            }
        }
    }
    tasks
}

fn record_for(cfg: &SweepConfig, task: &Task, outcome: std::result::Result<crate::runner::RunOutcome, String>) -> RunRecord {
    let (metric_name, metric_value, converged) = match outcome {
        Ok(o) => (o.metric_name.to_string(), o.metric_value, o.converged),
        // failed or panicked runs keep their slot with a NaN sentinel
        Err(_) => (cfg.experiment.metric_name().to_string(), f64::NAN, false),
    };
    RunRecord {
        experiment: cfg.experiment.name().to_string(),
        algorithm: task.algorithm.map(|a| a.name()).unwrap_or("none").to_string(),
        sweep_value: task.sweep_value,
        run_index: task.run_index,
        seed: task.seed,
        metric_name,
        metric_value,
        converged,
    }
}

/// Run one closure with panic isolation; a panic becomes an error string
/// instead of tearing down the sweep.
fn guarded<F>(f: F) -> std::result::Result<crate::runner::RunOutcome, String>
where
    F: FnOnce() -> Result<crate::runner::RunOutcome>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(o)) => Ok(o),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("panic".to_string()),
    }
}

/// Execute all runs of a sweep on `workers` threads. The record table is
/// sorted by key, so it is identical for any worker count; timings carry
/// the measured durations in the same order.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<(Vec<RunRecord>, Vec<Timing>)> {
    if workers == 0 {
        return Err(BenchError::Validation(vec![
            "workers: must be >= 1".to_string(),
        ]));
    }
    let tasks = plan_tasks(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Runtime(format!("worker pool: {}", e)))?;

    let results: Vec<(RunRecord, Timing)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let point = RunPoint::resolve(cfg, task.algorithm, task.sweep_value, task.seed);
                let start = Instant::now();
                let outcome = guarded(|| single_run(&point));
                let elapsed = start.elapsed().as_secs_f64();
                let rec = record_for(cfg, task, outcome);
                let timing = Timing {
                    experiment: rec.experiment.clone(),
                    algorithm: rec.algorithm.clone(),
                    sweep_value: rec.sweep_value,
                    run_index: rec.run_index,
                    wall_time_s: elapsed,
                };
                (rec, timing)
            })
            .collect()
    });

    let (mut records, mut timings): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    sort_records(&mut records);
    timings.sort_by(|a, b| {
        (&a.experiment, &a.algorithm)
            .cmp(&(&b.experiment, &b.algorithm))
            .then(a.sweep_value.partial_cmp(&b.sweep_value).unwrap())
            .then(a.run_index.cmp(&b.run_index))
    });
    Ok((records, timings))
}
