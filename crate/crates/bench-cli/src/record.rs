//! Run records and their CSV form. `wall_time_s` in runs.csv is a
//! deterministic 0.000 placeholder so the file is a pure function of
//! (config, master_seed); measured timings go to a separate timings.csv
//! that is outside the byte-identical contract.

use std::cmp::Ordering;
use std::path::Path;

use crate::{BenchError, Result};

pub const RUNS_HEADER: &str =
    "experiment,algorithm,sweep_value,run_index,seed,metric_name,metric_value,wall_time_s,converged";

pub const TIMINGS_HEADER: &str = "experiment,algorithm,sweep_value,run_index,wall_time_s";

#[derive(Clone, PartialEq, Debug)]
pub struct RunRecord {
    pub experiment: String,
    pub algorithm: String,
    pub sweep_value: f64,
    pub run_index: u32,
    pub seed: u64,
    pub metric_name: String,
    pub metric_value: f64,
    pub converged: bool,
}

impl RunRecord {
    pub fn key(&self) -> (&str, &str, f64, u32) {
        (
            &self.experiment,
            &self.algorithm,
            self.sweep_value,
            self.run_index,
        )
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},0.000,{}",
            self.experiment,
            self.algorithm,
            self.sweep_value,
            self.run_index,
            self.seed,
            self.metric_name,
            self.metric_value,
            self.converged
        )
    }
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
            .then_with(|| {
                a.sweep_value
                    .partial_cmp(&b.sweep_value)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| a.run_index.cmp(&b.run_index))
    });
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    std::fs::write(path, runs_csv(records))?;
    Ok(())
}

fn parse_f64(field: &str, line: usize, s: &str) -> Result<f64> {
    if s == "NaN" {
        return Ok(f64::NAN);
    }
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|_| {
        BenchError::Runtime(format!("runs csv line {}: bad {} '{}'", line, field, s))
    })
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RUNS_HEADER => {}
        _ => {
            return Err(BenchError::Runtime(format!(
                "{}: missing or wrong runs csv header",
                path.display()
            )))
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(BenchError::Runtime(format!(
                "runs csv line {}: expected 9 fields, got {}",
                i + 1,
                f.len()
            )));
        }
        out.push(RunRecord {
            experiment: f[0].to_string(),
            algorithm: f[1].to_string(),
            sweep_value: parse_f64("sweep_value", i + 1, f[2])?,
            run_index: f[3].parse().map_err(|_| {
                BenchError::Runtime(format!("runs csv line {}: bad run_index '{}'", i + 1, f[3]))
            })?,
            seed: f[4].parse().map_err(|_| {
                BenchError::Runtime(format!("runs csv line {}: bad seed '{}'", i + 1, f[4]))
            })?,
            metric_name: f[5].to_string(),
            metric_value: parse_f64("metric_value", i + 1, f[6])?,
            converged: f[8] == "true",
        });
    }
    Ok(out)
}

/// Measured per-run wall time, keyed like the run records.
#[derive(Clone, Debug)]
pub struct Timing {
    pub experiment: String,
    pub algorithm: String,
    pub sweep_value: f64,
    pub run_index: u32,
    pub wall_time_s: f64,
}

pub fn write_timings_csv(path: &Path, timings: &[Timing]) -> Result<()> {
    let mut out = String::from(TIMINGS_HEADER);
    out.push('\n');
    for t in timings {
        out.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            t.experiment, t.algorithm, t.sweep_value, t.run_index, t.wall_time_s
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
