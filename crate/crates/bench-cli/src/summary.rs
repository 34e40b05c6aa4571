//! Per-(algorithm, sweep_value) aggregation of run records: mean, median,
//! quartiles, with NaN sentinels excluded and counted.

use std::path::Path;

use crate::record::RunRecord;
use crate::{BenchError, Result};

pub const SUMMARY_HEADER: &str =
    "experiment,algorithm,sweep_value,n_runs,mean,median,q25,q75,n_excluded";

#[derive(Clone, PartialEq, Debug)]
pub struct SummaryRow {
    pub experiment: String,
    pub algorithm: String,
    pub sweep_value: f64,
    pub n_runs: usize,
    pub mean: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub n_excluded: usize,
}

impl SummaryRow {
    /// True when every run of the cell failed; stats are NaN then.
    pub fn all_excluded(&self) -> bool {
        self.n_excluded == self.n_runs
    }
}

/// Linear-interpolation quantile of a sorted slice (the common "type 7").
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(records: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(BenchError::Runtime("no records to summarize".into()));
    }
    let mut rows: Vec<SummaryRow> = Vec::new();
    // records arrive sorted by key, so cells are contiguous
    let mut i = 0;
    while i < records.len() {
        let head = &records[i];
        let mut j = i;
        while j < records.len()
            && records[j].experiment == head.experiment
            && records[j].algorithm == head.algorithm
            && records[j].sweep_value == head.sweep_value
        {
            j += 1;
        }
        let cell = &records[i..j];
        let mut values: Vec<f64> = cell
            .iter()
            .map(|r| r.metric_value)
            .filter(|v| !v.is_nan())
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n_excluded = cell.len() - values.len();
        let mean = if values.is_empty() {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        rows.push(SummaryRow {
            experiment: head.experiment.clone(),
            algorithm: head.algorithm.clone(),
            sweep_value: head.sweep_value,
            n_runs: cell.len(),
            mean,
            median: quantile(&values, 0.5),
            q25: quantile(&values, 0.25),
            q75: quantile(&values, 0.75),
            n_excluded,
        });
        i = j;
    }
    Ok(rows)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.algorithm,
            r.sweep_value,
            r.n_runs,
            r.mean,
            r.median,
            r.q25,
            r.q75,
            r.n_excluded
        ));
    }
    out
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    std::fs::write(path, summary_csv(rows))?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SUMMARY_HEADER => {}
        _ => {
            return Err(BenchError::Runtime(format!(
                "{}: missing or wrong summary csv header",
                path.display()
            )))
        }
    }
    let parse = |line: usize, field: &str, s: &str| -> Result<f64> {
        if s == "NaN" {
            return Ok(f64::NAN);
        }
        s.parse::<f64>().map_err(|_| {
            BenchError::Runtime(format!("summary csv line {}: bad {} '{}'", line, field, s))
        })
    };
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(BenchError::Runtime(format!(
                "summary csv line {}: expected 9 fields, got {}",
                i + 1,
                f.len()
            )));
        }
        out.push(SummaryRow {
            experiment: f[0].to_string(),
            algorithm: f[1].to_string(),
            sweep_value: parse(i + 1, "sweep_value", f[2])?,
            n_runs: f[3].parse().map_err(|_| {
                BenchError::Runtime(format!("summary csv line {}: bad n_runs", i + 1))
            })?,
            mean: parse(i + 1, "mean", f[4])?,
            median: parse(i + 1, "median", f[5])?,
            q25: parse(i + 1, "q25", f[6])?,
            q75: parse(i + 1, "q75", f[7])?,
            n_excluded: f[8].parse().map_err(|_| {
                BenchError::Runtime(format!("summary csv line {}: bad n_excluded", i + 1))
            })?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(alg: &str, sv: f64, run: u32, value: f64) -> RunRecord {
        RunRecord {
            experiment: "isr_vs_beta".into(),
            algorithm: alg.into(),
            sweep_value: sv,
            run_index: run,
            seed: 0,
            metric_name: "normalized_isr".into(),
            metric_value: value,
            converged: !value.is_nan(),
        }
    }

    #[test]
    fn single_record_collapses_to_its_value() {
        let rows = summarize(&[rec("ebm", 0.1, 0, 0.42)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean, 0.42);
        assert_eq!(rows[0].median, 0.42);
        assert_eq!(rows[0].q75 - rows[0].q25, 0.0);
    }

    #[test]
    fn mean_and_median_of_one_two_three() {
        let recs: Vec<RunRecord> = [1.0, 2.0, 3.0]
            .iter()
            .enumerate()
            .map(|(i, &v)| rec("ebm", 0.1, i as u32, v))
            .collect();
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows[0].mean, 2.0);
        assert_eq!(rows[0].median, 2.0);
        assert_eq!(rows[0].q25, 1.5);
        assert_eq!(rows[0].q75, 2.5);
    }

    #[test]
    fn nan_sentinels_excluded_and_counted() {
        let recs = vec![
            rec("ebm", 0.1, 0, 1.0),
            rec("ebm", 0.1, 1, f64::NAN),
            rec("ebm", 0.1, 2, 3.0),
        ];
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows[0].n_runs, 3);
        assert_eq!(rows[0].n_excluded, 1);
        assert_eq!(rows[0].mean, 2.0);
    }

    #[test]
    fn all_nan_cell_flagged_not_dropped() {
        let recs = vec![rec("ebm", 0.1, 0, f64::NAN), rec("ebm", 0.1, 1, f64::NAN)];
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].all_excluded());
        assert!(rows[0].mean.is_nan());
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn two_pass_mean_matches_streaming_recomputation() {
        // Welford-style streaming mean as the independent oracle
        let mut recs = Vec::new();
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut streaming = 0.0;
        for i in 0..300 {
            state = crate::seed::splitmix64(state);
            let v = (state >> 11) as f64 / (1u64 << 53) as f64;
            streaming += (v - streaming) / (i as f64 + 1.0);
            recs.push(rec("ebm", 0.1, i as u32, v));
        }
        let rows = summarize(&recs).unwrap();
        assert_relative_eq!(rows[0].mean, streaming, epsilon = 1e-12);
    }

    #[test]
    fn cells_split_on_every_key_component() {
        let recs = vec![
            rec("ebm", 0.1, 0, 1.0),
            rec("ebm", 0.2, 0, 2.0),
            rec("sparse_ebm", 0.1, 0, 3.0),
        ];
        let rows = summarize(&recs).unwrap();
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn summary_csv_round_trip() {
        let recs = vec![
            rec("ebm", 0.1, 0, 1.0),
            rec("ebm", 0.1, 1, f64::NAN),
            rec("sparse_ebm", 0.5, 0, 0.25),
        ];
        let rows = summarize(&recs).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        write_summary_csv(&path, &rows).unwrap();
        let back = read_summary_csv(&path).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.algorithm, b.algorithm);
            assert_eq!(a.n_excluded, b.n_excluded);
            assert!(a.mean == b.mean || (a.mean.is_nan() && b.mean.is_nan()));
        }
    }
}
