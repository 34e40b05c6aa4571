//! Separation-quality and sparsity metrics: Gini index, auction-based
//! component pairing, correlation scoring and the normalized ISR.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::DataMatrix;

/// A bijective pairing of estimated to true components.
#[derive(Clone, Debug)]
pub struct Assignment {
    /// mapping[estimated index] = true index
    pub mapping: Vec<usize>,
    pub total_score: f64,
    pub per_pair_scores: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct IsrReport {
    pub normalized_isr: f64,
    pub per_row_isr: Vec<f64>,
    pub permutation_used: Vec<usize>,
}

/// Gini sparsity index: sort |y| ascending as c_1 <= ... <= c_T,
/// GI = 1 - 2 sum_k (c_k / ||y||_1) ((T - k + 1/2) / T).
pub fn gini_index(y: &[f64]) -> Result<f64> {
    let t = y.len();
    if t == 0 {
        return Err(Error::Metric("empty vector".into()));
    }
    let mut c: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let l1: f64 = c.iter().sum();
    if l1 <= 0.0 {
        return Err(Error::Metric("all-zero vector has undefined sparsity".into()));
    }
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tf = t as f64;
    let mut s = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        // k is zero-based; the formula's k is k+1
        s += (ck / l1) * ((tf - (k as f64 + 1.0) + 0.5) / tf);
    }
    Ok(1.0 - 2.0 * s)
}

/// Bertsekas auction for the maximization linear assignment problem, with
/// epsilon scaling. The returned total is within N * eps_final of optimal.
pub fn auction_assign(score: &DMatrix<f64>, eps_target: f64) -> Result<Assignment> {
    let n = score.nrows();
    if n == 0 || score.ncols() != n {
        return Err(Error::Dimension(format!(
            "score matrix must be square and nonempty, got {}x{}",
            n,
            score.ncols()
        )));
    }
    if score.iter().any(|v| !v.is_finite()) {
        return Err(Error::Metric("non-finite assignment score".into()));
    }
    if !(eps_target > 0.0) {
        return Err(Error::Parameter("eps_auction must be > 0".into()));
    }
    let max_abs = score.iter().fold(0f64, |a, &v| a.max(v.abs()));
    let mut prices = vec![0f64; n];
    let mut eps = (max_abs / 2.0).max(eps_target);
    let mut owner: Vec<Option<usize>> = vec![None; n]; // object -> person
    let mut assigned: Vec<Option<usize>> = vec![None; n]; // person -> object
    loop {
        owner.iter_mut().for_each(|o| *o = None);
        assigned.iter_mut().for_each(|a| *a = None);
        let mut queue: Vec<usize> = (0..n).rev().collect();
        while let Some(person) = queue.pop() {
            // best and second-best net value
            let mut best_j = 0;
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            for j in 0..n {
                let v = score[(person, j)] - prices[j];
                if v > best {
                    second = best;
                    best = v;
                    best_j = j;
                } else if v > second {
                    second = v;
                }
            }
            let bid = if n == 1 { eps } else { best - second + eps };
            prices[best_j] += bid;
            if let Some(evicted) = owner[best_j].replace(person) {
                assigned[evicted] = None;
                queue.push(evicted);
            }
            assigned[person] = Some(best_j);
        }
        if eps <= eps_target {
            break;
        }
        eps = (eps / 4.0).max(eps_target);
    }
    let mapping: Vec<usize> = assigned.into_iter().map(|a| a.unwrap()).collect();
    let per_pair_scores: Vec<f64> = mapping
        .iter()
        .enumerate()
        .map(|(i, &j)| score[(i, j)])
        .collect();
    let total_score = per_pair_scores.iter().sum();
    Ok(Assignment {
        mapping,
        total_score,
        per_pair_scores,
    })
}

/// Default auction tolerance for an N-component pairing.
pub fn default_auction_eps(n: usize) -> f64 {
    1e-3 / n as f64
}

/// Pearson correlation of two equal-length slices, 1/T convention.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let t = a.len() as f64;
    let ma = a.iter().sum::<f64>() / t;
    let mb = b.iter().sum::<f64>() / t;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va.sqrt() * vb.sqrt()))
}

/// Pair estimated components against true ones by maximizing summed
/// absolute Pearson correlation; reports the mean matched |corr|.
pub fn pair_components(s_true: &DataMatrix, y_est: &DataMatrix) -> Result<(Assignment, f64)> {
    let n = s_true.n_rows();
    if y_est.n_rows() != n || y_est.n_samples() != s_true.n_samples() {
        return Err(Error::Dimension(format!(
            "true {}x{} vs estimated {}x{}",
            n,
            s_true.n_samples(),
            y_est.n_rows(),
            y_est.n_samples()
        )));
    }
    let mut score = DMatrix::zeros(n, n);
    for i in 0..n {
        let yi: Vec<f64> = y_est.values.row(i).iter().copied().collect();
        for j in 0..n {
            let sj: Vec<f64> = s_true.values.row(j).iter().copied().collect();
            let c = pearson(&yi, &sj).ok_or_else(|| {
                Error::Metric(format!("zero-variance row (estimated {}, true {})", i, j))
            })?;
            score[(i, j)] = c.abs();
        }
    }
    let assignment = auction_assign(&score, default_auction_eps(n))?;
    let mean = assignment.total_score / n as f64;
    Ok((assignment, mean))
}

/// Normalized average interference-to-signal ratio of a global matrix
/// G = W A. Zero means perfect separation; a random demixing scores
/// near one.
pub fn normalized_isr(g: &DMatrix<f64>) -> Result<IsrReport> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return Err(Error::Dimension(format!(
            "global matrix must be square, got {}x{}",
            n,
            g.ncols()
        )));
    }
    if n == 1 {
        return Ok(IsrReport {
            normalized_isr: 0.0,
            per_row_isr: vec![0.0],
            permutation_used: vec![0],
        });
    }
    let abs_scores = g.map(|v| v.abs());
    let assignment = auction_assign(&abs_scores, default_auction_eps(n))?;
    let mut per_row = Vec::with_capacity(n);
    for m in 0..n {
        let target = assignment.mapping[m];
        let sig = g[(m, target)];
        if sig == 0.0 {
            return Err(Error::Metric(format!(
                "degenerate separation: zero on-target gain in row {}",
                m
            )));
        }
        let mut interference = 0.0;
        for j in 0..n {
            if j != target {
                interference += g[(m, j)] * g[(m, j)];
            }
        }
        per_row.push(interference / (sig * sig));
    }
    let normalized = per_row.iter().sum::<f64>() / (n as f64 * (n as f64 - 1.0));
    Ok(IsrReport {
        normalized_isr: normalized,
        per_row_isr: per_row,
        permutation_used: assignment.mapping,
    })
}
