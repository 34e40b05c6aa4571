//! Data model and linear-algebra plumbing shared by all algorithms:
//! centering, whitening / PCA reduction, decoupling vectors and the
//! global (demixing x mixing) matrix.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// What a matrix holds in the separation pipeline.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    Sources,
    Mixtures,
    Whitened,
    Estimates,
}

/// A channels-by-samples real matrix with its pipeline role.
#[derive(Clone, Debug)]
pub struct DataMatrix {
    pub values: DMatrix<f64>,
    pub role: Role,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, role: Role) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be nonempty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Self { values, role })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    /// Wide-matrix precondition required before feeding an ICA engine.
    pub fn check_engine_input(&self) -> Result<()> {
        if self.n_samples() < self.n_rows() {
            return Err(Error::Dimension(format!(
                "engine input must be wide: {} rows > {} samples",
                self.n_rows(),
                self.n_samples()
            )));
        }
        Ok(())
    }
}

/// PCA whitening transform `z = V (x - mean)`.
#[derive(Clone, Debug)]
pub struct WhiteningTransform {
    /// K x N projection.
    pub projection: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub kept_rank: usize,
    /// All N covariance eigenvalues, nonincreasing.
    pub eigenvalues: DVector<f64>,
}

/// Demixing matrix state in the whitened domain. Rows are kept unit-norm;
/// the demixing matrix in original coordinates is `W * V`.
#[derive(Clone, Debug)]
pub struct DemixingState {
    pub w: DMatrix<f64>,
    pub decoupling: Vec<DVector<f64>>,
    pub iteration: usize,
    pub converged: bool,
    pub diverged: bool,
}

impl DemixingState {
    pub fn new(w: DMatrix<f64>) -> Self {
        let n = w.nrows();
        Self {
            w,
            decoupling: vec![DVector::zeros(n); n],
            iteration: 0,
            converged: false,
            diverged: false,
        }
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }
}

/// Sample covariance with 1/T normalization (expectation convention).
pub fn covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let t = x.ncols() as f64;
    (x * x.transpose()) / t
}

/// Remove the per-row sample mean. Returns the centered matrix and the mean
/// vector that restores the input.
pub fn center(x: &DataMatrix) -> Result<(DataMatrix, DVector<f64>)> {
    let m = &x.values;
    if m.ncols() == 0 || m.nrows() == 0 {
        return Err(Error::Dimension("cannot center an empty matrix".into()));
    }
    let t = m.ncols() as f64;
    let mean = DVector::from_iterator(m.nrows(), m.row_iter().map(|r| r.sum() / t));
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row.add_scalar_mut(-mean[i]);
    }
    Ok((
        DataMatrix {
            values: out,
            role: x.role,
        },
        mean,
    ))
}

/// Whiten centered data, reducing to the top `kept_rank` principal
/// directions. Output covariance is the identity.
pub fn whiten(x: &DataMatrix, kept_rank: usize) -> Result<(DataMatrix, WhiteningTransform)> {
    let n = x.n_rows();
    if kept_rank == 0 || kept_rank > n {
        return Err(Error::Parameter(format!(
            "kept_rank {} out of range 1..={}",
            kept_rank, n
        )));
    }
    let cov = covariance(&x.values);
    let eig = cov.clone().symmetric_eigen();
    // nalgebra does not order eigenpairs; sort nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let max_ev = eigenvalues[0].max(0.0);
    for k in 0..kept_rank {
        if eigenvalues[k] <= 1e-12 * max_ev || eigenvalues[k] <= 0.0 {
            return Err(Error::RankDeficient {
                index: k,
                detail: format!(
                    "eigenvalue {:.3e} below 1e-12 of max {:.3e}",
                    eigenvalues[k], max_ev
                ),
            });
        }
    }
    let mut projection = DMatrix::zeros(kept_rank, n);
    for (k, &i) in order.iter().take(kept_rank).enumerate() {
        let u = eig.eigenvectors.column(i);
        let scale = 1.0 / eigenvalues[k].sqrt();
        for j in 0..n {
            projection[(k, j)] = u[j] * scale;
        }
    }
    let z = &projection * &x.values;
    // The caller centered the data; the transform's mean slot is zero here
    // and is filled by pipeline helpers that center and whiten together.
    Ok((
        DataMatrix {
            values: z,
            role: Role::Whitened,
        },
        WhiteningTransform {
            projection,
            mean: DVector::zeros(n),
            kept_rank,
            eigenvalues,
        },
    ))
}

/// Center then whiten in one step, recording the removed mean in the
/// transform.
pub fn center_and_whiten(
    x: &DataMatrix,
    kept_rank: usize,
) -> Result<(DataMatrix, WhiteningTransform)> {
    let (centered, mean) = center(x)?;
    let (z, mut transform) = whiten(&centered, kept_rank)?;
    transform.mean = mean;
    Ok((z, transform))
}

/// Unit vector orthogonal to every row of `w` except row `m`, signed so
/// that `h^T w_m > 0`. Computed by projecting `w_m` out of the span of the
/// other rows (QR of their transpose).
pub fn decoupling_vector(w: &DMatrix<f64>, m: usize) -> Result<DVector<f64>> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::Dimension(format!(
            "demixing matrix must be square, got {}x{}",
            n,
            w.ncols()
        )));
    }
    if m >= n {
        return Err(Error::Dimension(format!("row index {} out of range {}", m, n)));
    }
    let w_m = w.row(m).transpose();
    if n == 1 {
        let norm = w_m.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateDemixing("zero 1x1 demixing matrix".into()));
        }
        return Ok(&w_m / norm);
    }
    // N x (N-1) matrix whose columns are the other rows.
    let mut others = DMatrix::zeros(n, n - 1);
    let mut c = 0;
    for r in 0..n {
        if r == m {
            continue;
        }
        for j in 0..n {
            others[(j, c)] = w[(r, j)];
        }
        c += 1;
    }
    let qr = others.qr();
    let q = qr.q();
    // Project w_m onto the orthogonal complement of the other rows' span.
    let coeffs = q.transpose() * &w_m;
    let mut h = w_m.clone();
    h -= &q * coeffs;
    let norm = h.norm();
    if norm < 1e-10 * w_m.norm().max(1.0) {
        return Err(Error::DegenerateDemixing(format!(
            "row {} lies in the span of the remaining rows (residual {:.3e})",
            m, norm
        )));
    }
    h /= norm;
    // h^T w_m = norm of the projection residual, positive by construction,
    // but guard against pathological rounding.
    if h.dot(&w_m) < 0.0 {
        h = -h;
    }
    Ok(h)
}

/// Global matrix `G = W * A` measuring separation quality.
pub fn global_matrix(w: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if w.ncols() != a.nrows() {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            w.nrows(),
            w.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(w * a)
}

/// Write a matrix as headerless row-major CSV.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a headerless CSV matrix, rejecting ragged rows.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Format(format!("line {}: bad number {:?}", lineno + 1, field))
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format(format!(
                    "ragged row at line {}: {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix file".into()));
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(nr, nc, |i, j| rows[i][j]))
}
