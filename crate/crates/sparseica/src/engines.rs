//! The decoupled row-wise optimizer and the three separation algorithms:
//! SparseICA-EBM, ICA-EBM (the lambda = 0 special case) and the
//! natural-gradient Infomax baseline.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::{EbmEstimator, FunctionId};
use crate::error::{Error, Result};
use crate::model::{decoupling_vector, DataMatrix, DemixingState};

/// Smoothed l1 penalty configuration. `lambda` may be shared across
/// sources or given per source.
#[derive(Clone, Debug)]
pub struct SparsityPenalty {
    shared_lambda: f64,
    per_source: Option<Vec<f64>>,
    pub epsilon: f64,
}

impl SparsityPenalty {
    pub fn shared(lambda: f64, epsilon: f64) -> Result<Self> {
        if lambda < 0.0 {
            return Err(Error::Parameter(format!("lambda {} must be >= 0", lambda)));
        }
        if epsilon <= 0.0 {
            return Err(Error::Parameter(format!("epsilon {} must be > 0", epsilon)));
        }
        Ok(Self {
            shared_lambda: lambda,
            per_source: None,
            epsilon,
        })
    }

    pub fn per_source(lambdas: Vec<f64>, epsilon: f64) -> Result<Self> {
        if lambdas.iter().any(|&l| l < 0.0) {
            return Err(Error::Parameter("per-source lambda must be >= 0".into()));
        }
        if epsilon <= 0.0 {
            return Err(Error::Parameter(format!("epsilon {} must be > 0", epsilon)));
        }
        Ok(Self {
            shared_lambda: 0.0,
            per_source: Some(lambdas),
            epsilon,
        })
    }

    /// Penalty with lambda = 0: disables sparsity exactly.
    pub fn disabled() -> Self {
        Self {
            shared_lambda: 0.0,
            per_source: None,
            epsilon: 1e-2,
        }
    }

    pub fn lambda_for(&self, m: usize) -> f64 {
        match &self.per_source {
            Some(v) => v[m],
            None => self.shared_lambda,
        }
    }
}

/// Backtracking line-search parameters (Armijo).
#[derive(Clone, Copy, Debug)]
pub struct LineSearch {
    pub initial_step: f64,
    pub shrink: f64,
    pub armijo_c: f64,
    pub max_halvings: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            armijo_c: 1e-4,
            max_halvings: 40,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EngineParams {
    pub max_sweeps: usize,
    pub tol: f64,
    pub line_search: LineSearch,
    pub restarts: usize,
    pub seed: u64,
    /// Initial learning rate for Infomax-NG; defaults to 0.1 / N.
    pub infomax_eta0: Option<f64>,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            max_sweeps: 512,
            tol: 1e-6,
            line_search: LineSearch::default(),
            restarts: 1,
            seed: 0,
            infomax_eta0: None,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 || self.restarts == 0 {
            return Err(Error::Parameter("max_sweeps and restarts must be >= 1".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::Parameter("tol must be > 0".into()));
        }
        Ok(())
    }
}

/// One decoupled cost evaluation. `total = entropy_sum - log_det_term +
/// sparsity_term`, with the constant offsets of the true MI excluded.
#[derive(Clone, Copy, Debug)]
pub struct CostValue {
    pub total: f64,
    pub entropy_sum: f64,
    pub log_det_term: f64,
    pub sparsity_term: f64,
}

impl CostValue {
    fn new(entropy_sum: f64, log_det_term: f64, sparsity_term: f64) -> Self {
        Self {
            total: entropy_sum - log_det_term + sparsity_term,
            entropy_sum,
            log_det_term,
            sparsity_term,
        }
    }
}

/// Smoothed l1: sum_t sqrt(y_t^2 + epsilon).
pub fn smoothed_l1(y: &[f64], epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::Parameter(format!("epsilon {} must be > 0", epsilon)));
    }
    Ok(y.iter().map(|&v| (v * v + epsilon).sqrt()).sum())
}

/// Gradient of the smoothed l1 with respect to w for y = w^T Z:
/// sum_t (y_t / sqrt(y_t^2 + eps)) z_t. The sum is left unnormalized,
/// matching the cost as written.
pub fn smoothed_l1_gradient(y: &[f64], z: &DMatrix<f64>, epsilon: f64) -> Result<DVector<f64>> {
    if epsilon <= 0.0 {
        return Err(Error::Parameter(format!("epsilon {} must be > 0", epsilon)));
    }
    if z.ncols() != y.len() {
        return Err(Error::Dimension(format!(
            "y has {} samples, Z has {}",
            y.len(),
            z.ncols()
        )));
    }
    let coeff = DVector::from_iterator(y.len(), y.iter().map(|&v| v / (v * v + epsilon).sqrt()));
    Ok(z * coeff)
}

fn row_times(z: &DMatrix<f64>, w: &DVector<f64>) -> Vec<f64> {
    let y = z.tr_mul(w);
    y.as_slice().to_vec()
}

/// Decoupled sparse cost of one row: entropy bound of y_m, minus
/// ln|h_m^T w_m|, plus the weighted smoothed l1.
pub fn sparse_cost(
    w_m: &DVector<f64>,
    z: &DMatrix<f64>,
    h_m: &DVector<f64>,
    lambda_m: f64,
    epsilon: f64,
    estimator: &EbmEstimator,
) -> Result<CostValue> {
    let hw = h_m.dot(w_m);
    if hw.abs() <= 1e-12 {
        return Err(Error::DegenerateDemixing(format!(
            "row collapsed into the span of the others: |h^T w| = {:.3e}",
            hw.abs()
        )));
    }
    let y = row_times(z, w_m);
    let est = estimator.estimate_entropy(&y)?;
    let sparsity = if lambda_m > 0.0 {
        lambda_m * smoothed_l1(&y, epsilon)?
    } else {
        0.0
    };
    Ok(CostValue::new(est.value, hw.abs().ln(), sparsity))
}

/// Same cost with the measuring function pinned to `k`; used inside the
/// line search so the bound selection cannot switch mid-step.
fn sparse_cost_frozen(
    w_m: &DVector<f64>,
    z: &DMatrix<f64>,
    h_m: &DVector<f64>,
    lambda_m: f64,
    epsilon: f64,
    estimator: &EbmEstimator,
    k: FunctionId,
) -> Result<CostValue> {
    let hw = h_m.dot(w_m);
    if hw.abs() <= 1e-12 {
        return Err(Error::DegenerateDemixing("|h^T w| ~ 0".into()));
    }
    let y = row_times(z, w_m);
    let est = estimator.estimate_with_function(&y, k)?;
    let sparsity = if lambda_m > 0.0 {
        lambda_m * smoothed_l1(&y, epsilon)?
    } else {
        0.0
    };
    Ok(CostValue::new(est.value, hw.abs().ln(), sparsity))
}

/// Full decoupled gradient of the sparse cost with respect to w_m.
pub fn sparse_cost_gradient(
    w_m: &DVector<f64>,
    z: &DMatrix<f64>,
    h_m: &DVector<f64>,
    lambda_m: f64,
    epsilon: f64,
    estimator: &EbmEstimator,
) -> Result<DVector<f64>> {
    let hw = h_m.dot(w_m);
    if hw.abs() <= 1e-12 {
        return Err(Error::DegenerateDemixing("|h^T w| ~ 0".into()));
    }
    let y = row_times(z, w_m);
    let est = estimator.estimate_entropy(&y)?;
    let mut grad = estimator.entropy_gradient(&y, z, w_m, &est)?;
    grad -= h_m / hw;
    if lambda_m > 0.0 {
        grad += smoothed_l1_gradient(&y, z, epsilon)? * lambda_m;
    }
    Ok(grad)
}

/// One Armijo backtracking update of row `m`. Returns true if a step was
/// accepted; on rejection the row is left untouched.
pub fn decoupled_row_update(
    m: usize,
    state: &mut DemixingState,
    z: &DMatrix<f64>,
    penalty: &SparsityPenalty,
    params: &EngineParams,
    estimator: &EbmEstimator,
) -> Result<bool> {
    let lambda = penalty.lambda_for(m);
    let eps = penalty.epsilon;
    let h = decoupling_vector(&state.w, m)?;
    let w = state.w.row(m).transpose();

    let hw = h.dot(&w);
    if hw.abs() <= 1e-12 {
        return Err(Error::DegenerateDemixing("|h^T w| ~ 0".into()));
    }
    let y = row_times(z, &w);
    let est = estimator.estimate_entropy(&y)?;
    let current = {
        let sparsity = if lambda > 0.0 {
            lambda * smoothed_l1(&y, eps)?
        } else {
            0.0
        };
        CostValue::new(est.value, hw.abs().ln(), sparsity)
    };
    let k = est.selected_function;

    let mut grad = estimator.entropy_gradient(&y, z, &w, &est)?;
    grad -= &h / hw;
    if lambda > 0.0 {
        grad += smoothed_l1_gradient(&y, z, eps)? * lambda;
    }
    // tangent projection keeps the step on the unit sphere to first order
    let g_tan = &grad - &w * grad.dot(&w);
    let g2 = g_tan.norm_squared();
    if g2 == 0.0 {
        state.decoupling[m] = h;
        return Ok(false);
    }

    let ls = &params.line_search;
    let mut step = ls.initial_step;
    for _ in 0..ls.max_halvings {
        let trial = (&w - &g_tan * step).normalize();
        if let Ok(cost) = sparse_cost_frozen(&trial, z, &h, lambda, eps, estimator, k) {
            if cost.total <= current.total - ls.armijo_c * step * g2 {
                state.w.row_mut(m).copy_from(&trial.transpose());
                state.decoupling[m] = h;
                return Ok(true);
            }
        }
        step *= ls.shrink;
    }
    state.decoupling[m] = h;
    Ok(false)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random orthogonal matrix from the QR of a seeded standard-normal draw,
/// with the R diagonal signs fixed for a well-defined distribution.
pub fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = DMatrix::from_fn(n, n, |_, _| {
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    let qr = raw.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

fn summed_cost(
    state: &DemixingState,
    z: &DMatrix<f64>,
    penalty: &SparsityPenalty,
    estimator: &EbmEstimator,
) -> Result<CostValue> {
    let n = state.n();
    let mut entropy = 0.0;
    let mut logdet = 0.0;
    let mut sparsity = 0.0;
    for m in 0..n {
        let h = decoupling_vector(&state.w, m)?;
        let w = state.w.row(m).transpose();
        let c = sparse_cost(&w, z, &h, penalty.lambda_for(m), penalty.epsilon, estimator)?;
        entropy += c.entropy_sum;
        logdet += c.log_det_term;
        sparsity += c.sparsity_term;
    }
    Ok(CostValue::new(entropy, logdet, sparsity))
}

fn run_sparse_single(
    z: &DMatrix<f64>,
    penalty: &SparsityPenalty,
    params: &EngineParams,
    estimator: &EbmEstimator,
    seed: u64,
) -> Result<(DemixingState, Vec<CostValue>)> {
    let n = z.nrows();
    let mut state = DemixingState::new(random_orthogonal(n, seed));
    let mut trace = Vec::new();
    trace.push(summed_cost(&state, z, penalty, estimator)?);

    for sweep in 0..params.max_sweeps {
        let mut max_change: f64 = 0.0;
        for m in 0..n {
            let old = state.w.row(m).transpose();
            match decoupled_row_update(m, &mut state, z, penalty, params, estimator) {
                Ok(true) => {
                    let new = state.w.row(m).transpose();
                    max_change = max_change.max(1.0 - new.dot(&old).abs());
                }
                Ok(false) => {}
                Err(e @ Error::DegenerateDemixing(_)) => return Err(e),
                Err(e) => return Err(e),
            }
        }
        state.iteration = sweep + 1;
        trace.push(summed_cost(&state, z, penalty, estimator)?);
        if max_change < params.tol {
            state.converged = true;
            break;
        }
    }
    Ok((state, trace))
}

/// SparseICA-EBM: decoupled row-wise entropy bound minimization with the
/// smoothed l1 penalty. With restarts > 1 the lowest-cost solution wins.
pub fn run_sparse_ica_ebm(
    z: &DataMatrix,
    penalty: &SparsityPenalty,
    params: &EngineParams,
    estimator: &EbmEstimator,
) -> Result<(DemixingState, Vec<CostValue>)> {
    params.validate()?;
    z.check_engine_input()?;
    let mut best: Option<(DemixingState, Vec<CostValue>)> = None;
    for r in 0..params.restarts {
        let seed = splitmix64(params.seed ^ (r as u64).wrapping_mul(0xA511_E9B3));
        let run = run_sparse_single(&z.values, penalty, params, estimator, seed)?;
        let better = match &best {
            None => true,
            Some((_, t)) => run.1.last().unwrap().total < t.last().unwrap().total,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

/// ICA-EBM: the penalty-free baseline, exactly SparseICA-EBM with
/// lambda = 0.
pub fn run_ica_ebm(
    z: &DataMatrix,
    params: &EngineParams,
    estimator: &EbmEstimator,
) -> Result<(DemixingState, Vec<CostValue>)> {
    run_sparse_ica_ebm(z, &SparsityPenalty::disabled(), params, estimator)
}

/// Natural-gradient Infomax with the logistic score phi(y) = 2/(1+e^-y) - 1.
/// The learning rate is halved whenever the cost increases, floored at
/// 1e-5. Rows are normalized for reporting only.
pub fn run_infomax_ng(
    z: &DataMatrix,
    params: &EngineParams,
) -> Result<(DemixingState, Vec<CostValue>)> {
    params.validate()?;
    z.check_engine_input()?;
    let zm = &z.values;
    let n = zm.nrows();
    let t = zm.ncols() as f64;
    let mut w = random_orthogonal(n, splitmix64(params.seed ^ 0x1FF0_AA55));
    let mut eta = params.infomax_eta0.unwrap_or(0.1 / n as f64);
    let mut trace = Vec::new();
    let mut state = DemixingState::new(w.clone());

    let cost_of = |w: &DMatrix<f64>| -> CostValue {
        let y = w * zm;
        let mut nll = 0.0;
        for v in y.iter() {
            // -log p(y) for the logistic density, softplus-stabilized
            let a = -v.abs();
            nll += v.abs() + 2.0 * a.exp().ln_1p();
        }
        nll /= t;
        let det = w.determinant().abs().max(1e-300);
        CostValue::new(nll, det.ln(), 0.0)
    };

    let mut prev_cost = cost_of(&w);
    trace.push(prev_cost);
    for iter in 0..params.max_sweeps {
        let y = &w * zm;
        // logistic score phi(y) = 2 sigma(y) - 1 = tanh(y/2), the negative
        // log-density derivative; I - E{phi(y) y^T} vanishes at separation
        let g = y.map(|v| 2.0 / (1.0 + (-v).exp()) - 1.0);
        let delta = (DMatrix::identity(n, n) - (&g * y.transpose()) / t) * &w;
        let dn = delta.norm();
        if !dn.is_finite() || dn > 1e6 {
            state.w = w;
            state.diverged = true;
            state.iteration = iter;
            normalize_rows(&mut state.w);
            return Ok((state, trace));
        }
        w += &delta * eta;
        let cost = cost_of(&w);
        if cost.total > prev_cost.total {
            eta = (eta * 0.5).max(1e-5);
        }
        prev_cost = cost;
        trace.push(cost);
        state.iteration = iter + 1;
        if eta * dn < params.tol {
            state.converged = true;
            break;
        }
    }
    state.w = w;
    normalize_rows(&mut state.w);
    Ok((state, trace))
}

fn normalize_rows(w: &mut DMatrix<f64>) {
    for mut row in w.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
}
