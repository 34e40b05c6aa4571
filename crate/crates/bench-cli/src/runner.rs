//! The body of one Monte-Carlo run: data generation, engine, metric. Pure
//! function of the resolved parameters and the child seed.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparseica::datagen::{generate_fmri_scene, ggd_source_matrix, random_mixing};
use sparseica::engines::{
    run_ica_ebm, run_infomax_ng, run_sparse_ica_ebm, EngineParams, SparsityPenalty,
};
use sparseica::entropy::EbmEstimator;
use sparseica::metrics::{gini_index, normalized_isr, pair_components};
use sparseica::model::{center_and_whiten, DataMatrix, Role};

use crate::config::{Algorithm, Experiment, SweepConfig};
use crate::seed::splitmix64;
use crate::{BenchError, Result};

/// One run's resolved parameters: the swept value already folded into the
/// fixed block.
#[derive(Clone, Copy, Debug)]
pub struct RunPoint {
    pub experiment: Experiment,
    pub algorithm: Option<Algorithm>,
    pub n: usize,
    pub t: usize,
    pub beta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub grid: usize,
    pub k: usize,
    pub baseline: f64,
    pub cnr: f64,
    pub tol: f64,
    pub seed: u64,
}

impl RunPoint {
    pub fn resolve(
        cfg: &SweepConfig,
        algorithm: Option<Algorithm>,
        sweep_value: f64,
        seed: u64,
    ) -> RunPoint {
        let f = &cfg.fixed;
        let mut p = RunPoint {
            experiment: cfg.experiment,
            algorithm,
            n: f.n,
            t: f.t,
            beta: f.beta,
            lambda: f.lambda,
            epsilon: f.epsilon,
            grid: f.grid,
            k: f.k,
            baseline: f.baseline,
            cnr: 1.0,
            tol: f.tol,
            seed,
        };
        match cfg.experiment {
            Experiment::GiniVsBeta | Experiment::IsrVsBeta => p.beta = sweep_value,
            Experiment::IsrVsT => p.t = sweep_value as usize,
            Experiment::IsrVsN => p.n = sweep_value as usize,
            Experiment::FmriCnr => p.cnr = sweep_value,
        }
        p
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    pub metric_name: &'static str,
    pub metric_value: f64,
    pub converged: bool,
}

fn engine_params(p: &RunPoint) -> EngineParams {
    EngineParams {
        tol: p.tol,
        seed: p.seed,
        ..Default::default()
    }
}

fn run_engine(
    alg: Algorithm,
    z: &DataMatrix,
    p: &RunPoint,
) -> Result<(DMatrix<f64>, bool)> {
    let params = engine_params(p);
    let est = EbmEstimator::shared();
    let (state, _) = match alg {
        Algorithm::SparseEbm => {
            let penalty = SparsityPenalty::shared(p.lambda, p.epsilon)?;
            run_sparse_ica_ebm(z, &penalty, &params, est)?
        }
        Algorithm::Ebm => run_ica_ebm(z, &params, est)?,
        Algorithm::InfomaxNg => run_infomax_ng(z, &params)?,
    };
    Ok((state.w, state.converged))
}

fn gini_run(p: &RunPoint) -> Result<RunOutcome> {
    let s = ggd_source_matrix(p.n, p.t, p.beta, p.seed)?;
    let mut acc = 0.0;
    for row in s.values.row_iter() {
        let y: Vec<f64> = row.iter().copied().collect();
        acc += gini_index(&y)?;
    }
    Ok(RunOutcome {
        metric_name: "mean_gini",
        metric_value: acc / p.n as f64,
        converged: true,
    })
}

fn isr_run(p: &RunPoint) -> Result<RunOutcome> {
    let alg = p
        .algorithm
        .ok_or_else(|| BenchError::Runtime("isr experiment needs an algorithm".into()))?;
    let s = ggd_source_matrix(p.n, p.t, p.beta, p.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(p.seed ^ 0x00A1_0000));
    let a = random_mixing(p.n, &mut rng, 1e6)?;
    let x = DataMatrix::new(&a * &s.values, Role::Mixtures)?;
    let (z, transform) = center_and_whiten(&x, p.n)?;
    let (w, converged) = run_engine(alg, &z, p)?;
    let g = &w * &transform.projection * &a;
    Ok(RunOutcome {
        metric_name: "normalized_isr",
        metric_value: normalized_isr(&g)?.normalized_isr,
        converged,
    })
}

/// Spatial ICA on the fMRI-like scene: voxels are samples, so the
/// observation is transposed to frames x voxels, PCA-reduced to K, and the
/// estimated rows are spatial maps scored against the ground truth.
fn fmri_run(p: &RunPoint) -> Result<RunOutcome> {
    let alg = p
        .algorithm
        .ok_or_else(|| BenchError::Runtime("fmri experiment needs an algorithm".into()))?;
    let (scene, observed) = generate_fmri_scene(p.grid, p.k, p.t, p.baseline, p.cnr, p.seed)?;
    let frames = DataMatrix::new(observed.values.transpose(), Role::Mixtures)?;
    let (z, _) = center_and_whiten(&frames, p.k)?;
    let (w, converged) = run_engine(alg, &z, p)?;
    let maps_est = DataMatrix::new(&w * &z.values, Role::Estimates)?;
    let maps_true = DataMatrix::new(scene.maps.clone(), Role::Sources)?;
    let (_, mean_abs_corr) = pair_components(&maps_true, &maps_est)?;
    Ok(RunOutcome {
        metric_name: "mean_abs_corr",
        metric_value: mean_abs_corr,
        converged,
    })
}

pub fn single_run(p: &RunPoint) -> Result<RunOutcome> {
    match p.experiment {
        Experiment::GiniVsBeta => gini_run(p),
        Experiment::IsrVsBeta | Experiment::IsrVsT | Experiment::IsrVsN => isr_run(p),
        Experiment::FmriCnr => fmri_run(p),
    }
}
