//! Ground-truth generators: generalized Gaussian sources, random mixing
//! matrices, and fMRI-like spatiotemporal scenes with Rician noise.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::metrics::gini_index;
use crate::model::{DataMatrix, Role};

/// Generalized Gaussian density p(x) = eta * exp(-|x|^(2 beta) / (2 sigma^(2 beta))).
/// beta = 1 is the Gaussian; beta -> 0 is increasingly sparse.
#[derive(Clone, Copy, Debug)]
pub struct GgdSpec {
    pub beta: f64,
    pub sigma: f64,
    pub eta: f64,
    pub unit_variance: bool,
}

impl GgdSpec {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if beta <= 0.0 || sigma <= 0.0 {
            return Err(Error::Parameter(format!(
                "GGD requires beta > 0 and sigma > 0, got beta {} sigma {}",
                beta, sigma
            )));
        }
        let eta = beta
            / ((2f64.powf(1.0 / (2.0 * beta))) * ln_gamma(1.0 / (2.0 * beta)).exp() * sigma);
        Ok(Self {
            beta,
            sigma,
            eta,
            unit_variance: false,
        })
    }

    /// Scale chosen so that the variance is exactly 1:
    /// Var = sigma^2 * 2^(1/beta) * Gamma(3/(2 beta)) / Gamma(1/(2 beta)).
    pub fn unit_variance(beta: f64) -> Result<Self> {
        if beta <= 0.0 {
            return Err(Error::Parameter(format!("beta {} must be > 0", beta)));
        }
        let ln_sigma2 = -((1.0 / beta) * 2f64.ln() + ln_gamma(3.0 / (2.0 * beta))
            - ln_gamma(1.0 / (2.0 * beta)));
        let sigma = (0.5 * ln_sigma2).exp();
        let mut spec = Self::new(beta, sigma)?;
        spec.unit_variance = true;
        Ok(spec)
    }

    /// Analytic absolute moment E|x|^r.
    pub fn abs_moment(&self, r: f64) -> f64 {
        self.sigma.powf(r)
            * 2f64.powf(r / (2.0 * self.beta))
            * (ln_gamma((r + 1.0) / (2.0 * self.beta)) - ln_gamma(1.0 / (2.0 * self.beta))).exp()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.eta
            * (-(x.abs().powf(2.0 * self.beta)) / (2.0 * self.sigma.powf(2.0 * self.beta))).exp()
    }
}

/// Draw T samples by the gamma transform x = s * sigma * (2u)^(1/(2 beta)),
/// u ~ Gamma(1/(2 beta), 1), s uniform +/-1.
pub fn sample_ggd(spec: &GgdSpec, t: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::Parameter("sample count must be >= 1".into()));
    }
    let shape = 1.0 / (2.0 * spec.beta);
    let gamma = Gamma::new(shape, 1.0)
        .map_err(|e| Error::Parameter(format!("gamma shape {}: {}", shape, e)))?;
    let exponent = 1.0 / (2.0 * spec.beta);
    Ok((0..t)
        .map(|_| {
            let u: f64 = gamma.sample(rng);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sign * spec.sigma * (2.0 * u).powf(exponent)
        })
        .collect())
}

/// N independent unit-variance GGD sources as an N x T matrix, one derived
/// RNG stream per source.
pub fn ggd_source_matrix(n: usize, t: usize, beta: f64, seed: u64) -> Result<DataMatrix> {
    let spec = GgdSpec::unit_variance(beta)?;
    let mut values = DMatrix::zeros(n, t);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let row = sample_ggd(&spec, t, &mut rng)?;
        for (j, v) in row.into_iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    DataMatrix::new(values, Role::Sources)
}

/// Mean Gini index over independent GGD sources at each beta.
pub fn average_gini_vs_beta(
    beta_grid: &[f64],
    n_sources: usize,
    t: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if beta_grid.is_empty() {
        return Err(Error::Parameter("beta grid must be nonempty".into()));
    }
    let mut out = Vec::with_capacity(beta_grid.len());
    for (bi, &beta) in beta_grid.iter().enumerate() {
        let spec = GgdSpec::unit_variance(beta)?;
        let mut acc = 0.0;
        for s in 0..n_sources {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((bi as u64) << 32) | s as u64);
            let y = sample_ggd(&spec, t, &mut rng)?;
            acc += gini_index(&y)?;
        }
        out.push((beta, acc / n_sources as f64));
    }
    Ok(out)
}

/// Standard-normal mixing matrix, resampled until its condition number is
/// at most `cond_cap`.
pub fn random_mixing(n: usize, rng: &mut ChaCha8Rng, cond_cap: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::Parameter("mixing size must be >= 1".into()));
    }
    for _ in 0..100 {
        let a = DMatrix::from_fn(n, n, |_, _| {
            let v: f64 = StandardNormal.sample(rng);
            v
        });
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin > 0.0 && smax / smin <= cond_cap {
            return Ok(a);
        }
    }
    Err(Error::Generation(format!(
        "no mixing matrix with condition number <= {} in 100 draws",
        cond_cap
    )))
}

/// An fMRI-like scene: spatial blob maps, decorrelated smooth time
/// courses, a baseline, and a Rician noise level targeting a CNR.
#[derive(Clone, Debug)]
pub struct FmriScene {
    pub grid: usize,
    pub n_components: usize,
    /// K x g^2, each row a nonnegative map with peak amplitude 1.
    pub maps: DMatrix<f64>,
    pub baseline: f64,
    /// K x T_f, decorrelated, roughly unit variance.
    pub timecourses: DMatrix<f64>,
    pub cnr: f64,
    pub noise_sigma: f64,
    /// Per-component signal amplitude (base scale with 5% jitter applied).
    pub amplitudes: Vec<f64>,
    pub seed: u64,
}

impl FmriScene {
    /// Noise-free pixel signal, g^2 x T_f: baseline + sum_k amp_k map_k tc_k.
    pub fn noise_free_signal(&self) -> DMatrix<f64> {
        let mut scaled = self.maps.clone();
        for (k, mut row) in scaled.row_iter_mut().enumerate() {
            row *= self.amplitudes[k];
        }
        let mut sig = scaled.transpose() * &self.timecourses;
        sig.add_scalar_mut(self.baseline);
        sig
    }
}

const FMRI_NOISE_SIGMA: f64 = 20.0;

/// Generate a scene and its Rician-noised observation (g^2 x T_f).
/// `cnr = f64::INFINITY` is the noiseless sentinel.
pub fn generate_fmri_scene(
    grid: usize,
    k: usize,
    t_f: usize,
    baseline: f64,
    cnr: f64,
    seed: u64,
) -> Result<(FmriScene, DataMatrix)> {
    if !(cnr > 0.0) {
        return Err(Error::Parameter(format!("cnr {} must be > 0", cnr)));
    }
    if k > 30 {
        return Err(Error::Parameter(format!("component count {} exceeds 30", k)));
    }
    if grid < 32 {
        return Err(Error::Parameter(format!("grid {} below minimum 32", grid)));
    }
    if t_f < k {
        return Err(Error::Parameter(format!(
            "need T_f >= K for PCA reduction, got {} < {}",
            t_f, k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid as f64;
    let radius = g / 16.0;
    let npix = grid * grid;

    // Isotropic Gaussian blobs at rejection-sampled centers; pairwise
    // normalized overlap must stay below 0.5.
    let mut maps = DMatrix::zeros(k, npix);
    let mut centers: Vec<(f64, f64)> = Vec::new();
    let mut rejections = 0usize;
    while centers.len() < k {
        // pixel-centered so every map peaks at exactly 1
        let cx = (0.15 * g + 0.7 * g * rng.gen::<f64>()).round();
        let cy = (0.15 * g + 0.7 * g * rng.gen::<f64>()).round();
        let row = centers.len();
        for py in 0..grid {
            for px in 0..grid {
                let dx = px as f64 - cx;
                let dy = py as f64 - cy;
                maps[(row, py * grid + px)] =
                    (-(dx * dx + dy * dy) / (2.0 * radius * radius)).exp();
            }
        }
        let ok = (0..row).all(|other| {
            let a = maps.row(row);
            let b = maps.row(other);
            let dot = a.dot(&b);
            dot / (a.norm() * b.norm()) < 0.5
        });
        if ok {
            centers.push((cx, cy));
        } else {
            rejections += 1;
            if rejections > 10_000 {
                return Err(Error::Generation(
                    "overlap constraint unsatisfiable after 1e4 rejections".into(),
                ));
            }
        }
    }

    // Smoothed white-noise time courses, decorrelated by orthogonalization
    // and rescaled to unit variance.
    let mut tc = DMatrix::zeros(k, t_f);
    for i in 0..k {
        let white: Vec<f64> = (0..t_f + 4).map(|_| StandardNormal.sample(&mut rng)).collect();
        for j in 0..t_f {
            tc[(i, j)] = white[j..j + 5].iter().sum::<f64>() / 5.0;
        }
        let mean = tc.row(i).sum() / t_f as f64;
        for j in 0..t_f {
            tc[(i, j)] -= mean;
        }
    }
    // Gram-Schmidt across rows
    for i in 0..k {
        for p in 0..i {
            let prev = tc.row(p).clone_owned();
            let proj = tc.row(i).dot(&prev) / prev.norm_squared();
            let mut row = tc.row_mut(i);
            row -= prev * proj;
        }
        let norm = tc.row(i).norm();
        if norm < 1e-9 {
            return Err(Error::Generation("degenerate time courses".into()));
        }
        let scale = (t_f as f64).sqrt() / norm;
        tc.row_mut(i).scale_mut(scale);
    }

    // Per-component 5% amplitude jitter, then a base scale chosen so the
    // most active pixel's temporal std over noise sigma equals the CNR.
    let jitter: Vec<f64> = (0..k)
        .map(|_| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (1.0 + 0.05 * n).max(0.5)
        })
        .collect();
    let mut jittered = maps.clone();
    for (i, mut row) in jittered.row_iter_mut().enumerate() {
        row *= jitter[i];
    }
    let fluct = jittered.transpose() * &tc; // npix x t_f, zero-mean-ish rows
    let mut s_max: f64 = 0.0;
    for p in 0..npix {
        let row = fluct.row(p);
        let mean = row.sum() / t_f as f64;
        let var = row.iter().map(|v| v * v).sum::<f64>() / t_f as f64 - mean * mean;
        s_max = s_max.max(var.sqrt());
    }
    if s_max <= 0.0 {
        return Err(Error::Generation("zero signal fluctuation".into()));
    }
    let noiseless = cnr.is_infinite();
    let noise_sigma = if noiseless { 0.0 } else { FMRI_NOISE_SIGMA };
    let base_amp = if noiseless {
        FMRI_NOISE_SIGMA / s_max
    } else {
        cnr * noise_sigma / s_max
    };
    let amplitudes: Vec<f64> = jitter.iter().map(|j| base_amp * j).collect();

    let scene = FmriScene {
        grid,
        n_components: k,
        maps,
        baseline,
        timecourses: tc,
        cnr,
        noise_sigma,
        amplitudes,
        seed,
    };

    let signal = scene.noise_free_signal();
    let mut observed = DMatrix::zeros(npix, t_f);
    for p in 0..npix {
        for t in 0..t_f {
            if noiseless {
                observed[(p, t)] = signal[(p, t)].abs();
            } else {
                let n1: f64 = StandardNormal.sample(&mut rng);
                let n2: f64 = StandardNormal.sample(&mut rng);
                let re = signal[(p, t)] + noise_sigma * n1;
                let im = noise_sigma * n2;
                observed[(p, t)] = (re * re + im * im).sqrt();
            }
        }
    }
    Ok((scene, DataMatrix::new(observed, Role::Mixtures)?))
}

/// Export a scene: one CSV per component map, a manifest of key-value
/// lines, and the time courses as a CSV matrix.
pub fn export_scene(dir: &Path, scene: &FmriScene, observed: &DataMatrix) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for ki in 0..scene.n_components {
        let mut m = DMatrix::zeros(scene.grid, scene.grid);
        for py in 0..scene.grid {
            for px in 0..scene.grid {
                m[(py, px)] = scene.maps[(ki, py * scene.grid + px)];
            }
        }
        crate::model::write_matrix_csv(&dir.join(format!("map_{:02}.csv", ki)), &m)?;
    }
    crate::model::write_matrix_csv(&dir.join("timecourses.csv"), &scene.timecourses)?;
    crate::model::write_matrix_csv(&dir.join("observed.csv"), &observed.values)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("manifest.txt"))?);
    writeln!(f, "grid = {}", scene.grid)?;
    writeln!(f, "k = {}", scene.n_components)?;
    writeln!(f, "baseline = {}", scene.baseline)?;
    writeln!(f, "cnr = {}", scene.cnr)?;
    writeln!(f, "noise_sigma = {}", scene.noise_sigma)?;
    writeln!(f, "seed = {}", scene.seed)?;
    writeln!(f, "amplitude_jitter = 5% per component")?;
    Ok(())
}
