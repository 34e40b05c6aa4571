//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line with the measured numbers before asserting.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bench_cli::config::{Algorithm, Experiment, SweepConfig};
use bench_cli::record::runs_csv;
use bench_cli::summary::{summarize, SummaryRow};
use bench_cli::sweep::run_sweep;
use sparseica::datagen::{average_gini_vs_beta, ggd_source_matrix, sample_ggd, GgdSpec};
use sparseica::engines::{random_orthogonal, smoothed_l1, sparse_cost_gradient};
use sparseica::entropy::EbmEstimator;
use sparseica::metrics::{auction_assign, gini_index, normalized_isr, pair_components};
use sparseica::model::{center_and_whiten, decoupling_vector, DataMatrix, Role};

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("criterion {}: {} — {}", n, if ok { "PASS" } else { "FAIL" }, detail);
    assert!(ok, "criterion {} failed: {}", n, detail);
}

fn median_of(rows: &[SummaryRow], alg: &str, sweep: f64) -> f64 {
    rows.iter()
        .find(|r| r.algorithm == alg && (r.sweep_value - sweep).abs() < 1e-12)
        .map(|r| r.median)
        .unwrap_or(f64::NAN)
}

fn mean_of(rows: &[SummaryRow], alg: &str, sweep: f64) -> f64 {
    rows.iter()
        .find(|r| r.algorithm == alg && (r.sweep_value - sweep).abs() < 1e-12)
        .map(|r| r.mean)
        .unwrap_or(f64::NAN)
}

#[test]
fn criterion_01_gradient_matches_finite_differences() {
    let start = std::time::Instant::now();
    let est = EbmEstimator::shared();
    let mut worst: f64 = 0.0;
    let mut checked = 0u32;
    let mut combo = 0usize;
    for case in 0..50u64 {
        let n = [3usize, 6][combo % 2];
        let beta = [0.1, 0.5][(combo / 2) % 2];
        let lambda = [0.0, 1.0][(combo / 4) % 2];
        let eps = [1e-1, 1e-2][(combo / 8) % 2];
        combo += 1;
        let s = ggd_source_matrix(n, 500, beta, 100 + case).unwrap();
        let (z, _) = center_and_whiten(&s, n).unwrap();
        let w_all = random_orthogonal(n, 1000 + case);
        let w = w_all.row(0).transpose();
        let h = decoupling_vector(&w_all, 0).unwrap();
        let y: Vec<f64> = z.values.tr_mul(&w).iter().copied().collect();
        let k = est.estimate_entropy(&y).unwrap().selected_function;
        let grad = sparse_cost_gradient(&w, &z.values, &h, lambda, eps, est).unwrap();
        let frozen = |wp: &DVector<f64>| -> f64 {
            let yp: Vec<f64> = z.values.tr_mul(wp).iter().copied().collect();
            let hval = est.estimate_with_function(&yp, k).unwrap().value;
            let sp = if lambda > 0.0 { lambda * smoothed_l1(&yp, eps).unwrap() } else { 0.0 };
            hval - h.dot(wp).abs().ln() + sp
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + case);
        for _ in 0..2 {
            let mut u = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
            u -= &w * w.dot(&u);
            let un = u.norm();
            if un < 1e-8 {
                continue;
            }
            u /= un;
            let delta = 1e-5;
            let fd = (frozen(&(&w + &u * delta)) - frozen(&(&w - &u * delta))) / (2.0 * delta);
            let an = grad.dot(&u);
            let rel = (an - fd).abs() / an.abs().max(fd.abs()).max(1e-2);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-4 && elapsed < 60.0;
    verdict(
        1,
        ok,
        &format!(
            "{} directional derivatives, worst relative error {:.2e}, {:.1}s",
            checked, worst, elapsed
        ),
    );
}

#[test]
fn criterion_02_entropy_anchors() {
    let start = std::time::Instant::now();
    let est = EbmEstimator::shared();
    let standardized = |raw: &[f64]| -> Vec<f64> {
        let t = raw.len() as f64;
        let m = raw.iter().sum::<f64>() / t;
        let sd = (raw.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t).sqrt();
        raw.iter().map(|v| (v - m) / sd).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let gauss = sample_ggd(&GgdSpec::unit_variance(1.0).unwrap(), 100_000, &mut rng).unwrap();
    let h_gauss = est.estimate_entropy(&standardized(&gauss)).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let lap = sample_ggd(&GgdSpec::unit_variance(0.5).unwrap(), 100_000, &mut rng).unwrap();
    let h_lap = est.estimate_entropy(&standardized(&lap)).unwrap().value;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (h_gauss - 1.4189).abs() <= 0.02
        && (1.3266..=1.42).contains(&h_lap)
        && elapsed < 10.0;
    verdict(
        2,
        ok,
        &format!("gaussian {:.4} nats, laplace {:.4} nats, {:.1}s", h_gauss, h_lap, elapsed),
    );
}

#[test]
fn criterion_03_gini_strictly_decreasing_in_beta() {
    let start = std::time::Instant::now();
    let grid: Vec<f64> = (0..9).map(|i| 0.1 + 0.05 * i as f64).collect();
    let curve = average_gini_vs_beta(&grid, 20, 10_000, 7).unwrap();
    let strictly_decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = strictly_decreasing && elapsed < 60.0;
    let vals: Vec<String> = curve.iter().map(|(_, g)| format!("{:.3}", g)).collect();
    verdict(3, ok, &format!("gini by beta: [{}], {:.1}s", vals.join(", "), elapsed));
}

#[test]
fn criterion_04_isr_vs_beta_desk_scale() {
    let start = std::time::Instant::now();
    let mut cfg = SweepConfig::new(Experiment::IsrVsBeta);
    cfg.sweep_values = vec![0.1, 0.5];
    cfg.algorithms = vec![Algorithm::SparseEbm, Algorithm::Ebm];
    cfg.fixed.n = 10;
    cfg.fixed.t = 1000;
    cfg.fixed.lambda = 1e4;
    cfg.fixed.epsilon = 1e-2;
    cfg.fixed.runs = 50;
    let (records, _) = run_sweep(&cfg, 1).unwrap();
    let rows = summarize(&records).unwrap();
    let s01 = median_of(&rows, "sparse_ebm", 0.1);
    let e01 = median_of(&rows, "ebm", 0.1);
    let s05 = median_of(&rows, "sparse_ebm", 0.5);
    let e05 = median_of(&rows, "ebm", 0.5);
    let clause_a = s01 <= e01;
    let clause_b = (s05 - e05) >= -0.2 * e05;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = clause_a && clause_b && elapsed < 900.0;
    verdict(
        4,
        ok,
        &format!(
            "beta 0.1 medians sparse {:.3e} vs ebm {:.3e} ({}), beta 0.5 sparse {:.3e} vs ebm {:.3e} ({}), {:.0}s",
            s01,
            e01,
            if clause_a { "ok" } else { "violated" },
            s05,
            e05,
            if clause_b { "ok" } else { "violated" },
            elapsed
        ),
    );
}

#[test]
fn criterion_05_isr_nonincreasing_in_t() {
    let start = std::time::Instant::now();
    let mut cfg = SweepConfig::new(Experiment::IsrVsT);
    cfg.sweep_values = vec![250.0, 500.0, 1000.0, 2000.0, 4000.0];
    cfg.algorithms = vec![Algorithm::SparseEbm];
    cfg.fixed.n = 10;
    cfg.fixed.beta = 0.1;
    cfg.fixed.lambda = 1e4;
    cfg.fixed.epsilon = 1e-2;
    cfg.fixed.runs = 30;
    let (records, _) = run_sweep(&cfg, 1).unwrap();
    let rows = summarize(&records).unwrap();
    let medians: Vec<f64> =
        cfg.sweep_values.iter().map(|&t| median_of(&rows, "sparse_ebm", t)).collect();
    let mut violations = 0;
    let mut worst_excess = 0.0f64;
    for w in medians.windows(2) {
        if w[1] > w[0] {
            violations += 1;
            worst_excess = worst_excess.max((w[1] - w[0]) / w[0]);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (violations == 0 || (violations == 1 && worst_excess <= 0.10)) && elapsed < 1200.0;
    let vals: Vec<String> = medians.iter().map(|v| format!("{:.3e}", v)).collect();
    verdict(
        5,
        ok,
        &format!(
            "medians by T: [{}], {} adjacent violations (worst +{:.0}%), {:.0}s",
            vals.join(", "),
            violations,
            worst_excess * 100.0,
            elapsed
        ),
    );
}

#[test]
fn criterion_06_sparse_beats_ebm_across_n() {
    let start = std::time::Instant::now();
    let mut cfg = SweepConfig::new(Experiment::IsrVsN);
    cfg.sweep_values = vec![5.0, 10.0, 15.0, 20.0];
    cfg.algorithms = vec![Algorithm::SparseEbm, Algorithm::Ebm];
    cfg.fixed.t = 1000;
    cfg.fixed.beta = 0.1;
    cfg.fixed.lambda = 1e4;
    cfg.fixed.epsilon = 1e-2;
    cfg.fixed.runs = 30;
    let (records, _) = run_sweep(&cfg, 1).unwrap();
    let rows = summarize(&records).unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for &n in &cfg.sweep_values {
        let s = median_of(&rows, "sparse_ebm", n);
        let e = median_of(&rows, "ebm", n);
        if !(s <= e) {
            ok = false;
        }
        detail.push(format!("N={}: sparse {:.3e} vs ebm {:.3e}", n as usize, s, e));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok = ok && elapsed < 1500.0;
    verdict(6, ok, &format!("{}, {:.0}s", detail.join("; "), elapsed));
}

#[test]
fn criterion_07_fmri_correlation_vs_cnr() {
    let start = std::time::Instant::now();
    let mut cfg = SweepConfig::new(Experiment::FmriCnr);
    cfg.sweep_values = vec![0.05, 0.1, 0.5, 1.0];
    cfg.algorithms = vec![Algorithm::SparseEbm, Algorithm::Ebm, Algorithm::InfomaxNg];
    cfg.fixed.grid = 64;
    cfg.fixed.k = 10;
    cfg.fixed.t = 260;
    cfg.fixed.baseline = 800.0;
    cfg.fixed.lambda = 0.31;
    cfg.fixed.epsilon = 1e-1;
    cfg.fixed.runs = 10;
    let (records, _) = run_sweep(&cfg, 1).unwrap();
    let rows = summarize(&records).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for alg in ["sparse_ebm", "ebm", "infomax_ng"] {
        let means: Vec<f64> =
            cfg.sweep_values.iter().map(|&c| mean_of(&rows, alg, c)).collect();
        let increasing = means.windows(2).all(|w| w[1] > w[0]);
        if !increasing {
            ok = false;
        }
        let vals: Vec<String> = means.iter().map(|v| format!("{:.3}", v)).collect();
        detail.push(format!(
            "{} [{}]{}",
            alg,
            vals.join(", "),
            if increasing { "" } else { " not increasing" }
        ));
    }
    for &cnr in &[0.05, 0.1] {
        let s = mean_of(&rows, "sparse_ebm", cnr);
        let e = mean_of(&rows, "ebm", cnr);
        if !(s >= e) {
            ok = false;
            detail.push(format!("CNR {}: sparse {:.3} < ebm {:.3}", cnr, s, e));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok = ok && elapsed < 1200.0;
    verdict(7, ok, &format!("{}, {:.0}s", detail.join("; "), elapsed));
}

#[test]
fn criterion_08_auction_matches_exhaustive() {
    fn best_permutation(score: &DMatrix<f64>) -> f64 {
        let n = score.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::NEG_INFINITY;
        // Heap's algorithm
        let mut c = vec![0usize; n];
        let total = |p: &[usize]| -> f64 {
            p.iter().enumerate().map(|(i, &j)| score[(i, j)]).sum()
        };
        best = best.max(total(&perm));
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                best = best.max(total(&perm));
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        best
    }
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_gap = 0.0f64;
    for case in 0..200 {
        let n = 2 + case % 5; // sizes 2..=6
        let score = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 10.0 - 5.0);
        let auction = auction_assign(&score, 1e-7).unwrap();
        let exact = best_permutation(&score);
        worst_gap = worst_gap.max(exact - auction.total_score);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_gap <= 1e-6 && elapsed < 5.0;
    verdict(8, ok, &format!("worst optimality gap {:.2e}, {:.2}s", worst_gap, elapsed));
}

#[test]
fn criterion_09_metric_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // ISR of permutation * diagonal global matrices
    let mut worst_isr = 0.0f64;
    for case in 0..100 {
        let n = 2 + case % 7;
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut g = DMatrix::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            let mut s = rng.gen::<f64>() * 4.0 - 2.0;
            if s.abs() < 0.1 {
                s = 0.5;
            }
            g[(i, j)] = s;
        }
        worst_isr = worst_isr.max(normalized_isr(&g).unwrap().normalized_isr);
    }
    // Gini exact values
    let g_const = gini_index(&vec![1.0; 64]).unwrap();
    let t = 50usize;
    let mut one_sparse = vec![0.0; t];
    one_sparse[17] = 3.0;
    let g_sparse = gini_index(&one_sparse).unwrap();
    let gini_ok = g_const == 0.0 && (g_sparse - (1.0 - 1.0 / t as f64)).abs() < 1e-15;
    // pair_components under permutation + sign flip + scaling
    let s = ggd_source_matrix(6, 400, 0.3, 3).unwrap();
    let mut y = DMatrix::zeros(6, 400);
    let order = [3usize, 0, 5, 1, 4, 2];
    for (i, &j) in order.iter().enumerate() {
        let scale = if i % 2 == 0 { -1.7 } else { 0.4 };
        y.row_mut(i).copy_from(&(s.values.row(j) * scale));
    }
    let y = DataMatrix::new(y, Role::Estimates).unwrap();
    let (_, mean_corr) = pair_components(&s, &y).unwrap();
    let ok = worst_isr <= 1e-12 && gini_ok && (mean_corr - 1.0).abs() <= 1e-10;
    verdict(
        9,
        ok,
        &format!(
            "worst perm-diag ISR {:.2e}, gini(const) {}, gini(1-sparse) err {:.1e}, pair corr {:.12}",
            worst_isr,
            g_const,
            (g_sparse - (1.0 - 1.0 / t as f64)).abs(),
            mean_corr
        ),
    );
}

#[test]
fn criterion_10_sweep_determinism_across_workers() {
    let mut cfg = SweepConfig::new(Experiment::IsrVsBeta);
    cfg.sweep_values = vec![0.1, 0.3];
    cfg.algorithms = vec![Algorithm::SparseEbm, Algorithm::Ebm];
    cfg.fixed.n = 5;
    cfg.fixed.t = 250;
    cfg.fixed.lambda = 1.0;
    cfg.fixed.runs = 4;
    cfg.fixed.master_seed = 99;
    let (r1, _) = run_sweep(&cfg, 1).unwrap();
    let (r8, _) = run_sweep(&cfg, 8).unwrap();
    let csv1 = runs_csv(&r1);
    let csv8 = runs_csv(&r8);
    let ok = csv1 == csv8;
    verdict(
        10,
        ok,
        &format!("workers 1 vs 8: {} bytes each, byte-identical: {}", csv1.len(), ok),
    );
}
