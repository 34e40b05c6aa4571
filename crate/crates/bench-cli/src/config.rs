//! Flat `key = value` experiment configs with `#` comments and
//! comma-separated lists. Validation reports every problem at once, each
//! tagged with the key and the line it came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::{BenchError, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Experiment {
    GiniVsBeta,
    IsrVsBeta,
    IsrVsT,
    IsrVsN,
    FmriCnr,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GiniVsBeta => "gini_vs_beta",
            Experiment::IsrVsBeta => "isr_vs_beta",
            Experiment::IsrVsT => "isr_vs_T",
            Experiment::IsrVsN => "isr_vs_N",
            Experiment::FmriCnr => "fmri_cnr",
        }
    }

    pub fn from_name(s: &str) -> Option<Experiment> {
        match s {
            "gini_vs_beta" => Some(Experiment::GiniVsBeta),
            "isr_vs_beta" => Some(Experiment::IsrVsBeta),
            "isr_vs_T" => Some(Experiment::IsrVsT),
            "isr_vs_N" => Some(Experiment::IsrVsN),
            "fmri_cnr" => Some(Experiment::FmriCnr),
            _ => None,
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            Experiment::GiniVsBeta => "mean_gini",
            Experiment::FmriCnr => "mean_abs_corr",
            _ => "normalized_isr",
        }
    }

    fn default_sweep(self) -> Vec<f64> {
        match self {
            Experiment::GiniVsBeta | Experiment::IsrVsBeta => {
                (0..9).map(|i| 0.1 + 0.05 * i as f64).collect()
            }
            Experiment::IsrVsT => vec![250.0, 500.0, 1000.0, 2000.0, 4000.0],
            Experiment::IsrVsN => vec![5.0, 10.0, 15.0, 20.0],
            Experiment::FmriCnr => vec![0.05, 0.1, 0.5, 1.0],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Algorithm {
    SparseEbm,
    Ebm,
    InfomaxNg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SparseEbm => "sparse_ebm",
            Algorithm::Ebm => "ebm",
            Algorithm::InfomaxNg => "infomax_ng",
        }
    }

    pub fn from_name(s: &str) -> Option<Algorithm> {
        match s {
            "sparse_ebm" => Some(Algorithm::SparseEbm),
            "ebm" => Some(Algorithm::Ebm),
            "infomax_ng" => Some(Algorithm::InfomaxNg),
            _ => None,
        }
    }
}

/// Fixed (non-swept) experiment parameters.
#[derive(Clone, PartialEq, Debug)]
pub struct Fixed {
    pub n: usize,
    pub t: usize,
    pub beta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub runs: u32,
    pub master_seed: u64,
    pub grid: usize,
    pub k: usize,
    pub baseline: f64,
    pub tol: f64,
}

impl Default for Fixed {
    fn default() -> Self {
        Self {
            n: 10,
            t: 1000,
            beta: 0.1,
            lambda: 0.0,
            epsilon: 1e-2,
            runs: 300,
            master_seed: 0,
            grid: 64,
            k: 10,
            baseline: 800.0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub algorithms: Vec<Algorithm>,
    pub sweep_values: Vec<f64>,
    pub fixed: Fixed,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    pub fn new(experiment: Experiment) -> Self {
        let algorithms = match experiment {
            Experiment::GiniVsBeta => vec![],
            _ => vec![Algorithm::SparseEbm, Algorithm::Ebm],
        };
        Self {
            experiment,
            algorithms,
            sweep_values: experiment.default_sweep(),
            fixed: Fixed::default(),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Serialize to the same flat text format `load_config` reads; a
    /// load of the output reproduces the config exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let algs: Vec<&str> = self.algorithms.iter().map(|a| a.name()).collect();
        let _ = writeln!(s, "algorithms = {}", algs.join(", "));
        let vals: Vec<String> = self.sweep_values.iter().map(|v| format!("{}", v)).collect();
        let _ = writeln!(s, "sweep_values = {}", vals.join(", "));
        let f = &self.fixed;
        let _ = writeln!(s, "n = {}", f.n);
        let _ = writeln!(s, "t = {}", f.t);
        let _ = writeln!(s, "beta = {}", f.beta);
        let _ = writeln!(s, "lambda = {}", f.lambda);
        let _ = writeln!(s, "epsilon = {}", f.epsilon);
        let _ = writeln!(s, "runs = {}", f.runs);
        let _ = writeln!(s, "master_seed = {}", f.master_seed);
        let _ = writeln!(s, "grid = {}", f.grid);
        let _ = writeln!(s, "k = {}", f.k);
        let _ = writeln!(s, "baseline = {}", f.baseline);
        let _ = writeln!(s, "tol = {}", f.tol);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_list(raw: &str) -> Vec<String> {
    raw.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn parse_f64_sweep(raw: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in parse_list(raw) {
        if part == "inf" {
            out.push(f64::INFINITY);
        } else {
            out.push(
                part.parse::<f64>()
                    .map_err(|_| format!("'{}' is not a number", part))?,
            );
        }
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if entries
                    .insert(key.clone(), (v.trim().to_string(), lineno + 1))
                    .is_some()
                {
                    errors.push(format!("line {}: duplicate key '{}'", lineno + 1, key));
                }
            }
            None => errors.push(format!(
                "line {}: expected 'key = value', got '{}'",
                lineno + 1,
                line
            )),
        }
    }

    let mut take = |k: &str| entries.remove(k);

    let experiment = match take("experiment") {
        Some((v, line)) => match Experiment::from_name(&v) {
            Some(e) => Some(e),
            None => {
                errors.push(format!(
                    "line {}: experiment '{}' unknown (gini_vs_beta, isr_vs_beta, isr_vs_T, isr_vs_N, fmri_cnr)",
                    line, v
                ));
                None
            }
        },
        None => {
            errors.push("missing required key 'experiment'".to_string());
            None
        }
    };

    // fall back to a dummy so the remaining keys still get checked
    let mut cfg = SweepConfig::new(experiment.unwrap_or(Experiment::IsrVsBeta));

    if let Some((v, line)) = take("algorithms") {
        let mut algs = Vec::new();
        for part in parse_list(&v) {
            match Algorithm::from_name(&part) {
                Some(a) => algs.push(a),
                None => errors.push(format!(
                    "line {}: algorithms: '{}' unknown (sparse_ebm, ebm, infomax_ng)",
                    line, part
                )),
            }
        }
        cfg.algorithms = algs;
    }

    // `cnr` is an alias for the sweep values of the fmri experiment
    for key in ["sweep_values", "cnr"] {
        if let Some((v, line)) = take(key) {
            match parse_f64_sweep(&v) {
                Ok(vals) => cfg.sweep_values = vals,
                Err(e) => errors.push(format!("line {}: {}: {}", line, key, e)),
            }
        }
    }

    macro_rules! scalar {
        ($key:expr, $slot:expr, $ty:ty) => {
            if let Some((v, line)) = take($key) {
                match v.parse::<$ty>() {
                    Ok(x) => $slot = x,
                    Err(_) => errors.push(format!(
                        "line {}: {}: '{}' is not a valid {}",
                        line,
                        $key,
                        v,
                        stringify!($ty)
                    )),
                }
            }
        };
    }

    scalar!("n", cfg.fixed.n, usize);
    scalar!("t", cfg.fixed.t, usize);
    scalar!("beta", cfg.fixed.beta, f64);
    scalar!("lambda", cfg.fixed.lambda, f64);
    scalar!("epsilon", cfg.fixed.epsilon, f64);
    scalar!("runs", cfg.fixed.runs, u32);
    scalar!("master_seed", cfg.fixed.master_seed, u64);
    scalar!("grid", cfg.fixed.grid, usize);
    scalar!("k", cfg.fixed.k, usize);
    scalar!("baseline", cfg.fixed.baseline, f64);
    scalar!("tol", cfg.fixed.tol, f64);
    if let Some((v, _)) = take("output_dir") {
        cfg.output_dir = PathBuf::from(v);
    }
    drop(take);

    for (key, (_, line)) in &entries {
        errors.push(format!("line {}: unknown key '{}'", line, key));
    }

    validate(&cfg, &mut errors);

    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(BenchError::Validation(errors))
    }
}

fn validate(cfg: &SweepConfig, errors: &mut Vec<String>) {
    let f = &cfg.fixed;
    if f.runs == 0 {
        errors.push("runs: must be >= 1".to_string());
    }
    if cfg.sweep_values.is_empty() {
        errors.push("sweep_values: must be nonempty".to_string());
    }
    if cfg.sweep_values.windows(2).any(|w| w[0] >= w[1]) {
        errors.push("sweep_values: must be strictly increasing".to_string());
    }
    if f.n < 2 {
        errors.push("n: need at least 2 sources".to_string());
    }
    if f.t < f.n {
        errors.push(format!("t: need t >= n, got {} < {}", f.t, f.n));
    }
    if !(f.beta > 0.0 && f.beta <= 1.0) {
        errors.push(format!("beta: {} outside (0, 1]", f.beta));
    }
    if f.lambda < 0.0 {
        errors.push(format!("lambda: {} must be >= 0", f.lambda));
    }
    if !(f.epsilon > 0.0) {
        errors.push(format!("epsilon: {} must be > 0", f.epsilon));
    }
    if !(f.tol > 0.0) {
        errors.push(format!("tol: {} must be > 0", f.tol));
    }

    match cfg.experiment {
        Experiment::GiniVsBeta => {
            if !cfg.algorithms.is_empty() {
                errors.push("algorithms: not applicable to gini_vs_beta".to_string());
            }
            for &b in &cfg.sweep_values {
                if !(b > 0.0 && b <= 1.0) {
                    errors.push(format!("sweep_values: beta {} outside (0, 1]", b));
                }
            }
        }
        Experiment::IsrVsBeta => {
            check_algs(cfg, errors);
            for &b in &cfg.sweep_values {
                if !(b > 0.0 && b <= 1.0) {
                    errors.push(format!("sweep_values: beta {} outside (0, 1]", b));
                }
            }
        }
        Experiment::IsrVsT => {
            check_algs(cfg, errors);
            for &t in &cfg.sweep_values {
                if t.fract() != 0.0 || t < f.n as f64 {
                    errors.push(format!("sweep_values: T {} must be an integer >= n", t));
                }
            }
        }
        Experiment::IsrVsN => {
            check_algs(cfg, errors);
            for &n in &cfg.sweep_values {
                if n.fract() != 0.0 || n < 2.0 || n > f.t as f64 {
                    errors.push(format!("sweep_values: N {} must be an integer in 2..=t", n));
                }
            }
        }
        Experiment::FmriCnr => {
            check_algs(cfg, errors);
            for &c in &cfg.sweep_values {
                if !(c > 0.0) {
                    errors.push(format!("sweep_values: cnr {} must be > 0", c));
                }
            }
            if f.grid < 32 {
                errors.push(format!("grid: {} below minimum 32", f.grid));
            }
            if f.k == 0 || f.k > 30 {
                errors.push(format!("k: {} outside 1..=30", f.k));
            }
            if f.t < f.k {
                errors.push(format!("t: need t >= k frames, got {} < {}", f.t, f.k));
            }
            if !(f.baseline > 0.0) {
                errors.push(format!("baseline: {} must be > 0", f.baseline));
            }
        }
    }
}

fn check_algs(cfg: &SweepConfig, errors: &mut Vec<String>) {
    if cfg.algorithms.is_empty() {
        errors.push("algorithms: at least one required".to_string());
    }
    let mut seen = cfg.algorithms.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != cfg.algorithms.len() {
        errors.push("algorithms: duplicates not allowed".to_string());
    }
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        BenchError::Validation(vec![format!("cannot read {}: {}", path.display(), e)])
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("experiment = isr_vs_beta\n").unwrap();
        assert_eq!(cfg.fixed.runs, 300);
        assert_eq!(cfg.fixed.tol, 1e-6);
        assert_eq!(cfg.algorithms, vec![Algorithm::SparseEbm, Algorithm::Ebm]);
        assert_eq!(cfg.sweep_values.len(), 9);
    }

    #[test]
    fn zero_runs_rejected_naming_the_key() {
        let err = parse_config("experiment = isr_vs_beta\nruns = 0\n").unwrap_err();
        match err {
            BenchError::Validation(msgs) => {
                assert!(msgs.iter().any(|m| m.contains("runs")), "{:?}", msgs)
            }
            other => panic!("wrong error {:?}", other),
        }
    }

    #[test]
    fn unknown_key_reported_with_line() {
        let err = parse_config("experiment = isr_vs_beta\n\nbogus = 3\n").unwrap_err();
        match err {
            BenchError::Validation(msgs) => {
                assert!(
                    msgs.iter().any(|m| m.contains("line 3") && m.contains("bogus")),
                    "{:?}",
                    msgs
                )
            }
            other => panic!("wrong error {:?}", other),
        }
    }

    #[test]
    fn all_errors_reported_not_just_first() {
        let err =
            parse_config("experiment = isr_vs_beta\nruns = 0\nepsilon = -1\nbogus = 3\n")
                .unwrap_err();
        match err {
            BenchError::Validation(msgs) => assert!(msgs.len() >= 3, "{:?}", msgs),
            other => panic!("wrong error {:?}", other),
        }
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let mut cfg = SweepConfig::new(Experiment::FmriCnr);
        cfg.algorithms = vec![Algorithm::SparseEbm, Algorithm::InfomaxNg];
        cfg.sweep_values = vec![0.05, 0.1, 0.5];
        cfg.fixed.lambda = 0.31;
        cfg.fixed.epsilon = 0.1;
        cfg.fixed.t = 260;
        cfg.fixed.runs = 10;
        cfg.fixed.master_seed = 12345;
        let text = cfg.to_text();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        // and the round trip is textually stable
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn cnr_is_an_alias_for_sweep_values() {
        let cfg = parse_config(
            "experiment = fmri_cnr\nt = 260\ncnr = 0.05, 0.1, 0.5, 1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep_values, vec![0.05, 0.1, 0.5, 1.0]);
        let noiseless = parse_config("experiment = fmri_cnr\nt = 260\ncnr = inf\n").unwrap();
        assert!(noiseless.sweep_values[0].is_infinite());
    }

    #[test]
    fn unsorted_sweep_rejected() {
        let err =
            parse_config("experiment = isr_vs_beta\nsweep_values = 0.3, 0.1\n").unwrap_err();
        assert!(matches!(err, BenchError::Validation(_)));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config(
            "# a comment\nexperiment = gini_vs_beta  # trailing\n\nruns = 20\nalgorithms =\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::GiniVsBeta);
        assert_eq!(cfg.fixed.runs, 20);
        assert!(cfg.algorithms.is_empty());
    }
}
