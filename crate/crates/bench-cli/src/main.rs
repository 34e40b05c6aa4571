use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bench_cli::config::{load_config, Algorithm, Experiment, SweepConfig};
use bench_cli::record::{read_runs_csv, write_runs_csv, write_timings_csv, RunRecord};
use bench_cli::runner::{single_run, RunPoint};
use bench_cli::seed::child_seed;
use bench_cli::summary::{read_summary_csv, summarize, write_summary_csv};
use bench_cli::svg::{render_plot, PlotSpec};
use bench_cli::sweep::run_sweep;
use bench_cli::{BenchError, Result};

#[derive(Parser)]
#[command(
    name = "bench-cli",
    about = "Monte-Carlo benchmark harness for the sparse ICA library"
)]
struct Cli {
    /// Experiment config file (flat key = value text)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's runs-per-point
    #[arg(long, global = true)]
    runs: Option<u32>,
    /// Override the config's master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: SPARSEICA_WORKERS, then 1)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the run-0 dataset of every sweep point as CSV files
    Gen,
    /// Execute run 0 of every (algorithm, sweep value) point and print metrics
    Run,
    /// Full Monte-Carlo sweep: runs.csv, timings.csv, summary.csv, manifest
    Sweep,
    /// Aggregate an existing runs.csv into summary.csv
    Summarize {
        /// runs.csv to read (default: <out>/runs.csv)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Render summary.csv as an SVG line plot
    Plot {
        /// summary.csv to read (default: <out>/summary.csv)
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        log_y: bool,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Re-execute one recorded run: --record algorithm:sweep_value:run_index
    Replay {
        #[arg(long)]
        record: String,
    },
    /// Run the invariant self-test suites
    Selftest,
}

fn workers_of(cli: &Cli) -> usize {
    cli.workers
        .or_else(|| {
            std::env::var("SPARSEICA_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

fn config_of(cli: &Cli) -> Result<SweepConfig> {
    let path = cli.config.as_ref().ok_or_else(|| {
        BenchError::Validation(vec!["--config PATH is required for this command".into()])
    })?;
    let mut cfg = load_config(path)?;
    if let Some(runs) = cli.runs {
        if runs == 0 {
            return Err(BenchError::Validation(vec!["runs: must be >= 1".into()]));
        }
        cfg.fixed.runs = runs;
    }
    if let Some(seed) = cli.seed {
        cfg.fixed.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn points_of(cfg: &SweepConfig) -> Vec<(Option<Algorithm>, f64)> {
    let algs: Vec<Option<Algorithm>> = if cfg.algorithms.is_empty() {
        vec![None]
    } else {
        cfg.algorithms.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for alg in algs {
        for &sv in &cfg.sweep_values {
            out.push((alg, sv));
        }
    }
    out
}

fn cmd_gen(cfg: &SweepConfig) -> Result<()> {
    use sparseica::datagen::{
        export_scene, generate_fmri_scene, ggd_source_matrix, random_mixing,
    };
    use sparseica::model::{write_matrix_csv, DataMatrix, Role};
    std::fs::create_dir_all(&cfg.output_dir)?;
    for &sv in &cfg.sweep_values {
        let seed = child_seed(cfg.fixed.master_seed, cfg.experiment.name(), "gen", sv, 0);
        let point = RunPoint::resolve(cfg, None, sv, seed);
        let dir = cfg.output_dir.join(format!("gen_{}", sv));
        std::fs::create_dir_all(&dir)?;
        match cfg.experiment {
            Experiment::FmriCnr => {
                let (scene, observed) = generate_fmri_scene(
                    point.grid,
                    point.k,
                    point.t,
                    point.baseline,
                    point.cnr,
                    seed,
                )?;
                export_scene(&dir, &scene, &observed)?;
            }
            _ => {
                let s = ggd_source_matrix(point.n, point.t, point.beta, seed)?;
                write_matrix_csv(&dir.join("sources.csv"), &s.values)?;
                if cfg.experiment != Experiment::GiniVsBeta {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xA1);
                    let a = random_mixing(point.n, &mut rng, 1e6)?;
                    write_matrix_csv(&dir.join("mixing.csv"), &a)?;
                    let x = DataMatrix::new(&a * &s.values, Role::Mixtures)?;
                    write_matrix_csv(&dir.join("observed.csv"), &x.values)?;
                }
            }
        }
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn cmd_run(cfg: &SweepConfig) -> Result<()> {
    for (alg, sv) in points_of(cfg) {
        let alg_name = alg.map(|a| a.name()).unwrap_or("none");
        let seed = child_seed(cfg.fixed.master_seed, cfg.experiment.name(), alg_name, sv, 0);
        let point = RunPoint::resolve(cfg, alg, sv, seed);
        let out = single_run(&point)?;
        println!(
            "{} {} sweep_value={} seed={} {}={} converged={}",
            cfg.experiment.name(),
            alg_name,
            sv,
            seed,
            out.metric_name,
            out.metric_value,
            out.converged
        );
    }
    Ok(())
}

fn cmd_sweep(cfg: &SweepConfig, workers: usize) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (records, timings) = run_sweep(cfg, workers)?;
    write_runs_csv(&cfg.output_dir.join("runs.csv"), &records)?;
    write_timings_csv(&cfg.output_dir.join("timings.csv"), &timings)?;
    let rows = summarize(&records)?;
    write_summary_csv(&cfg.output_dir.join("summary.csv"), &rows)?;
    // the manifest echoes the effective config verbatim
    cfg.save(&cfg.output_dir.join("manifest.txt"))?;
    let failed = records.iter().filter(|r| !r.converged).count();
    println!(
        "{} records ({} not converged) -> {}",
        records.len(),
        failed,
        cfg.output_dir.display()
    );
    Ok(())
}

fn cmd_replay(cfg: &SweepConfig, record: &str) -> Result<()> {
    let parts: Vec<&str> = record.split(':').collect();
    if parts.len() != 3 {
        return Err(BenchError::Validation(vec![format!(
            "--record '{}' must be algorithm:sweep_value:run_index",
            record
        )]));
    }
    let alg = match parts[0] {
        "none" => None,
        name => Some(Algorithm::from_name(name).ok_or_else(|| {
            BenchError::Validation(vec![format!("--record: unknown algorithm '{}'", name)])
        })?),
    };
    let sv: f64 = parts[1]
        .parse()
        .map_err(|_| BenchError::Validation(vec!["--record: bad sweep_value".into()]))?;
    let run_index: u32 = parts[2]
        .parse()
        .map_err(|_| BenchError::Validation(vec!["--record: bad run_index".into()]))?;
    let alg_name = alg.map(|a| a.name()).unwrap_or("none");
    let seed = child_seed(
        cfg.fixed.master_seed,
        cfg.experiment.name(),
        alg_name,
        sv,
        run_index,
    );
    let point = RunPoint::resolve(cfg, alg, sv, seed);
    let out = single_run(&point)?;
    let rec = RunRecord {
        experiment: cfg.experiment.name().to_string(),
        algorithm: alg_name.to_string(),
        sweep_value: sv,
        run_index,
        seed,
        metric_name: out.metric_name.to_string(),
        metric_value: out.metric_value,
        converged: out.converged,
    };
    println!("{}", bench_cli::record::RUNS_HEADER);
    println!("{}", rec.csv_line());
    Ok(())
}

fn selftest() -> Result<()> {
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sparseica::metrics::{auction_assign, gini_index, normalized_isr};

    // determinism of a miniature sweep across worker counts
    let mut cfg = SweepConfig::new(Experiment::IsrVsBeta);
    cfg.fixed.n = 3;
    cfg.fixed.t = 300;
    cfg.fixed.runs = 2;
    cfg.sweep_values = vec![0.3, 0.5];
    let (r1, _) = run_sweep(&cfg, 1)?;
    let (r2, _) = run_sweep(&cfg, 4)?;
    if bench_cli::record::runs_csv(&r1) != bench_cli::record::runs_csv(&r2) {
        return Err(BenchError::Runtime("selftest: sweep not deterministic".into()));
    }
    println!("ok: sweep determinism across worker counts");

    // auction against exhaustive assignment
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let score = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
        let got = auction_assign(&score, 1e-7).map_err(|e| BenchError::Runtime(e.to_string()))?;
        let mut best = f64::NEG_INFINITY;
        let mut perm: Vec<usize> = (0..n).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let s: f64 = p.iter().enumerate().map(|(i, &j)| score[(i, j)]).sum();
            if s > best {
                best = s;
            }
        });
        if got.total_score < best - 1e-6 {
            return Err(BenchError::Runtime("selftest: auction suboptimal".into()));
        }
    }
    println!("ok: auction matches exhaustive assignment");

    // metric identities
    let g = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, -3.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
    let isr = normalized_isr(&g).map_err(|e| BenchError::Runtime(e.to_string()))?;
    if isr.normalized_isr.abs() > 1e-12 {
        return Err(BenchError::Runtime("selftest: isr identity broken".into()));
    }
    let one_sparse = [0.0, 0.0, 0.0, 7.0];
    let gi = gini_index(&one_sparse).map_err(|e| BenchError::Runtime(e.to_string()))?;
    if (gi - (1.0 - 1.0 / 4.0)).abs() > 1e-12 {
        return Err(BenchError::Runtime("selftest: gini identity broken".into()));
    }
    println!("ok: metric identities");

    // summary streaming oracle
    let recs: Vec<RunRecord> = (0..100)
        .map(|i| RunRecord {
            experiment: "isr_vs_beta".into(),
            algorithm: "ebm".into(),
            sweep_value: 0.1,
            run_index: i,
            seed: 0,
            metric_name: "normalized_isr".into(),
            metric_value: (i as f64).sin().abs(),
            converged: true,
        })
        .collect();
    let rows = summarize(&recs)?;
    let mut stream = 0.0;
    for (i, r) in recs.iter().enumerate() {
        stream += (r.metric_value - stream) / (i as f64 + 1.0);
    }
    if (rows[0].mean - stream).abs() > 1e-12 {
        return Err(BenchError::Runtime("selftest: summary mean mismatch".into()));
    }
    println!("ok: summary against streaming mean");
    Ok(())
}

fn permute_all(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_all(perm, k + 1, f);
        perm.swap(k, i);
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Gen => cmd_gen(&config_of(cli)?),
        Cmd::Run => cmd_run(&config_of(cli)?),
        Cmd::Sweep => {
            let cfg = config_of(cli)?;
            cmd_sweep(&cfg, workers_of(cli))
        }
        Cmd::Summarize { input } => {
            let cfg = config_of(cli)?;
            let input = input
                .clone()
                .unwrap_or_else(|| cfg.output_dir.join("runs.csv"));
            let records = read_runs_csv(&input)?;
            let rows = summarize(&records)?;
            let out = cfg.output_dir.join("summary.csv");
            std::fs::create_dir_all(&cfg.output_dir)?;
            write_summary_csv(&out, &rows)?;
            println!("{} rows -> {}", rows.len(), out.display());
            Ok(())
        }
        Cmd::Plot {
            input,
            log_x,
            log_y,
            title,
        } => {
            let cfg = config_of(cli)?;
            let input = input
                .clone()
                .unwrap_or_else(|| cfg.output_dir.join("summary.csv"));
            let rows = read_summary_csv(&input)?;
            let spec = PlotSpec {
                title: if title.is_empty() {
                    cfg.experiment.name().to_string()
                } else {
                    title.clone()
                },
                x_label: cfg.experiment.name().to_string(),
                y_label: cfg.experiment.metric_name().to_string(),
                log_x: *log_x,
                log_y: *log_y,
                ..Default::default()
            };
            let (svg, dropped) = render_plot(&rows, &spec)?;
            let out = cfg.output_dir.join("plot.svg");
            std::fs::create_dir_all(&cfg.output_dir)?;
            std::fs::write(&out, svg)?;
            if dropped > 0 {
                eprintln!("warning: {} points dropped", dropped);
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Cmd::Replay { record } => cmd_replay(&config_of(cli)?, record),
        Cmd::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
