use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jointrecon::io::{
    emit_plots, load_config, load_instance, write_instance, write_matrix, write_results_csv,
    AnyInstance, FileScalar, InstanceSource, Mode, RunConfig,
};
use jointrecon::joint::{solve_joint, JointConfig, JointHistory};
use jointrecon::metrics::l2_error;
use jointrecon::sweep::{
    powers_of_two, rate_experiment, run_method, run_sweep, select_best, GridSpec, Method, Metric,
    SweepOptions,
};
use jointrecon::testbed::PhantomSpec;
use jointrecon::{Error, Matrix, ProblemInstance, RegParams, Result};

#[derive(Debug, Parser)]
#[command(name = "jointrecon", version, about = "Joint image and system-matrix reconstruction")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the instance and rate-experiment seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Write instance matrices and phantom as JSRB files.
    Generate,
    /// Run one reconstruction.
    Solve,
    /// Run a regularization-parameter grid.
    Sweep,
    /// Run the noise-halving rate experiment.
    Rates,
}

impl Command {
    fn mode(self) -> Mode {
        match self {
            Command::Generate => Mode::Generate,
            Command::Solve => Mode::Solve,
            Command::Sweep => Mode::Sweep,
            Command::Rates => Mode::Rates,
        }
    }
}

/// Settings used when no configuration file is given.
fn builtin_config() -> RunConfig {
    RunConfig {
        instance: Some(InstanceSource::Synthetic {
            m: 50,
            sigma: 0.05,
            seed: 1,
            phantom: PhantomSpec::default_for(50),
        }),
        params: Some(RegParams::new(2f64.powi(-16), 2f64.powi(-11), 0.25, 1.0).expect("valid")),
        grid: Some(GridSpec {
            gamma: powers_of_two([0, 2, 4]),
            mu: powers_of_two([0, 2, 4]),
            alpha: powers_of_two([12, 15, 18]),
            lambda: powers_of_two([4, 8, 12]),
            methods: Method::ALL.to_vec(),
        }),
        ..RunConfig::default()
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mode = cli.command.mode();
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => builtin_config(),
    };
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(Error::Config(vec![format!(
                "configuration is for {m}, but {mode} was requested"
            )]));
        }
    }
    let missing = cfg.missing_for(mode);
    if !missing.is_empty() {
        return Err(Error::Config(missing));
    }
    if let Some(seed) = cli.seed {
        if let Some(InstanceSource::Synthetic { seed: s, .. }) = &mut cfg.instance {
            *s = seed;
        }
        cfg.rates.seed = seed;
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config(vec!["--workers must be >= 1".into()]));
        }
        cfg.workers = Some(w);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_history<T>(history: &JointHistory<T>, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["outer", "J", "data", "model", "calib", "l2_term", "l1_term", "l2_error", "wall_ms"])
        .map_err(csv_err)?;
    let rows = std::iter::once((0, history.initial_objective, None, 0.0)).chain(
        history
            .records
            .iter()
            .map(|r| (r.outer + 1, r.objective, r.l2_error, r.wall_ms)),
    );
    for (outer, j, err, ms) in rows {
        let f = |x: f64| format!("{x:.16e}");
        w.write_record([
            outer.to_string(),
            f(j.total),
            f(j.data_term),
            f(j.model_term),
            f(j.calib_term),
            f(j.l2_term),
            f(j.l1_term),
            err.map(f).unwrap_or_default(),
            f(ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn solve<T: FileScalar>(instance: &ProblemInstance<T>, cfg: &RunConfig) -> Result<()> {
    let params = cfg.params.expect("checked by missing_for");
    let out = &cfg.output.dir;
    create_dir(out)?;
    if cfg.method == Method::Joint {
        let outcome = solve_joint(instance, &params, &JointConfig::new(cfg.schedule))
            .map_err(|f| f.source)?;
        write_matrix(out.join("c.jsrb"), &Matrix::new(outcome.c.len(), 1, outcome.c.to_vec())?)?;
        write_matrix(out.join("s.jsrb"), &outcome.s)?;
        write_history(&outcome.history, &out.join("history.csv"))?;
        println!(
            "joint: {} outer iterations, J {:.6e} -> {:.6e}",
            outcome.history.len(),
            outcome.history.initial_objective.total,
            outcome.history.last().map_or(f64::NAN, |r| r.objective.total)
        );
        if let Some(truth) = &instance.c_true {
            println!("l2 error {:.6}", l2_error(&outcome.c, truth)?);
        }
        if cfg.output.plots && !outcome.history.is_empty() {
            for f in emit_plots(&outcome.history, instance, &[], out)? {
                println!("wrote {}", f.display());
            }
        }
    } else {
        let run = run_method(instance, cfg.method, &params, &cfg.schedule)?;
        write_matrix(out.join("c.jsrb"), &Matrix::new(run.c.len(), 1, run.c.to_vec())?)?;
        println!("{}: data residual {:.6e}, J^c {:.6e}", cfg.method, run.data_residual, run.j_final);
        if let Some(truth) = &instance.c_true {
            println!("l2 error {:.6}", l2_error(&run.c, truth)?);
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    let out = &cfg.output.dir;
    match cli.command {
        Command::Generate => {
            let source = cfg.instance.as_ref().expect("checked by missing_for");
            let AnyInstance::Real(instance) = load_instance(source)? else {
                unreachable!("synthetic instances are real")
            };
            for f in write_instance(&instance, out)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Solve => match load_instance(cfg.instance.as_ref().expect("checked"))? {
            AnyInstance::Real(inst) => solve(&inst, &cfg)?,
            AnyInstance::Complex(inst) => solve(&inst, &cfg)?,
        },
        Command::Sweep => {
            let AnyInstance::Real(instance) = load_instance(cfg.instance.as_ref().expect("checked"))?
            else {
                return Err(Error::Invalid("sweeps need a real instance".into()));
            };
            let grid = cfg.grid.as_ref().expect("checked by missing_for");
            let options = SweepOptions {
                schedule: cfg.schedule,
                workers: cfg.workers,
            };
            let records = run_sweep(&instance, grid, &options)?;
            create_dir(out)?;
            let path = out.join("results.csv");
            write_results_csv(&records, &path)?;
            println!("wrote {} ({} runs)", path.display(), records.len());
            for method in &grid.methods {
                let subset: Vec<_> = records.iter().filter(|r| r.method == *method).cloned().collect();
                for metric in [Metric::L2, Metric::OneMinusSsim] {
                    match select_best(&subset, metric) {
                        Ok(sel) => {
                            let b = sel.best;
                            println!(
                                "{method:<14} best {:<5} l2={:.4} ssim={:.4} gamma={:e} mu={:e} alpha={:e} lambda={:e}",
                                if metric == Metric::L2 { "l2" } else { "ssim" },
                                b.l2_error, b.ssim, b.gamma, b.mu, b.alpha, b.lambda
                            );
                        }
                        Err(e) => println!("{method:<14} {e}"),
                    }
                }
            }
        }
        Command::Rates => {
            let report = rate_experiment(&cfg.rates, cfg.workers)?;
            create_dir(out)?;
            let path = out.join("rates.csv");
            let mut text = String::from("sigma,noise,alpha,discrepancy,l2_error\n");
            for p in &report.points {
                text.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    p.sigma, p.noise, p.alpha, p.discrepancy, p.l2_error
                ));
                println!(
                    "sigma={:.5} alpha={:.4e} discrepancy={:.4e} l2={:.4}",
                    p.sigma, p.alpha, p.discrepancy, p.l2_error
                );
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            println!("slope {:.4}", report.slope);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
