//! `ftn-slp` command line.
//!
//! `run` writes `<preset>_<hash>.csv` with one row per trial and a matching
//! `.json` holding the configuration echo, the run hash and the per-arm
//! aggregates (means, standard errors and 95% bootstrap intervals).
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |--------|---------|
//! | `trial` | trial index within the arm |
//! | `K`, `N`, `M` | users, antennas, subcarriers |
//! | `R` | guard length used in the trial |
//! | `alpha`, `beta` | acceleration and packing factors |
//! | `gamma_db` | target SINR in dB |
//! | `precoder` | `zf` or `slp` |
//! | `ser` | symbol error rate |
//! | `sum_rate_bps` | effective sum rate, bit/s |
//! | `power_w` | average transmit power, W |
//! | `se_bps_hz` | effective spectral efficiency, bit/s/Hz |
//! | `ei_j_per_bit` | power over spectral efficiency |
//! | `seed` | channel seed of the trial |

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ftn_slp::config::{validate_config, SystemConfig};
use ftn_slp::experiment::{
    build_custom, build_preset, run_experiment, write_outputs, Overrides, Preset, SweepSpec,
};
use ftn_slp::qpsolver::{self, save_archive, KktStrategy, QpProblem, SolverOptions};
use ftn_slp::theory::checks;

#[derive(Parser)]
#[command(name = "ftn-slp", version, about = "FTN multicarrier symbol-level precoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset or a custom sweep.
    Run(RunArgs),
    /// Run the closed-form property suite.
    CheckTheory {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Print outcomes as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve a stored quadratic program.
    SolveQp {
        #[arg(long)]
        problem: PathBuf,
        /// Write the solution archive here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        /// KKT reduction: auto, primal or dual.
        #[arg(long, default_value = "auto")]
        strategy: String,
    },
    /// Validate a configuration file and print the normalized form.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "exp3")]
    preset: String,
    /// Base configuration for the custom preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Custom sweep as `axis=v1,v2,...`.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    users: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    sinr_db: Option<Vec<f64>>,
    #[arg(long)]
    subcarriers: Option<usize>,
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep only arms whose label contains one of these fragments.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn parse_sweep(text: &str) -> anyhow::Result<SweepSpec> {
    let (axis, values) = text
        .split_once('=')
        .with_context(|| format!("sweep '{text}' is not of the form axis=v1,v2"))?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value '{v}'")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SweepSpec {
        axis: axis.trim().to_string(),
        values,
        preset: Preset::Custom,
    })
}

fn run(args: RunArgs) -> anyhow::Result<ExitCode> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let preset: Preset = args.preset.parse()?;
    let ov = Overrides {
        alphas: args.alpha.clone(),
        betas: args.beta.clone(),
        users: args.users.clone(),
        sinr_db: args.sinr_db.clone(),
        subcarriers: args.subcarriers,
        antennas: args.antennas,
        n_trials: args.trials,
        n_blocks: args.blocks,
        seed: args.seed,
        only: args.only.clone(),
    };
    let spec = if preset == Preset::Custom {
        let Some(path) = &args.config else {
            bail!("the custom preset needs --config");
        };
        let mut base = SystemConfig::load(path)?;
        // single-valued list flags act as plain field overrides
        let single = |v: &Option<Vec<f64>>| v.as_ref().filter(|v| v.len() == 1).map(|v| v[0]);
        if let Some(a) = single(&args.alpha) {
            base.alpha = a;
        }
        if let Some(b) = single(&args.beta) {
            base.beta = b;
        }
        if let Some(g) = single(&args.sinr_db) {
            base.sinr_db = g;
        }
        if let Some(k) = args.users.as_ref().filter(|v| v.len() == 1) {
            base.users = k[0];
        }
        let sweep = match &args.sweep {
            Some(text) => parse_sweep(text)?,
            None => SweepSpec {
                axis: "sinr_db".into(),
                values: vec![base.sinr_db],
                preset: Preset::Custom,
            },
        };
        build_custom(&base, &sweep, &ov)?
    } else {
        if args.sweep.is_some() || args.config.is_some() {
            bail!("--sweep and --config apply to the custom preset only");
        }
        build_preset(preset, &ov)?
    };
    if spec.arms.is_empty() {
        bail!("the overrides leave no configurations to run");
    }
    let trials: usize = spec.arms.iter().map(|a| a.config.n_trials).sum();
    eprintln!("{} configurations, {trials} trials", spec.arms.len());
    let result = run_experiment(&spec)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let (csv, json) = write_outputs(&result, &args.out)?;
    println!("{:<48} {:>6} {:>10} {:>12} {:>10}", "configuration", "SER", "SE", "power [W]", "failed");
    for s in &result.summaries {
        println!(
            "{:<48} {:>6.4} {:>10.4} {:>12.4e} {:>10}",
            s.label, s.ser.mean, s.spectral_eff.mean, s.power.mean, s.failed_trials
        );
    }
    println!("run {}", result.run_hash);
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(ExitCode::SUCCESS)
}

fn check_theory(seed: u64, json: bool) -> anyhow::Result<ExitCode> {
    let outcomes = checks::run_all(seed);
    if json {
        println!("{}", serde_json::to_string_pretty(&outcomes)?);
    } else {
        for o in &outcomes {
            println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        }
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn solve_qp(problem: PathBuf, out: Option<PathBuf>, tol: f64, max_iter: usize, strategy: &str) -> anyhow::Result<ExitCode> {
    let p = QpProblem::load_json(&problem).with_context(|| format!("reading {}", problem.display()))?;
    let strategy = match strategy {
        "auto" => KktStrategy::Auto,
        "primal" => KktStrategy::Primal,
        "dual" => KktStrategy::Dual,
        other => bail!("unknown strategy '{other}'"),
    };
    let opts = SolverOptions {
        tol,
        max_iter,
        strategy,
        ..SolverOptions::default()
    };
    let sol = qpsolver::solve(&p, &opts)?;
    let report = serde_json::json!({
        "status": sol.status,
        "objective": sol.objective(&p),
        "iterations": sol.iterations,
        "kkt": sol.kkt,
        "x": sol.x.as_slice(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = out {
        save_archive(&path, &p, &sol)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(path: PathBuf) -> anyhow::Result<ExitCode> {
    let cfg = SystemConfig::load(&path)?;
    let v = validate_config(&cfg)?;
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", v.config.to_json()?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::CheckTheory { seed, json } => check_theory(seed, json),
        Command::SolveQp {
            problem,
            out,
            tol,
            max_iter,
            strategy,
        } => solve_qp(problem, out, tol, max_iter, &strategy),
        Command::Validate { config } => validate(config),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
