mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use riesz_core::flow::InitialFlow;
use clap::{ArgAction, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use config::{apply, merge, read_json, read_sweep, Override};
use error::{CliError, Status};
use output::{Format, OutputDir};

#[derive(Parser)]
#[command(name = "riesz-lab", version, about = "Euler-Riesz decay simulator and estimate checker")]
struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "riesz-lab-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON array of config patches; each entry becomes an independent run.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the rescaled system and record norm histories.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau_end: Option<f64>,
        #[arg(long)]
        dtau: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Fit decay rates to a recorded run and compare with the predicted exponents.
    Fit {
        #[command(flatten)]
        common: Common,
        /// `simulate` output directory or a norms CSV file.
        #[arg(long)]
        input: PathBuf,
        /// Fraction of the run, counted from the end, used for fitting.
        #[arg(long)]
        window: Option<f64>,
    },
    /// Check the Burgers background bounds.
    BurgersVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Integrate the worst-case differential inequality and test its envelope.
    Gronwall {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        cstar: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        c: Option<Vec<f64>>,
        #[arg(long)]
        cp: Option<u8>,
        #[arg(long)]
        y0: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Bisect the largest initial value that stays bounded.
        #[arg(long)]
        threshold: bool,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Sample commutator and interpolation ratios over random fields.
    Ineq {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
    },
}

type Runner = fn(&Value, &mut OutputDir) -> Result<Status, CliError>;

fn push<T: Into<Value>>(list: &mut Vec<Override>, path: &[&'static str], value: Option<T>) {
    if let Some(v) = value {
        list.push(Override::new(path, v));
    }
}

fn base_config(common: &Common) -> Result<Value, CliError> {
    match &common.config {
        Some(path) => read_json(path),
        None => Ok(json!({})),
    }
}

fn status_label(result: &Result<Status, CliError>) -> String {
    match result {
        Ok(Status::Ok) => "ok".into(),
        Ok(Status::Blowup(m)) => format!("blowup: {m}"),
        Ok(Status::Failed(m)) => format!("failed: {m}"),
        Err(e) => format!("error: {e}"),
    }
}

fn exit_code(result: &Result<(), CliError>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    }
}

/// One isolated run into `dir`; the manifest is written even when verification fails.
fn run_one(command: &str, runner: Runner, config: &Value, dir: &Path, format: Format) -> Result<(), CliError> {
    let mut out = OutputDir::create(dir, format)?;
    let result = runner(config, &mut out);
    if !matches!(result, Err(CliError::Config(_)) | Err(CliError::Io { .. })) {
        out.finish(command, config, &status_label(&result))?;
    }
    match result? {
        Status::Ok => Ok(()),
        other => {
            let err = other.into_result().unwrap_err();
            log::info!("{}: {err}", dir.display());
            Err(err)
        }
    }
}

fn run_config_command(command: &str, runner: Runner, common: &Common, overrides: &[Override]) -> Result<(), CliError> {
    let base = base_config(common)?;
    let Some(sweep) = &common.sweep else {
        let mut config = base;
        apply(&mut config, overrides);
        return run_one(command, runner, &config, &common.out, common.format);
    };
    let patches = read_sweep(sweep)?;
    let configs: Vec<Value> = patches
        .iter()
        .map(|patch| {
            let mut config = base.clone();
            merge(&mut config, patch);
            apply(&mut config, overrides);
            config
        })
        .collect();
    log::info!("sweep of {} runs", configs.len());
    let results: Vec<Result<(), CliError>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, config)| run_one(command, runner, config, &common.out.join(format!("run_{i:03}")), common.format))
        .collect();
    let runs: Vec<Value> = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "run": format!("run_{i:03}"),
                "exit_code": exit_code(r),
                "error": r.as_ref().err().map(|e| e.to_string()),
            })
        })
        .collect();
    let mut top = OutputDir::create(&common.out, common.format)?;
    top.write_json("sweep.json", &runs)?;
    results.into_iter().max_by_key(exit_code).unwrap_or(Ok(()))
}

fn run_fit(common: &Common, input: &Path, window: Option<f64>) -> Result<(), CliError> {
    if common.sweep.is_some() {
        return Err(CliError::Config("fit does not take --sweep; sweep the simulate step instead".into()));
    }
    let config = common.config.as_deref().map(read_json).transpose()?;
    let mut out = OutputDir::create(&common.out, common.format)?;
    let (resolved, status) = commands::fit::run(input, config, common.tol, window, &mut out)?;
    out.finish("fit", &resolved, &status_label(&Ok(status.clone())))?;
    status.into_result()
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let mut o = Vec::new();
    match command {
        Command::Simulate { common, tau_end, dtau, n } => {
            push(&mut o, &["seed"], common.seed);
            push(&mut o, &["tail_tolerance"], common.tol);
            push(&mut o, &["tau_end"], tau_end);
            push(&mut o, &["dtau"], dtau);
            push(&mut o, &["n"], n);
            run_config_command("simulate", commands::simulate::run, &common, &o)
        }
        Command::Fit { common, input, window } => run_fit(&common, &input, window),
        Command::BurgersVerify { common, n, epsilon } => {
            push(&mut o, &["threshold"], common.tol);
            push(&mut o, &["n"], n);
            if let Some(eps) = epsilon {
                if base_config(&common)?.get("flow").is_some() {
                    o.push(Override::new(&["flow", "epsilon"], eps));
                } else {
                    let flow = serde_json::to_value(InitialFlow::sine_1d(eps))
                        .map_err(|e| CliError::Numeric(e.to_string()))?;
                    o.push(Override::new(&["flow"], flow));
                }
            }
            run_config_command("burgers-verify", commands::burgers::run, &common, &o)
        }
        Command::Gronwall { common, a, cstar, b, c, cp, y0, t_end, threshold, resolution } => {
            push(&mut o, &["params", "a"], a);
            push(&mut o, &["params", "c_star"], cstar);
            push(&mut o, &["params", "b"], b);
            push(&mut o, &["params", "c"], c);
            push(&mut o, &["params", "c_p"], cp);
            push(&mut o, &["y0"], y0);
            push(&mut o, &["t_end"], t_end);
            push(&mut o, &["resolution"], resolution);
            if threshold {
                o.push(Override::new(&["threshold"], true));
            }
            run_config_command("gronwall", commands::gronwall::run, &common, &o)
        }
        Command::Ineq { common, n, count } => {
            push(&mut o, &["ensemble", "seed"], common.seed);
            push(&mut o, &["ensemble", "n"], n);
            push(&mut o, &["ensemble", "count"], count);
            push(&mut o, &["stability_limit"], common.tol);
            run_config_command("ineq", commands::ineq::run, &common, &o)
        }
    }
}

fn init_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RIESZ_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("RIESZ_LAB_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Numeric(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    let result = init_pool().and_then(|()| dispatch(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riesz-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
