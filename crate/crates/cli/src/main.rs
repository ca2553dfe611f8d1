use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lscond::distance::{ls_distance, AlignmentProblem, GdConfig};
use lscond::experiment::{run_experiment, summarize, write_records_csv, write_summary_json, ExperimentConfig};
use lscond::io::{matrix_to_rows, read_decomposition, read_pair};
use lscond::tucker::{cond_tucker, cond_tucker_oracle, Metric};
use lscond::two_factor::{cond_two_factor, cond_two_factor_oracle};
use lscond::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "lscond", version, about = "Least-squares condition numbers of decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Absolute,
    Relative,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Absolute => Metric::Absolute,
            MetricArg::Relative => Metric::Relative,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Condition number of X = LR from a JSON file {"l": rows, "r": rows}.
    TwoFactor {
        #[arg(long)]
        input: PathBuf,
        /// Also evaluate the explicit-Jacobian oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Condition numbers of an orthogonal Tucker decomposition.
    TuckerCond {
        #[arg(long)]
        input: PathBuf,
        /// Add `kappa` for this metric (and the oracle value with --oracle).
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
        #[arg(long)]
        oracle: bool,
    },
    /// Run the perturbation experiment and write records.csv and summary.json.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check closed forms against their oracles; exits with 1 on any failure.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fiber-aligned distance between two decompositions.
    Align {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        n_restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::TwoFactor { input, oracle } => {
            let pair = read_pair(&input)?;
            let mut v = serde_json::to_value(cond_two_factor(&pair)?)?;
            if oracle {
                v["oracle_kappa"] = json!(cond_two_factor_oracle(&pair)?);
            }
            print(&v)?;
        }
        Command::TuckerCond { input, metric, oracle } => {
            let d = read_decomposition(&input)?;
            let report = cond_tucker(&d)?;
            let mut v = serde_json::to_value(&report)?;
            if let Some(m) = metric {
                let m = Metric::from(m);
                v["metric"] = serde_json::to_value(m)?;
                v["kappa"] = json!(report.kappa(m));
            }
            if oracle {
                v["oracle_kappa_abs"] = json!(cond_tucker_oracle(&d, Metric::Absolute)?);
                v["oracle_kappa_rel"] = json!(cond_tucker_oracle(&d, Metric::Relative)?);
            }
            print(&v)?;
        }
        Command::Experiment { config, out } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            cfg.validate().context("invalid experiment config")?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let records = run_experiment(&cfg)?;
            let summary = summarize(&records);
            write_records_csv(&out.join("records.csv"), &records)?;
            write_summary_json(&out.join("summary.json"), &summary)?;
            log::info!("wrote {} records to {}", records.len(), out.display());
            print(&serde_json::to_value(&summary.global)?)?;
        }
        Command::Verify { suite, n, seed } => {
            let reports = run_suite(suite, n, seed)?;
            print(&serde_json::to_value(&reports)?)?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Align { reference, candidate, n_restarts, seed } => {
            let p = AlignmentProblem::new(read_decomposition(&reference)?, read_decomposition(&candidate)?)?;
            let mut cfg = GdConfig { seed, ..GdConfig::default() };
            if let Some(r) = n_restarts {
                cfg.n_restarts = r;
            }
            let res = ls_distance(&p, &cfg)?;
            print(&json!({
                "e_hat": res.e_hat,
                "converged": res.converged,
                "iterations": res.iterations,
                "final_grad_norm": res.final_grad_norm,
                "restarts_used": res.restarts_used,
                "rotations": res.rotations.iter().map(matrix_to_rows).collect::<Vec<_>>(),
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
