use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use slabflow_cli::config::{self, ExperimentConfig};
use slabflow_cli::runner;

#[derive(Parser)]
#[command(name = "slabflow", version, about = "Thin-slab compressible flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One slab run with the full diagnostic series
    Simulate {
        /// Configuration file (key = value with dotted names); defaults
        /// apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding output.dir
        #[arg(long)]
        out: Option<PathBuf>,
        /// Mach number, overriding the first entry of eps.list
        #[arg(long)]
        eps: Option<f64>,
        /// Seed for the optional random data component
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every eps in the list and fit decay rates
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; runs are independent, so any split is safe
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mixed-norm scaling study of the free wave system
    Acoustics {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Headless check batteries; failing checks are report lines
    Verify {
        /// field | thermo | acoustics | limit2d | cns3d | diagnostics | all
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Re-fit decay rates from an existing sweep CSV
    Rates {
        /// Sweep output directory (or a direct path to a CSV file)
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading configuration {}", p.display()))?;
            config::parse_config(&text)?
        }
        None => {
            let cfg = ExperimentConfig::default();
            cfg.validate()?;
            cfg
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn echo_config(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    println!("# resolved configuration");
    for line in toml::to_string(&cfg.echo())?.lines() {
        println!("# {line}");
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out, eps, seed } => {
            let cfg = load_config(&config, seed)?;
            echo_config(&cfg)?;
            let eps = eps.unwrap_or(cfg.eps.list[0]);
            let root = out_dir(&cfg, &out);
            let run = runner::run_single(&cfg, eps, &root)?;
            println!(
                "run {} finished: {} rows, {} steps, {:.2}s, sup relative energy {:.6e}",
                run.run_id, run.rows, run.steps, run.wall_seconds, run.sup_rel_energy
            );
            println!("series: {}", run.csv.display());
        }
        Command::Sweep { config, out, threads, seed } => {
            let cfg = load_config(&config, seed)?;
            echo_config(&cfg)?;
            let root = out_dir(&cfg, &out);
            let sweep = runner::run_sweep(&cfg, &root, threads)?;
            for run in &sweep.outcomes {
                println!(
                    "eps {:.6}: sup rel energy {:.6e}, sol metric {:.6e}, grad metric {:.6e}",
                    run.eps, run.sup_rel_energy, run.record.sol_metric, run.record.grad_metric
                );
            }
            for f in &sweep.failures {
                eprintln!("eps {:.6} failed: {}", f.eps, f.error);
            }
            println!("alpha = {:.6}", sweep.summary.alpha);
            for (name, fit) in &sweep.summary.fits {
                println!("fit {name}: slope {:.4} (rms {:.2e})", fit.slope, fit.rms_residual);
            }
            println!("summary: {}", sweep.summary_path.display());
            if !sweep.failures.is_empty() {
                std::process::exit(1);
            }
        }
        Command::Acoustics { config, out } => {
            let cfg = load_config(&config, None)?;
            let root = out_dir(&cfg, &out);
            let report = runner::run_acoustics(&cfg, &root)?;
            println!(
                "p = {}, q = {}, expected slope {:.4}, fitted slope {:.4}",
                report.p, report.q, report.expected_slope, report.fitted_slope
            );
            for s in &report.samples {
                println!(
                    "eps {:.6}: mixed norm {:.6e}, identity error {:.3e}",
                    s.eps, s.mixed_norm, s.identity_error
                );
            }
            println!("report: {}", root.join("acoustics.toml").display());
        }
        Command::Verify { suite } => {
            let reports = slabflow::verify::run_suite(&suite)?;
            let mut checks = 0;
            let mut failed = 0;
            for report in &reports {
                for c in &report.checks {
                    checks += 1;
                    if !c.passed {
                        failed += 1;
                    }
                    println!(
                        "suite={} check=\"{}\" pass={} measured={:.3e} tolerance={:.3e}{}{}",
                        report.suite,
                        c.name,
                        c.passed,
                        c.measured,
                        c.tolerance,
                        if c.detail.is_empty() { "" } else { " detail=" },
                        c.detail
                    );
                }
            }
            println!(
                "summary suites={} checks={checks} failed={failed} result={}",
                reports.len(),
                if failed == 0 { "pass" } else { "fail" }
            );
        }
        Command::Rates { out } => {
            let csv = if out.extension().is_some_and(|e| e == "csv") {
                out
            } else {
                out.join("sweep.csv")
            };
            let report = runner::refit_rates(&csv)?;
            println!("{}", toml::to_string_pretty(&report)?);
        }
    }
    Ok(())
}
