//! `bfem`: run registered experiments, superconvergence diagnostics and comparisons.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bfem::harness::{lookup, render_grid, run_experiment, stability_sweep, write_text, ExperimentConfig, Format, Report, EXPERIMENTS};
use bfem::integrators::Scheme;
use bfem::oracles::{run_oracle, DEFAULT_NS, ORACLES};
use bfem::reference::{compare, reference};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bfem", version, about = "Galerkin spline convergence studies for Boussinesq-type systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Registered experiment, e.g. table2.1
    experiment: String,
    /// Comma-separated mesh sizes replacing the default list
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// TOML file whose keys override the experiment's defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or markdown
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and emit its table
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Run a named superconvergence diagnostic
    Oracle {
        id: String,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[command(flatten)]
        output: Output,
    },
    /// Stability sweep over k = h^alpha on the stability test problem
    Sweep {
        /// euler, improved-euler or rk4
        scheme: String,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run an experiment and report deviations from the published values
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: Output,
    },
    /// List experiments and diagnostics
    List,
    /// Print an experiment's default configuration as TOML
    Show { experiment: String },
}

fn load(run: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = lookup(&run.experiment).map_err(|e| e.to_string())?;
    if let Some(path) = &run.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        cfg = cfg.with_overrides(&text).map_err(|e| e.to_string())?;
    }
    if let Some(ns) = &run.n_list {
        cfg.n_list = ns.clone();
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => write_text(p, text).map_err(|e| e.to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `Ok(true)` when a convergence run diverged.
fn execute(cmd: Command) -> Result<bool, String> {
    let fmt = |o: &Output| Format::from_name(&o.format).map_err(|e| e.to_string());
    match cmd {
        Command::Run { run, output } => {
            let format = fmt(&output)?;
            let report = run_experiment(&load(&run)?).map_err(|e| e.to_string())?;
            emit(&report.render(format), output.out.as_deref())?;
            Ok(matches!(report, Report::Convergence(_)) && report.diverged())
        }
        Command::Oracle { id, n_list, output } => {
            let format = fmt(&output)?;
            let ns = n_list.unwrap_or_else(|| DEFAULT_NS.to_vec());
            let r = run_oracle(&id, &ns).map_err(|e| e.to_string())?;
            emit(&render_grid(&r.grid(), format), output.out.as_deref())?;
            Ok(false)
        }
        Command::Sweep {
            scheme,
            alphas,
            n,
            horizon,
            output,
        } => {
            let format = fmt(&output)?;
            let mut cfg = lookup("remark4.2").map_err(|e| e.to_string())?;
            cfg.scheme = Scheme::from_name(&scheme).map_err(|e| e.to_string())?;
            cfg.n_list = vec![n];
            if let Some(t) = horizon {
                cfg.horizon = t;
            }
            cfg.alphas = alphas.clone();
            cfg.validate().map_err(|e| e.to_string())?;
            let s = stability_sweep(&cfg, &alphas).map_err(|e| e.to_string())?;
            emit(&Report::Sweep(s).render(format), output.out.as_deref())?;
            Ok(false)
        }
        Command::Compare { run, output } => {
            let format = fmt(&output)?;
            let r = reference(&run.experiment).map_err(|e| e.to_string())?;
            let report = run_experiment(&load(&run)?).map_err(|e| e.to_string())?;
            let c = compare(&report, &r).map_err(|e| e.to_string())?;
            emit(&render_grid(&c.grid(), format), output.out.as_deref())?;
            let show = |x: Option<f64>| x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            eprintln!(
                "{}: max relative error deviation {}, max order deviation {}, overflow mismatches {}",
                c.name,
                show(c.max_relative()),
                show(c.max_order()),
                c.overflow_mismatches()
            );
            Ok(false)
        }
        Command::List => {
            println!("experiments:");
            for name in EXPERIMENTS {
                let tag = if reference(name).is_ok() { "" } else { " (no published reference)" };
                println!("  {name}{tag}");
            }
            println!("oracles:");
            for (id, what) in ORACLES {
                println!("  {id:<24} {what}");
            }
            Ok(false)
        }
        Command::Show { experiment } => {
            print!("{}", lookup(&experiment).map_err(|e| e.to_string())?.to_toml());
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: at least one run diverged");
            ExitCode::from(2)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
