use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zfsic_cli::config::load;
use zfsic_cli::convergence::{run_convergence, write_table};
use zfsic_cli::sweep::{run_sweep, write_curves};
use zfsic_cli::validate::{run_validate, write_report, Status};
use zfsic_cli::{exit, CliError};

#[derive(Parser)]
#[command(name = "zfsic", version, about = "ZF / ZF-SIC outage and capacity over rank-1 Rician MIMO")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured sweep and write one CSV per metric and variant.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the validation battery and write a JSON report.
    Validate {
        config: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
    },
    /// Series term counts for the configured (N, M) grid.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value = "convergence.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("zfsic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = load(&config)?;
            let curves = run_sweep(&cfg)?;
            for p in write_curves(&cfg, &curves, &out)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Validate { config, trials, seed, out } => {
            let cfg = load(&config)?;
            let checks = run_validate(&cfg, trials, seed)?;
            write_report(&checks, &out)?;
            let mut failed = 0;
            for c in &checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => {
                        failed += 1;
                        "FAIL"
                    }
                };
                println!("{tag} {} measured={} expected={} tol={}", c.check_id, c.measured, c.expected, c.tolerance);
            }
            if failed > 0 {
                return Err(CliError::ValidationFailed { failed, total: checks.len() });
            }
            Ok(())
        }
        Command::Convergence { config, out } => {
            let cfg = load(&config)?;
            let rows = run_convergence(&cfg)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            write_table(&rows, &out)?;
            for r in &rows {
                println!("N={} M={} terms={} capacity={:.6} nats", r.n_rx, r.n_tx, r.terms_converged, r.capacity);
            }
            Ok(())
        }
    }
}
