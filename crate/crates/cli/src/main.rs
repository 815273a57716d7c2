//! `pbcov`: coverage planning and validation for power-beacon backscatter
//! networks.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage
//! error, 3 a search hit its ceiling under `--strict`.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pbcov_cli::commands::{self, CommandOutcome};
use pbcov_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "pbcov",
    version,
    about = "Coverage planning and validation for power-beacon backscatter networks"
)]
struct Cli {
    /// Scenario TOML file. Required by every subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV, sidecar, and effective-config files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override `sim.seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override `sim.trials_per_point` from the configuration.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Cap the worker thread count (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Treat truncated searches as failures (exit 3).
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal ring radius and peak coverage per (M, S).
    SolveDstar,
    /// Coverage radius versus ring radius, with asymptotes.
    GcdCurve {
        /// Add a Monte Carlo estimate per point (slow).
        #[arg(long)]
        overlay: bool,
    },
    /// Optimum and coverage under swept harvest floors.
    CircuitPower,
    /// Symmetric ring versus two-tier and random placement.
    CompareSchemes,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        // Tests and nested callers may have installed a pool already;
        // a second install is a no-op, not an error worth dying for.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let Some(config_path) = cli.config.as_deref() else {
        eprintln!("error: --config <FILE> is required");
        return ExitCode::from(2);
    };
    let text = match fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match RunConfig::from_toml(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("config error in {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        config.sim.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.sim.trials_per_point = trials;
    }
    if let Err(e) = config.validate_semantics() {
        eprintln!("config error in {}: {e}", config_path.display());
        return ExitCode::from(2);
    }

    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(1);
    }
    let effective = cli.out.join(format!("{}-effective.toml", config.scenario));
    if let Err(e) = fs::write(&effective, config.to_toml()) {
        eprintln!("error: cannot write {}: {e}", effective.display());
        return ExitCode::from(1);
    }

    let result = match cli.cmd {
        Cmd::SolveDstar => commands::solve_dstar(&config, &cli.out),
        Cmd::GcdCurve { overlay } => commands::gcd_curve(&config, &cli.out, overlay),
        Cmd::CircuitPower => commands::circuit_power(&config, &cli.out),
        Cmd::CompareSchemes => commands::compare_schemes(&config, &cli.out),
    };
    match result {
        Ok(CommandOutcome { truncated: true, csv_path }) => {
            if cli.strict {
                eprintln!(
                    "error: search truncated at its ceiling (results in {})",
                    csv_path.display()
                );
                ExitCode::from(3)
            } else {
                eprintln!("warning: search truncated at its ceiling; results may understate coverage");
                println!("{}", csv_path.display());
                ExitCode::SUCCESS
            }
        }
        Ok(CommandOutcome { truncated: false, csv_path }) => {
            println!("{}", csv_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
