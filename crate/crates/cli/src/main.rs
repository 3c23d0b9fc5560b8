//! `flatfactor` — affine functions, Hilbert structure, and the flat-factor
//! embedding of exactly representable geodesic spaces.
//!
//! Exit codes: 0 all checks pass, 1 input error, 2 theorem-scope violation
//! detected. Set `FLATFACTOR_LOG=info` for progress logging.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flatfactor_cli::commands;

#[derive(Parser)]
#[command(name = "flatfactor", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the affine function space, norms, Gram matrix, and the Hilbert
    /// verdict for a space.
    Analyze {
        /// Path to a space configuration document.
        config: PathBuf,
        /// Override the parallelogram detection threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the full embedding pipeline and emit the report document.
    Embed {
        config: PathBuf,
        /// Sampling budget per verifier.
        #[arg(long)]
        samples: Option<usize>,
        /// RNG seed; identical seeds give byte-identical reports.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the verifier pass thresholds.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run comparison-triangle and midpoint-inequality checks.
    Verify {
        config: PathBuf,
        /// Curvature bound to compare against.
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the violation tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Build the normed-plane family R x_p R and report why it falls outside
    /// the theorem scope for p != 2.
    Counterexample {
        /// Norm exponent, in (1, inf).
        #[arg(long)]
        p: f64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the affinity check threshold.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FLATFACTOR_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { config, tol } => commands::analyze(&config, tol),
        Command::Embed {
            config,
            samples,
            seed,
            tol,
            output,
        } => commands::embed_cmd(&config, samples, seed, tol, output.as_deref()),
        Command::Verify {
            config,
            kappa,
            samples,
            seed,
            tol,
        } => commands::verify(&config, kappa, samples, seed, tol),
        Command::Counterexample {
            p,
            samples,
            seed,
            tol,
        } => commands::counterexample(p, samples, seed, tol),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
