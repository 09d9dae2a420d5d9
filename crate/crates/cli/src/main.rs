mod bundle;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Certificates failed (KKT, sampler validation); outputs are still written.
pub const EXIT_CERTIFICATE: u8 = 3;
pub const EXIT_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "quasisynth", version, about = "Sparse quasiprobability synthesis of quantum operations")]
pub struct Cli {
    /// Seed for every random stage (pulse initialisation, Monte Carlo shots).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discrete-angle interpolation of a rotation from 2^B notches.
    Pai(commands::PaiArgs),
    /// Exact synthesis of Rz(theta) from enumerated Clifford+T sequences.
    CliffordT(commands::CliffordTArgs),
    /// Broadband or band-selective pulse combination over drift offsets.
    Control(commands::ControlArgs),
    /// Solve a stored design problem (JSON, or the binary format with --qubits).
    Solve(commands::SolveArgs),
    /// Monte Carlo estimation from a library and a coefficient vector.
    Sample(commands::SampleArgs),
}

#[derive(clap::Args, Debug, Clone, serde::Serialize)]
pub struct OutArgs {
    /// Run directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("certificates failed; see manifest.json");
            ExitCode::from(EXIT_CERTIFICATE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
