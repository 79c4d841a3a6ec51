use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracgibc::cli::{main_with, Command, RunOptions};

/// Forward and inverse solver for sub-diffusion with a generalized
/// impedance boundary condition.
#[derive(Parser)]
#[command(name = "fracgibc", version)]
struct Args {
    #[arg(value_parser = Command::ALL.map(|c| c.name()))]
    command: String,
    /// Study configuration (INI)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides [output] dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed; overrides [inversion] seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = RunOptions { config: args.config, out: args.out, seed: args.seed };
    ExitCode::from(main_with(&args.command, &opts) as u8)
}
