//! Command-line front end: capacity and exponent solves, codebook
//! build/encode/decode, Monte Carlo loopbacks, and security verification.
//! Every run writes its outputs plus a manifest that reproduces it.

mod commands;
mod config;
mod runio;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Typed failures carrying the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2: bad config, bad flags, IO trouble.
    Config(String),
    /// Exit 3: the solver finished without certifying its tolerance;
    /// results are still written, flagged as unconverged.
    NotConverged(String),
    /// Exit 4: codebook or parameter mismatch during codec work.
    Codec(String),
    /// Exit 5: a security check failed.
    Security(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Failure {
        Failure::Config(msg.into())
    }

    pub fn codec(msg: impl Into<String>) -> Failure {
        Failure::Codec(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::Codec(_) => 4,
            Failure::Security(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::NotConverged(m)
            | Failure::Codec(m)
            | Failure::Security(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "stegcap",
    version,
    about = "Steganographic capacity, error exponents, codecs, and security checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Game values: active, passive, marginal-free, closed forms, sweeps
    Capacity(commands::capacity::CapacityCmd),
    /// Reliability-exponent curves over a rate grid
    Exponent(commands::exponent::ExponentCmd),
    /// Build, encode, decode, and loop back the code constructions
    Codec(commands::codec::CodecCmd),
    /// Exact or sampled stegotext-distribution audit
    Verify(commands::verify::VerifyCmd),
}

/// Flags shared by every command.
#[derive(Args, Debug)]
pub struct Common {
    /// JSON config file with per-command sections
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Directory for outputs and the run manifest
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// RNG seed; overrides the config, then STEGCAP_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads for parallel sections
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<config::Config, Failure> {
        config::Config::load(&self.config)
    }

    /// Flag, then config, then environment, then zero.
    fn resolve_seed(&self, cfg: &config::Config) -> Result<u64, Failure> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        if let Some(s) = cfg.seed {
            return Ok(s);
        }
        match std::env::var("STEGCAP_SEED") {
            Ok(v) => v
                .parse::<u64>()
                .map_err(|_| Failure::config(format!("STEGCAP_SEED {v:?} is not a u64"))),
            Err(_) => Ok(0),
        }
    }

    fn configure_threads(&self) {
        let Some(n) = self.threads else { return };
        #[cfg(feature = "parallel")]
        {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("note: thread pool already initialized: {e}");
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = n;
            eprintln!("note: built without the parallel feature; --threads is ignored");
        }
    }
}

/// Decimal places that are meaningful at the given tolerance; everything
/// past them is solver noise and is suppressed on stdout.
pub fn display_digits(tol: f64) -> usize {
    if !(tol > 0.0) {
        return 12;
    }
    (-tol.log10()).ceil().max(1.0).min(12.0) as usize
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Capacity(cmd) => commands::capacity::run(cmd),
        Command::Exponent(cmd) => commands::exponent::run(cmd),
        Command::Codec(cmd) => commands::codec::run(cmd),
        Command::Verify(cmd) => commands::verify::run(cmd),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
