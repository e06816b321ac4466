//! Command-line front end: `synth`, `estimate`, `mc` and `sliding`.
//!
//! Every command is a pure function of its flags, writes each output file
//! atomically and maps failures onto the exit codes in [`error::exit`].

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use clap::{CommandFactory, FromArgMatches};
use ofbmkit::synthesis::RNG_ID;
use ofbmkit::wavelet::FILTER_NAMES;
use ofbmkit::WaveletFilter;
use sha2::{Digest, Sha256};

pub use args::Cli;
use args::Command;
use error::{CliError, CliResult};

/// SHA-256 over the lowpass taps of every built-in filter, in name order,
/// as little-endian f64.
pub fn filter_taps_hash() -> String {
    let mut h = Sha256::new();
    for name in FILTER_NAMES {
        let f = WaveletFilter::by_name(name).expect("built-in filter");
        h.update(name.as_bytes());
        for t in &f.lowpass {
            h.update(t.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn version_string() -> String {
    format!(
        "{} (filters sha256:{}; rng {})",
        env!("CARGO_PKG_VERSION"),
        filter_taps_hash(),
        RNG_ID
    )
}

/// Parses the process arguments; clap exits with code 2 on usage errors.
pub fn parse() -> Cli {
    let version: &'static str = Box::leak(version_string().into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Mc(a) => commands::mc(a),
        Command::Sliding(a) => commands::sliding(a),
    })
}
